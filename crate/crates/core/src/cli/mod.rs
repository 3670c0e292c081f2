//! Configuration, experiment orchestration and file output for the
//! `kinetic-front` binary.

mod commands;
mod config;
mod output;

pub use commands::{
    calibrate, check, converge, growth, parse_observed, parse_sweep_param, run, sweep, CheckLine,
    CheckSummary, GrowthSummary, SweepEntry,
};
pub use config::{parse_config, ConfigError, DEFAULT_PICARD_MAX_ITERS, DEFAULT_PICARD_TOL};
pub use output::{emit_report, fmt17, front_svg, meta_text, write_timeseries, CSV_HEADER};

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::diagnostics::{CalibrationError, ConvergenceError, FitError};
use crate::grid::Grid;
use crate::model::{ProblemSpec, Violation};
use crate::solver::{SolveError, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Converge,
    Growth,
    Calibrate,
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::Converge => "converge",
            Command::Growth => "growth",
            Command::Calibrate => "calibrate",
            Command::Check => "check",
        }
    }
}

/// Everything needed to carry out one CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub spec: ProblemSpec,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub output_stride: usize,
    pub plot: bool,
    /// Search bracket for `a0` used by the calibrate command.
    pub calibration_bracket: (f64, f64),
    /// Degenerate (zero-drive) assumption violations that do not block a run.
    pub warnings: Vec<Violation>,
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVALID_CONFIG: i32 = 1;
    pub const SOLVER_FAILURE: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("convergence study: {0}")]
    Convergence(#[from] ConvergenceError),
    #[error("calibration: {0}")]
    Calibration(#[from] CalibrationError),
    #[error("power-law fit: {0}")]
    Fit(#[from] FitError),
    #[error("acceptance check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => exit::INVALID_CONFIG,
            CliError::CheckFailed(_) => exit::CHECK_FAILED,
            _ => exit::SOLVER_FAILURE,
        }
    }
}
