//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Sections are expressed with dotted keys. Tables
//! are written as comma-separated `x:value` pairs, e.g.
//! `b.table = 0:1.0, 10:2.0`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use super::{Command, RunManifest};
use crate::grid::{Grid, GridError};
use crate::model::{BoundaryDriver, InitialProfile, ModelError, ProblemSpec, Table, Violation};
use crate::solver::{AdvectionScheme, Picard, SolverConfig};

const REQUIRED: &[&str] = &[
    "a0",
    "beta",
    "gamma",
    "s0",
    "b_lower",
    "b_upper",
    "b.kind",
    "u0.kind",
    "grid.n_cells",
    "grid.dt",
    "grid.t_end",
];

const OPTIONAL: &[&str] = &[
    "b.value",
    "b.table",
    "u0.value",
    "u0.table",
    "b_infinity",
    "solver.advection",
    "solver.picard.enabled",
    "solver.picard.max_iters",
    "solver.picard.tol",
    "solver.bounds_tol",
    "output.stride",
    "output.plot",
    "calibrate.a0_lo",
    "calibrate.a0_hi",
];

pub const DEFAULT_PICARD_MAX_ITERS: usize = 10;
pub const DEFAULT_PICARD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("key `{key}` given twice (lines {first} and {second})")]
    Duplicate {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{found}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: `{key}`: {message}")]
    Invalid {
        line: usize,
        key: String,
        message: String,
    },
    #[error("inadmissible parameters: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Inadmissible(Vec<Violation>),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

struct Entry {
    value: String,
    line: usize,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(prev) = map.get(key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    first: prev.line,
                    second: line,
                });
            }
            map.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        for key in REQUIRED {
            if !map.contains_key(*key) {
                return Err(ConfigError::Missing {
                    key: key.to_string(),
                });
            }
        }
        Ok(Self(map))
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn require(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::Missing {
            key: key.to_string(),
        })
    }

    fn type_err(entry: &Entry, key: &str, expected: &'static str) -> ConfigError {
        ConfigError::Type {
            line: entry.line,
            key: key.to_string(),
            expected,
            found: entry.value.clone(),
        }
    }

    fn float(&self, key: &str) -> Result<f64, ConfigError> {
        let e = self.require(key)?;
        e.value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Self::type_err(e, key, "a finite number"))
    }

    fn float_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            Some(_) => self.float(key).map(Some),
            None => Ok(None),
        }
    }

    fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let e = self.require(key)?;
        e.value
            .parse::<usize>()
            .map_err(|_| Self::type_err(e, key, "a non-negative integer"))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(key) {
            Some(_) => self.count(key),
            None => Ok(default),
        }
    }

    fn flag_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" | "on" | "yes" => Ok(true),
                "false" | "off" | "no" => Ok(false),
                _ => Err(Self::type_err(e, key, "a boolean")),
            },
        }
    }

    fn table(&self, key: &str) -> Result<Table, ConfigError> {
        let e = self.require(key)?;
        let mut knots = Vec::new();
        for pair in e.value.split(',') {
            let (x, y) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| Self::type_err(e, key, "comma-separated `x:value` pairs"))?;
            let x: f64 = x
                .trim()
                .parse()
                .map_err(|_| Self::type_err(e, key, "numeric table entries"))?;
            let y: f64 = y
                .trim()
                .parse()
                .map_err(|_| Self::type_err(e, key, "numeric table entries"))?;
            knots.push((x, y));
        }
        Table::new(knots).map_err(|err: ModelError| ConfigError::Invalid {
            line: e.line,
            key: key.to_string(),
            message: err.to_string(),
        })
    }

    fn kind(&self, key: &str) -> Result<(bool, &Entry), ConfigError> {
        let e = self.require(key)?;
        match e.value.as_str() {
            "constant" => Ok((false, e)),
            "table" => Ok((true, e)),
            _ => Err(Self::type_err(e, key, "`constant` or `table`")),
        }
    }
}

/// Parses and validates a configuration file.
///
/// The returned manifest has `command = run` and `output_dir = "out"`; the
/// CLI front end overrides both.
pub fn parse_config(text: &str) -> Result<RunManifest, ConfigError> {
    let entries = Entries::parse(text)?;

    let (b_table, _) = entries.kind("b.kind")?;
    let b = if b_table {
        BoundaryDriver::Table(entries.table("b.table")?)
    } else {
        BoundaryDriver::Constant(entries.float("b.value")?)
    };
    let (u_table, _) = entries.kind("u0.kind")?;
    let u0 = if u_table {
        InitialProfile::Table(entries.table("u0.table")?)
    } else {
        InitialProfile::Constant(entries.float("u0.value")?)
    };

    let spec = ProblemSpec {
        a0: entries.float("a0")?,
        beta: entries.float("beta")?,
        gamma: entries.float("gamma")?,
        s0: entries.float("s0")?,
        b,
        u0,
        b_lower: entries.float("b_lower")?,
        b_upper: entries.float("b_upper")?,
        b_infinity: entries.float_opt("b_infinity")?,
    };
    let (fatal, warnings): (Vec<_>, Vec<_>) = spec
        .admissibility_check()
        .into_iter()
        .partition(|v| !v.is_degenerate());
    if !fatal.is_empty() {
        return Err(ConfigError::Inadmissible(fatal));
    }

    let grid = Grid::new(
        entries.count("grid.n_cells")?,
        entries.float("grid.dt")?,
        entries.float("grid.t_end")?,
    )?;

    let advection = match entries.raw("solver.advection") {
        None => AdvectionScheme::Central,
        Some(e) => match e.value.as_str() {
            "central" => AdvectionScheme::Central,
            "upwind" => AdvectionScheme::Upwind,
            _ => {
                return Err(Entries::type_err(
                    e,
                    "solver.advection",
                    "`central` or `upwind`",
                ))
            }
        },
    };
    let picard = if entries.flag_or("solver.picard.enabled", false)? {
        let max_iters = entries.count_or("solver.picard.max_iters", DEFAULT_PICARD_MAX_ITERS)?;
        let tol = entries
            .float_opt("solver.picard.tol")?
            .unwrap_or(DEFAULT_PICARD_TOL);
        if max_iters < 1 {
            let e = entries.require("solver.picard.max_iters")?;
            return Err(ConfigError::Invalid {
                line: e.line,
                key: "solver.picard.max_iters".into(),
                message: "must be at least 1".into(),
            });
        }
        if !(tol > 0.0) {
            let e = entries.require("solver.picard.tol")?;
            return Err(ConfigError::Invalid {
                line: e.line,
                key: "solver.picard.tol".into(),
                message: "must be positive".into(),
            });
        }
        Picard::On { max_iters, tol }
    } else {
        Picard::Off
    };
    let bounds_tol = entries.float_opt("solver.bounds_tol")?.unwrap_or(1e-10);
    if bounds_tol < 0.0 {
        let e = entries.require("solver.bounds_tol")?;
        return Err(ConfigError::Invalid {
            line: e.line,
            key: "solver.bounds_tol".into(),
            message: "must be non-negative".into(),
        });
    }

    let output_stride = entries.count_or("output.stride", 1)?;
    if output_stride < 1 {
        let e = entries.require("output.stride")?;
        return Err(ConfigError::Invalid {
            line: e.line,
            key: "output.stride".into(),
            message: "must be at least 1".into(),
        });
    }

    let a0_lo = entries
        .float_opt("calibrate.a0_lo")?
        .unwrap_or(spec.a0 / 10.0);
    let a0_hi = entries
        .float_opt("calibrate.a0_hi")?
        .unwrap_or(spec.a0 * 10.0);

    Ok(RunManifest {
        command: Command::Run,
        spec,
        grid,
        solver: SolverConfig {
            advection,
            picard,
            bounds_tol,
        },
        output_dir: PathBuf::from("out"),
        output_stride,
        plot: entries.flag_or("output.plot", false)?,
        calibration_bracket: (a0_lo, a0_hi),
        warnings,
    })
}
