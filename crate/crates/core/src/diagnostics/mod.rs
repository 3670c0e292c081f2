//! Post-hoc analysis of solver runs.

mod calibrate;
mod convergence;
mod power_law;
mod stationary;

pub use calibrate::{calibrate_a0, BracketEdge, Calibration, CalibrationError};
pub use convergence::{
    estimate_order, observed_order, richardson_orders, ConvergenceError, Orders, RefinementStudy,
};
pub use power_law::{
    fit_power_law, fit_power_law_series, fit_power_law_with, FitError, FitTarget, PowerLawFit,
};
pub use stationary::{stationary_residual, StationaryError, StationaryResidual};

use std::time::Duration;

use crate::grid::{Grid, TransformedState};
use crate::model::ProblemSpec;
use crate::solver::{SolverConfig, StepDiagnostics};

/// Slack on the linear front envelope `s0 + a0 (b*/gamma) t`.
pub const ENVELOPE_TOL: f64 = 1e-12;

/// Time series recorded by a run, one entry per output step.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub times: Vec<f64>,
    pub fronts: Vec<f64>,
    pub front_speeds: Vec<f64>,
    pub u_at_0: Vec<f64>,
    pub u_at_1: Vec<f64>,
    pub masses: Vec<f64>,
    pub mass_residuals: Vec<f64>,
    pub energies: Vec<f64>,
    /// Nodes outside `[-tol, b*/gamma + tol]` at each recorded step.
    pub bound_violations: Vec<usize>,
    pub meta: ReportMeta,
    pub final_state: TransformedState,
}

#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub spec: ProblemSpec,
    pub grid: Grid,
    pub config: SolverConfig,
    pub stride: usize,
    pub n_steps: usize,
    pub wall_time: Duration,
    pub picard: PicardStats,
    pub checks: InvariantSummary,
}

impl SolveReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_front(&self) -> f64 {
        *self
            .fronts
            .last()
            .expect("report holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("report holds at least the initial state")
    }

    /// Front position at `t`, linearly interpolated between recorded samples.
    pub fn front_at(&self, t: f64) -> f64 {
        let ts = &self.times;
        if t <= ts[0] {
            return self.fronts[0];
        }
        if t >= ts[ts.len() - 1] {
            return self.final_front();
        }
        let j = ts.partition_point(|&x| x <= t);
        let w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
        self.fronts[j - 1] + w * (self.fronts[j] - self.fronts[j - 1])
    }

    /// Checks the structural invariants: equal lengths, sorted times,
    /// nondecreasing fronts.
    pub fn is_consistent(&self) -> bool {
        let n = self.times.len();
        let same_len = [
            self.fronts.len(),
            self.front_speeds.len(),
            self.u_at_0.len(),
            self.u_at_1.len(),
            self.masses.len(),
            self.mass_residuals.len(),
            self.energies.len(),
            self.bound_violations.len(),
        ]
        .iter()
        .all(|&m| m == n);
        same_len
            && self.times.windows(2).all(|w| w[0] < w[1])
            && self.fronts.windows(2).all(|w| w[0] <= w[1])
    }

    /// Index of the largest recorded energy.
    pub fn energy_argmax(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.energies.iter().enumerate() {
            if e > self.energies[best] {
                best = i;
            }
        }
        best
    }
}

/// Column buffers filled while a run progresses.
#[derive(Debug, Default)]
pub(crate) struct Recorder {
    times: Vec<f64>,
    fronts: Vec<f64>,
    front_speeds: Vec<f64>,
    u_at_0: Vec<f64>,
    u_at_1: Vec<f64>,
    masses: Vec<f64>,
    mass_residuals: Vec<f64>,
    energies: Vec<f64>,
    bound_violations: Vec<usize>,
}

pub(crate) struct Row {
    pub front_speed: f64,
    pub mass: f64,
    pub mass_residual: f64,
    pub energy: f64,
    pub out_of_bounds: usize,
}

impl Recorder {
    pub(crate) fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            times: v(),
            fronts: v(),
            front_speeds: v(),
            u_at_0: v(),
            u_at_1: v(),
            masses: v(),
            mass_residuals: v(),
            energies: v(),
            bound_violations: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, state: &TransformedState, row: Row) {
        self.times.push(state.t);
        self.fronts.push(state.s);
        self.front_speeds.push(row.front_speed);
        self.u_at_0.push(state.u_left());
        self.u_at_1.push(state.u_front());
        self.masses.push(row.mass);
        self.mass_residuals.push(row.mass_residual);
        self.energies.push(row.energy);
        self.bound_violations.push(row.out_of_bounds);
    }

    pub(crate) fn finish(self, meta: ReportMeta, final_state: TransformedState) -> SolveReport {
        SolveReport {
            times: self.times,
            fronts: self.fronts,
            front_speeds: self.front_speeds,
            u_at_0: self.u_at_0,
            u_at_1: self.u_at_1,
            masses: self.masses,
            mass_residuals: self.mass_residuals,
            energies: self.energies,
            bound_violations: self.bound_violations,
            meta,
            final_state,
        }
    }
}

/// Invariant bookkeeping over every step of a run (not only recorded ones).
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSummary {
    pub u_cap: f64,
    pub bounds_tol: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// Steps with at least one node outside the bounds.
    pub out_of_bounds_steps: usize,
    /// Number of steps where the front moved backwards.
    pub front_regressions: usize,
    /// Largest `s(t) - (s0 + a0 (b*/gamma) t)` seen.
    pub max_envelope_excess: f64,
    pub steps_checked: usize,
}

impl InvariantSummary {
    pub fn new(spec: &ProblemSpec, bounds_tol: f64) -> Self {
        Self {
            u_cap: spec.u_max(),
            bounds_tol,
            min_u: f64::INFINITY,
            max_u: f64::NEG_INFINITY,
            out_of_bounds_steps: 0,
            front_regressions: 0,
            max_envelope_excess: f64::NEG_INFINITY,
            steps_checked: 0,
        }
    }

    pub fn count_out_of_bounds(&self, state: &TransformedState) -> usize {
        let lo = -self.bounds_tol;
        let hi = self.u_cap + self.bounds_tol;
        state
            .u_tilde
            .iter()
            .filter(|&&u| !(u >= lo && u <= hi))
            .count()
    }

    pub fn observe(
        &mut self,
        spec: &ProblemSpec,
        state: &TransformedState,
        prev_front: Option<f64>,
    ) {
        for &u in &state.u_tilde {
            self.min_u = self.min_u.min(u);
            self.max_u = self.max_u.max(u);
        }
        if self.count_out_of_bounds(state) > 0 {
            self.out_of_bounds_steps += 1;
        }
        if let Some(prev) = prev_front {
            if state.s < prev {
                self.front_regressions += 1;
            }
        }
        let excess = state.s - spec.front_envelope(state.t);
        self.max_envelope_excess = self.max_envelope_excess.max(excess);
        self.steps_checked += 1;
    }

    pub fn bounds_hold(&self) -> bool {
        self.out_of_bounds_steps == 0
    }

    pub fn front_monotone(&self) -> bool {
        self.front_regressions == 0
    }

    pub fn envelope_holds(&self) -> bool {
        self.max_envelope_excess <= ENVELOPE_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PicardStats {
    pub total_iters: usize,
    pub max_iters_in_step: usize,
    /// Largest successive-change ratio seen in any step (0 when none).
    pub max_ratio: f64,
    pub steps: usize,
}

impl PicardStats {
    pub fn observe(&mut self, diag: &StepDiagnostics) {
        self.steps += 1;
        self.total_iters += diag.picard_iters;
        self.max_iters_in_step = self.max_iters_in_step.max(diag.picard_iters);
        for &r in &diag.picard_ratios {
            self.max_ratio = self.max_ratio.max(r);
        }
    }
}
