//! Backward-Euler time stepping of the transformed system on `[0, 1]`.
//!
//! Each step first advances the front with the lagged endpoint value and then
//! solves one tridiagonal linear system for the new field. Boundary conditions
//! are imposed with ghost nodes eliminated against the boundary equations, so
//! the stencil stays second order up to both ends.

use std::time::Instant;

use thiserror::Error;

use crate::diagnostics::{InvariantSummary, PicardStats, Recorder, ReportMeta, Row, SolveReport};
use crate::grid::{landau_forward, state_mass, Grid, GridError, PhysicalField, TransformedState};
use crate::model::{psi_energy, sigma, InitialProfile, ProblemSpec, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionScheme {
    #[default]
    Central,
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Picard {
    #[default]
    Off,
    On {
        max_iters: usize,
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub advection: AdvectionScheme,
    pub picard: Picard,
    /// Slack allowed by the discrete maximum-principle check.
    pub bounds_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            advection: AdvectionScheme::Central,
            picard: Picard::Off,
            bounds_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn upwind() -> Self {
        Self {
            advection: AdvectionScheme::Upwind,
            ..Self::default()
        }
    }

    pub fn with_picard(mut self, max_iters: usize, tol: f64) -> Self {
        self.picard = Picard::On { max_iters, tol };
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if let Picard::On { max_iters, tol } = self.picard {
            if max_iters < 1 || !(tol > 0.0) {
                return Err(SolveError::BadConfig(format!(
                    "picard needs max_iters >= 1 and tol > 0, got {max_iters} and {tol}"
                )));
            }
        }
        if !(self.bounds_tol >= 0.0) {
            return Err(SolveError::BadConfig(format!(
                "bounds_tol must be >= 0, got {}",
                self.bounds_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepDiagnostics {
    pub picard_iters: usize,
    /// Ratios of successive endpoint changes inside the Picard loop.
    pub picard_ratios: Vec<f64>,
    pub front_speed: f64,
    /// Max-norm residual of the (dt-scaled) linear system after the solve.
    pub linear_solve_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    NotDiagonallyDominant { row: usize },
    ZeroPivot { row: usize },
    NonFinite,
    PicardNotConverged { iters: usize, last_change: f64 },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NotDiagonallyDominant { row } => {
                write!(f, "matrix row {row} is not diagonally dominant")
            }
            RejectReason::ZeroPivot { row } => write!(f, "zero pivot at row {row}"),
            RejectReason::NonFinite => f.write_str("non-finite value in solution"),
            RejectReason::PicardNotConverged { iters, last_change } => {
                write!(f, "picard loop not converged after {iters} iterations (last change {last_change:e})")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("step rejected at t = {t}: {reason}; reduce dt")]
    StepRejected { t: f64, reason: RejectReason },
    #[error("inadmissible problem: {}", join_violations(.0))]
    Inadmissible(Vec<Violation>),
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Front speed `a0 * sigma(u(1))` for the given state.
pub fn front_speed(state: &TransformedState, spec: &ProblemSpec) -> f64 {
    spec.a0 * sigma(state.u_front())
}

/// Step size heuristic: the front may cross at most half a cell of the
/// initial mesh per step at the maximal admissible speed, and the step is
/// capped by the horizon.
pub fn stable_dt(spec: &ProblemSpec, n_cells: usize, t_end: f64) -> f64 {
    let v_max = spec.a0 * spec.u_max();
    let h_phys = spec.s0 / n_cells as f64;
    let limit = if v_max > 0.0 {
        0.5 * h_phys / v_max
    } else {
        f64::INFINITY
    };
    limit.min(t_end / 10.0)
}

/// Initial transformed state `u0(y s0)` on the grid nodes.
pub fn initial_state(spec: &ProblemSpec, n_cells: usize) -> Result<TransformedState, GridError> {
    let s0 = spec.s0;
    let z_nodes: Vec<f64> = (0..=n_cells)
        .map(|i| i as f64 / n_cells as f64 * s0)
        .collect();
    let u = match &spec.u0 {
        InitialProfile::Constant(c) => vec![*c; n_cells + 1],
        InitialProfile::Table(_) => z_nodes.iter().map(|&z| spec.u0.eval(z)).collect(),
    };
    let field = PhysicalField { s: s0, z_nodes, u };
    Ok(TransformedState {
        t: 0.0,
        s: s0,
        u_tilde: landau_forward(&field, n_cells)?,
    })
}

/// Tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

impl Tridiagonal {
    fn with_len(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    fn check_dominance(&self) -> Result<(), RejectReason> {
        for i in 0..self.diag.len() {
            let off = self.lower[i].abs() + self.upper[i].abs();
            if !(self.diag[i].abs() >= off) {
                return Err(RejectReason::NotDiagonallyDominant { row: i });
            }
        }
        Ok(())
    }

    /// Thomas algorithm.
    fn solve(&self) -> Result<Vec<f64>, RejectReason> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 {
            return Err(RejectReason::ZeroPivot { row: 0 });
        }
        c[0] = self.upper[0] / pivot;
        d[0] = self.rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot == 0.0 {
                return Err(RejectReason::ZeroPivot { row: i });
            }
            c[i] = self.upper[i] / pivot;
            d[i] = (self.rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(RejectReason::NonFinite);
        }
        Ok(x)
    }

    fn residual(&self, x: &[f64]) -> f64 {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i] * x[i] - self.rhs[i];
                if i > 0 {
                    r += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    r += self.upper[i] * x[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Assembles the dt-scaled system for the new field, given the front speed
/// `v` and the new front position `s_new`.
fn assemble(
    prev: &[f64],
    spec: &ProblemSpec,
    b_new: f64,
    dt: f64,
    v: f64,
    s_new: f64,
    scheme: AdvectionScheme,
) -> Tridiagonal {
    let len = prev.len();
    let n = len - 1;
    let h = 1.0 / n as f64;
    let diff = dt / (s_new * s_new * h * h);
    let mut sys = Tridiagonal::with_len(len);

    // y = 0: ghost value u_{-1} = u_1 + 2 h s beta (b - gamma u_0)
    let robin = 2.0 * dt * spec.beta / (s_new * h);
    sys.diag[0] = 1.0 + 2.0 * diff + robin * spec.gamma;
    sys.upper[0] = -2.0 * diff;
    sys.rhs[0] = prev[0] + robin * b_new;

    for i in 1..n {
        let adv = dt * (i as f64 * h) * v / s_new;
        let (lower, diag, upper) = match scheme {
            AdvectionScheme::Central => {
                let a = adv / (2.0 * h);
                (-diff + a, 1.0 + 2.0 * diff, -diff - a)
            }
            // transport runs towards y = 0, so the upwind side is i + 1
            AdvectionScheme::Upwind => {
                let a = adv / h;
                (-diff, 1.0 + 2.0 * diff + a, -diff - a)
            }
        };
        sys.lower[i] = lower;
        sys.diag[i] = diag;
        sys.upper[i] = upper;
        sys.rhs[i] = prev[i];
    }

    // y = 1: ghost value u_{N+1} = u_{N-1} - 2 h s v u_N, and the advection
    // term uses the boundary derivative u_y(1) = -s v u_N directly.
    sys.lower[n] = -2.0 * diff;
    sys.diag[n] = 1.0 + 2.0 * diff + 2.0 * dt * v / (s_new * h) + dt * v * v;
    sys.rhs[n] = prev[n];

    sys
}

/// One backward-Euler step of size `grid.dt`.
pub fn step(
    state: &TransformedState,
    spec: &ProblemSpec,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<(TransformedState, StepDiagnostics), SolveError> {
    step_by(state, spec, grid.dt, config)
}

/// One backward-Euler step of an explicit size `dt`.
pub fn step_by(
    state: &TransformedState,
    spec: &ProblemSpec,
    dt: f64,
    config: &SolverConfig,
) -> Result<(TransformedState, StepDiagnostics), SolveError> {
    let t_new = state.t + dt;
    let b_new = spec.eval_b(t_new);
    let reject = |reason| SolveError::StepRejected { t: t_new, reason };

    let (max_iters, tol) = match config.picard {
        Picard::Off => (1, f64::INFINITY),
        Picard::On { max_iters, tol } => (max_iters, tol),
    };

    let mut diag = StepDiagnostics::default();
    let mut u_star = state.u_front();
    let mut last_change = f64::INFINITY;

    for iter in 1..=max_iters {
        let v = spec.a0 * sigma(u_star);
        let s_new = state.s + dt * v;
        let sys = assemble(&state.u_tilde, spec, b_new, dt, v, s_new, config.advection);
        sys.check_dominance().map_err(reject)?;
        let u_new = sys.solve().map_err(reject)?;

        let endpoint = u_new[u_new.len() - 1];
        let change = (endpoint - u_star).abs();
        diag.picard_iters = iter;
        diag.front_speed = v;
        diag.linear_solve_residual = sys.residual(&u_new);

        let done = match config.picard {
            Picard::Off => true,
            Picard::On { .. } => {
                if iter > 1 && last_change > 0.0 {
                    diag.picard_ratios.push(change / last_change);
                }
                change < tol
            }
        };
        if done {
            let next = TransformedState {
                t: t_new,
                s: s_new,
                u_tilde: u_new,
            };
            return Ok((next, diag));
        }
        last_change = change;
        u_star = endpoint;
    }

    Err(reject(RejectReason::PicardNotConverged {
        iters: max_iters,
        last_change,
    }))
}

/// Runs from `t = 0` to `grid.t_end`, recording every step.
pub fn run(
    spec: &ProblemSpec,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    run_with_stride(spec, grid, config, 1)
}

/// Runs from `t = 0` to `grid.t_end`, recording every `stride`-th step
/// (plus the initial state). Invariants are checked at every step.
pub fn run_with_stride(
    spec: &ProblemSpec,
    grid: &Grid,
    config: &SolverConfig,
    stride: usize,
) -> Result<SolveReport, SolveError> {
    let fatal: Vec<Violation> = spec
        .admissibility_check()
        .into_iter()
        .filter(|v| !v.is_degenerate())
        .collect();
    if !fatal.is_empty() {
        return Err(SolveError::Inadmissible(fatal));
    }
    grid.validate()?;
    config.validate()?;
    let stride = stride.max(1);
    let clock = Instant::now();

    let mut state = initial_state(spec, grid.n_cells)?;
    let n_steps = grid.n_steps();
    let mass0 = state_mass(&state);
    let mut influx = 0.0;

    let mut rec = Recorder::with_capacity(n_steps / stride + 1);
    let mut checks = InvariantSummary::new(spec, config.bounds_tol);
    let mut picard = PicardStats::default();

    checks.observe(spec, &state, None);
    rec.push(
        &state,
        Row {
            front_speed: front_speed(&state, spec),
            mass: mass0,
            mass_residual: 0.0,
            energy: psi_energy(&state, spec, 0.0),
            out_of_bounds: checks.count_out_of_bounds(&state),
        },
    );

    for k in 1..=n_steps {
        let t_new = grid.time_at(k);
        let dt = t_new - state.t;
        let (mut next, diag) = step_by(&state, spec, dt, config)?;
        // pin the clock to the grid so that time levels are not accumulated sums
        next.t = t_new;

        influx += dt * spec.beta * (spec.eval_b(t_new) - spec.gamma * next.u_left());
        checks.observe(spec, &next, Some(state.s));
        picard.observe(&diag);

        if k % stride == 0 {
            let mass = state_mass(&next);
            rec.push(
                &next,
                Row {
                    front_speed: diag.front_speed,
                    mass,
                    mass_residual: mass - mass0 - influx,
                    energy: psi_energy(&next, spec, t_new),
                    out_of_bounds: checks.count_out_of_bounds(&next),
                },
            );
        }
        state = next;
    }

    let meta = ReportMeta {
        spec: spec.clone(),
        grid: *grid,
        config: *config,
        stride,
        n_steps,
        wall_time: clock.elapsed(),
        picard,
        checks,
    };
    Ok(rec.finish(meta, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundaryDriver, Table};

    fn spec_with(b: f64, u0: f64) -> ProblemSpec {
        ProblemSpec {
            a0: 2.0,
            beta: 1.0,
            gamma: 1.0,
            s0: 1.0,
            b: BoundaryDriver::Constant(b),
            u0: InitialProfile::Constant(u0),
            b_lower: b.min(0.5),
            b_upper: b.max(1.0),
            b_infinity: None,
        }
    }

    fn flat(s: f64, n: usize, c: f64) -> TransformedState {
        TransformedState {
            t: 0.0,
            s,
            u_tilde: vec![c; n + 1],
        }
    }

    #[test]
    fn front_speed_examples() {
        let spec = spec_with(1.0, 0.5);
        let mut st = flat(1.0, 8, 0.0);
        *st.u_tilde.last_mut().unwrap() = 0.5;
        assert_eq!(front_speed(&st, &spec), 1.0);
        *st.u_tilde.last_mut().unwrap() = -0.3;
        assert_eq!(front_speed(&st, &spec), 0.0);
        *st.u_tilde.last_mut().unwrap() = 0.0;
        assert_eq!(front_speed(&st, &spec), 0.0);
    }

    #[test]
    fn zero_state_is_exact_fixed_point() {
        let spec = spec_with(0.0, 0.0);
        let grid = Grid::new(16, 1e-2, 1.0).unwrap();
        let st = flat(1.3, 16, 0.0);
        for scheme in [AdvectionScheme::Central, AdvectionScheme::Upwind] {
            let cfg = SolverConfig {
                advection: scheme,
                ..Default::default()
            };
            let (next, d) = step(&st, &spec, &grid, &cfg).unwrap();
            assert_eq!(next.s, 1.3);
            assert!(next.u_tilde.iter().all(|&u| u == 0.0));
            assert_eq!(d.front_speed, 0.0);
        }
    }

    #[test]
    fn front_update_uses_lagged_endpoint() {
        let spec = spec_with(1.0, 0.4);
        let grid = Grid::new(32, 0.05, 1.0).unwrap();
        let st = flat(1.5, 32, 0.4);
        let (next, d) = step(&st, &spec, &grid, &SolverConfig::default()).unwrap();
        assert_eq!(next.s, 1.5 + 0.05 * 2.0 * 0.4);
        assert_eq!(d.front_speed, 0.8);
        assert!(d.linear_solve_residual < 1e-13);
    }

    #[test]
    fn single_step_matches_substepped_reference_to_order_dt() {
        let mut spec = spec_with(1.0, 0.0);
        spec.u0 = InitialProfile::Table(Table::new(vec![(0.0, 0.75), (1.0, 0.5)]).unwrap());
        spec.a0 = 1.0;
        let st = initial_state(&spec, 64).unwrap();
        let cfg = SolverConfig::default();

        let deviation = |dt: f64| {
            let (coarse, _) = step_by(&st, &spec, dt, &cfg).unwrap();
            let mut fine = st.clone();
            let sub = (dt / 1e-6).round() as usize;
            for _ in 0..sub {
                fine = step_by(&fine, &spec, dt / sub as f64, &cfg).unwrap().0;
            }
            let du = coarse
                .u_tilde
                .iter()
                .zip(&fine.u_tilde)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            du.max((coarse.s - fine.s).abs())
        };
        let e1 = deviation(1e-3);
        let e2 = deviation(5e-4);
        assert!(e1 <= 1e-3, "deviation {e1}");
        // halving dt at least halves the one-step deviation
        assert!(e1 / e2 > 1.9, "{e1} {e2}");
    }

    #[test]
    fn picard_converges_and_contracts() {
        let spec = spec_with(1.0, 0.8);
        let st = flat(1.0, 32, 0.8);
        let cfg = SolverConfig::default().with_picard(20, 1e-12);
        let (next, d) = step_by(&st, &spec, 1e-2, &cfg).unwrap();
        assert!(d.picard_iters > 1 && d.picard_iters <= 20);
        assert!(
            d.picard_ratios.iter().all(|&r| r < 1.0),
            "{:?}",
            d.picard_ratios
        );
        // self-consistency: the speed used matches the speed of the result
        assert!((d.front_speed - front_speed(&next, &spec)).abs() < 1e-11);
    }

    #[test]
    fn picard_nonconvergence_rejects_step() {
        let spec = spec_with(1.0, 0.8);
        let st = flat(1.0, 32, 0.8);
        let cfg = SolverConfig::default().with_picard(1, 1e-15);
        let err = step_by(&st, &spec, 0.5, &cfg).unwrap_err();
        assert!(matches!(
            err,
            SolveError::StepRejected {
                reason: RejectReason::PicardNotConverged { .. },
                ..
            }
        ));
    }

    #[test]
    fn central_advection_rejects_large_cell_peclet() {
        let mut spec = spec_with(1.0, 1.0);
        spec.a0 = 1e4;
        let st = flat(1.0, 64, 1.0);
        let err = step_by(&st, &spec, 1.0, &SolverConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            SolveError::StepRejected {
                reason: RejectReason::NotDiagonallyDominant { .. },
                ..
            }
        ));
        // the upwind matrix is an M-matrix for every dt
        assert!(step_by(&st, &spec, 1.0, &SolverConfig::upwind()).is_ok());
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = SolverConfig::default().with_picard(0, 1e-8);
        assert!(matches!(cfg.validate(), Err(SolveError::BadConfig(_))));
        let cfg = SolverConfig::default().with_picard(3, 0.0);
        assert!(matches!(cfg.validate(), Err(SolveError::BadConfig(_))));
    }

    #[test]
    fn run_rejects_inadmissible_spec() {
        let mut spec = spec_with(1.0, 0.5);
        spec.gamma = -1.0;
        let grid = Grid::new(8, 0.1, 1.0).unwrap();
        assert!(matches!(
            run(&spec, &grid, &SolverConfig::default()),
            Err(SolveError::Inadmissible(_))
        ));
    }

    #[test]
    fn stable_dt_heuristic() {
        let spec = spec_with(1.0, 0.5);
        // v_max = 2, h = 1/10 -> 0.025
        assert_eq!(stable_dt(&spec, 10, 100.0), 0.025);
        assert_eq!(stable_dt(&spec, 10, 0.1), 0.01);
    }
}
