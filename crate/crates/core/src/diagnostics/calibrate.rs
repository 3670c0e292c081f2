//! Calibration of the kinetic coefficient `a0` against observed fronts.
//!
//! The objective is the sum of squared differences between observed front
//! positions and the simulated front (linearly interpolated in time). It is
//! minimised by golden-section search in `ln a0`, after a coarse scan of the
//! bracket has confirmed a single valley.

use thiserror::Error;

use crate::grid::Grid;
use crate::model::ProblemSpec;
use crate::solver::{run, SolveError, SolverConfig};

/// Relative tolerance on `a0` at which the search stops.
pub const REL_TOL: f64 = 1e-3;
/// Points of the unimodality pre-scan, endpoints included.
const SCAN_POINTS: usize = 9;
/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("no observations")]
    EmptyObservations,
    #[error("observation time {t} outside (0, t_end = {t_end}]")]
    ObservationOutsideHorizon { t: f64, t_end: f64 },
    #[error("invalid bracket [{lo}, {hi}]; need 0 < lo < hi")]
    BadBracket { lo: f64, hi: f64 },
    #[error("objective is not unimodal on [{lo}, {hi}]; widen or split the bracket")]
    NotUnimodal {
        lo: f64,
        hi: f64,
        scan: Vec<(f64, f64)>,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketEdge {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub a0_hat: f64,
    pub sse: f64,
    /// Set when the minimiser sits on a bracket edge, which usually means the
    /// true value lies outside the bracket.
    pub boundary: Option<BracketEdge>,
    pub evaluations: usize,
}

struct Objective<'a> {
    template: &'a ProblemSpec,
    grid: &'a Grid,
    config: &'a SolverConfig,
    observed: &'a [(f64, f64)],
    evaluations: usize,
}

impl Objective<'_> {
    fn sse(&mut self, log_a0: f64) -> Result<f64, SolveError> {
        self.evaluations += 1;
        let mut spec = self.template.clone();
        spec.a0 = log_a0.exp();
        let report = run(&spec, self.grid, self.config)?;
        Ok(self
            .observed
            .iter()
            .map(|&(t, s)| (report.front_at(t) - s).powi(2))
            .sum())
    }
}

/// True when `values` fall then rise (ties allowed within `slack`).
fn single_valley(values: &[f64], slack: f64) -> bool {
    let k = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    values[..=k].windows(2).all(|w| w[1] <= w[0] + slack)
        && values[k..].windows(2).all(|w| w[1] + slack >= w[0])
}

pub fn calibrate_a0(
    template: &ProblemSpec,
    grid: &Grid,
    config: &SolverConfig,
    observed: &[(f64, f64)],
    bracket: (f64, f64),
) -> Result<Calibration, CalibrationError> {
    if observed.is_empty() {
        return Err(CalibrationError::EmptyObservations);
    }
    if let Some(&(t, _)) = observed
        .iter()
        .find(|&&(t, _)| !(t > 0.0 && t <= grid.t_end))
    {
        return Err(CalibrationError::ObservationOutsideHorizon {
            t,
            t_end: grid.t_end,
        });
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(CalibrationError::BadBracket { lo, hi });
    }

    let mut obj = Objective {
        template,
        grid,
        config,
        observed,
        evaluations: 0,
    };
    let (x_lo, x_hi) = (lo.ln(), hi.ln());

    let mut scan = Vec::with_capacity(SCAN_POINTS);
    for k in 0..SCAN_POINTS {
        let x = x_lo + (x_hi - x_lo) * k as f64 / (SCAN_POINTS - 1) as f64;
        scan.push((x, obj.sse(x)?));
    }
    let values: Vec<f64> = scan.iter().map(|p| p.1).collect();
    let scale = values.iter().cloned().fold(0.0, f64::max);
    if !single_valley(&values, 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(CalibrationError::NotUnimodal {
            lo,
            hi,
            scan: scan.into_iter().map(|(x, f)| (x.exp(), f)).collect(),
        });
    }

    // narrow to the scan cells around the discrete minimum
    let k_min = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let mut a = scan[k_min.saturating_sub(1)].0;
    let mut b = scan[(k_min + 1).min(SCAN_POINTS - 1)].0;

    let tol = REL_TOL.ln_1p();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = obj.sse(c)?;
    let mut fd = obj.sse(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.sse(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.sse(d)?;
        }
    }

    // the best of the interior estimate and the two bracket ends
    let x_mid = 0.5 * (a + b);
    let f_mid = obj.sse(x_mid)?;
    let mut best = (x_mid, f_mid);
    for &(x, f) in [scan[0], scan[SCAN_POINTS - 1]].iter() {
        if f < best.1 {
            best = (x, f);
        }
    }

    let boundary = if best.0 - x_lo <= tol {
        Some(BracketEdge::Lower)
    } else if x_hi - best.0 <= tol {
        Some(BracketEdge::Upper)
    } else {
        None
    };

    Ok(Calibration {
        a0_hat: best.0.exp(),
        sse: best.1,
        boundary,
        evaluations: obj.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundaryDriver, InitialProfile};

    fn template() -> ProblemSpec {
        ProblemSpec {
            a0: 1.0,
            beta: 1.0,
            gamma: 1.0,
            s0: 1.0,
            b: BoundaryDriver::Constant(1.0),
            u0: InitialProfile::Constant(0.5),
            b_lower: 1.0,
            b_upper: 1.0,
            b_infinity: None,
        }
    }

    fn synthetic(a0: f64, grid: &Grid) -> Vec<(f64, f64)> {
        let mut spec = template();
        spec.a0 = a0;
        let report = run(&spec, grid, &SolverConfig::default()).unwrap();
        (1..=10)
            .map(|k| {
                let t = grid.t_end * k as f64 / 10.0;
                (t, report.front_at(t))
            })
            .collect()
    }

    #[test]
    fn single_valley_shapes() {
        assert!(single_valley(&[3.0, 2.0, 1.0, 2.0], 0.0));
        assert!(single_valley(&[1.0, 2.0, 3.0], 0.0));
        assert!(single_valley(&[3.0, 2.0, 1.0], 0.0));
        assert!(!single_valley(&[1.0, 2.0, 0.5, 3.0], 0.0));
    }

    #[test]
    fn round_trip_recovers_generator() {
        let grid = Grid::new(16, 0.02, 4.0).unwrap();
        let obs = synthetic(0.3, &grid);
        let fit = calibrate_a0(
            &template(),
            &grid,
            &SolverConfig::default(),
            &obs,
            (0.05, 2.0),
        )
        .unwrap();
        assert!((fit.a0_hat / 0.3 - 1.0).abs() < 0.05, "{fit:?}");
        assert_eq!(fit.boundary, None);
    }

    #[test]
    fn no_growth_target_goes_to_lower_edge() {
        let grid = Grid::new(16, 0.02, 4.0).unwrap();
        let obs: Vec<(f64, f64)> = (1..=10).map(|k| (0.4 * k as f64, 1.0)).collect();
        let fit = calibrate_a0(
            &template(),
            &grid,
            &SolverConfig::default(),
            &obs,
            (0.05, 2.0),
        )
        .unwrap();
        assert_eq!(fit.boundary, Some(BracketEdge::Lower));
        assert!((fit.a0_hat - 0.05).abs() < 1e-12);
    }

    #[test]
    fn misbracketing_is_flagged() {
        let grid = Grid::new(16, 0.02, 4.0).unwrap();
        let obs = synthetic(0.3, &grid);
        let fit = calibrate_a0(
            &template(),
            &grid,
            &SolverConfig::default(),
            &obs,
            (0.5, 2.0),
        )
        .unwrap();
        assert_eq!(fit.boundary, Some(BracketEdge::Lower));
        let fit = calibrate_a0(
            &template(),
            &grid,
            &SolverConfig::default(),
            &obs,
            (0.01, 0.1),
        )
        .unwrap();
        assert_eq!(fit.boundary, Some(BracketEdge::Upper));
    }

    #[test]
    fn input_errors() {
        let grid = Grid::new(16, 0.02, 4.0).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(
            calibrate_a0(&template(), &grid, &cfg, &[], (0.1, 1.0)),
            Err(CalibrationError::EmptyObservations)
        );
        assert!(matches!(
            calibrate_a0(&template(), &grid, &cfg, &[(5.0, 1.0)], (0.1, 1.0)),
            Err(CalibrationError::ObservationOutsideHorizon { .. })
        ));
        assert!(matches!(
            calibrate_a0(&template(), &grid, &cfg, &[(1.0, 1.0)], (1.0, 0.1)),
            Err(CalibrationError::BadBracket { .. })
        ));
    }
}
