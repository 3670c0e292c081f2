//! Observed convergence orders of the terminal front position under
//! refinement in time and in space.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::Grid;
use crate::model::ProblemSpec;
use crate::solver::{run, SolveError, SolverConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("grids {0} and {1} of the refinement sequence are not a factor-2 refinement")]
    DegenerateRefinement(usize, usize),
    #[error("grids differ in horizon; all runs must end at the same time")]
    MixedHorizon,
    #[error("not in asymptotic regime, refine further (differences {d1:e}, {d2:e})")]
    NotAsymptotic { d1: f64, d2: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy {
    pub grids: [Grid; 3],
    /// Terminal front position of each run.
    pub values: [f64; 3],
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orders {
    pub temporal: RefinementStudy,
    pub spatial: RefinementStudy,
}

impl Orders {
    pub fn temporal_order(&self) -> f64 {
        self.temporal.order
    }

    pub fn spatial_order(&self) -> f64 {
        self.spatial.order
    }
}

/// Order from three values on a factor-2 refinement sequence.
pub fn observed_order(values: [f64; 3]) -> Result<f64, ConvergenceError> {
    let d1 = values[0] - values[1];
    let d2 = values[1] - values[2];
    let monotone = d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() && d2.abs() < d1.abs();
    if !monotone {
        return Err(ConvergenceError::NotAsymptotic { d1, d2 });
    }
    Ok((d1 / d2).log2())
}

fn is_halving(coarse: &Grid, fine: &Grid) -> bool {
    let dt_halved = fine.dt == coarse.dt / 2.0 && fine.n_cells == coarse.n_cells;
    let h_halved = fine.n_cells == 2 * coarse.n_cells && fine.dt == coarse.dt;
    dt_halved ^ h_halved
}

/// Runs the three grids and reports the observed order of `s(t_end)`.
pub fn estimate_order(
    spec: &ProblemSpec,
    grids: [Grid; 3],
    config: &SolverConfig,
) -> Result<RefinementStudy, ConvergenceError> {
    for i in 0..2 {
        if !is_halving(&grids[i], &grids[i + 1]) {
            return Err(ConvergenceError::DegenerateRefinement(i, i + 1));
        }
    }
    if grids.iter().any(|g| g.t_end != grids[0].t_end) {
        return Err(ConvergenceError::MixedHorizon);
    }

    let fronts = grids
        .par_iter()
        .map(|g| run(spec, g, config).map(|r| r.final_front()))
        .collect::<Result<Vec<_>, _>>()?;
    let values = [fronts[0], fronts[1], fronts[2]];
    Ok(RefinementStudy {
        grids,
        values,
        order: observed_order(values)?,
    })
}

/// Temporal order from `(dt, dt/2, dt/4)` at the base resolution, spatial
/// order from `(N, 2N, 4N)` at the finest of those time steps.
pub fn richardson_orders(
    spec: &ProblemSpec,
    base: &Grid,
    config: &SolverConfig,
) -> Result<Orders, ConvergenceError> {
    base.validate().map_err(SolveError::from)?;
    let t_end = base.t_end;
    let n = base.n_cells;
    let temporal_grids = [
        Grid {
            n_cells: n,
            dt: base.dt,
            t_end,
        },
        Grid {
            n_cells: n,
            dt: base.dt / 2.0,
            t_end,
        },
        Grid {
            n_cells: n,
            dt: base.dt / 4.0,
            t_end,
        },
    ];
    let dt_fine = base.dt / 4.0;
    let spatial_grids = [
        Grid {
            n_cells: n,
            dt: dt_fine,
            t_end,
        },
        Grid {
            n_cells: 2 * n,
            dt: dt_fine,
            t_end,
        },
        Grid {
            n_cells: 4 * n,
            dt: dt_fine,
            t_end,
        },
    ];
    let (temporal, spatial) = rayon::join(
        || estimate_order(spec, temporal_grids, config),
        || estimate_order(spec, spatial_grids, config),
    );
    Ok(Orders {
        temporal: temporal?,
        spatial: spatial?,
    })
}
