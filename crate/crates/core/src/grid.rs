//! Uniform grid on the fixed domain `[0, 1]` and the Landau change of
//! variables `y = z / s(t)` between the moving and the fixed domain.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("horizon t_end = {t_end} must be at least dt = {dt}")]
    BadHorizon { t_end: f64, dt: f64 },
    #[error("front position must be positive, got {0}")]
    NonPositiveFront(f64),
    #[error("field has {z} positions but {u} values")]
    LengthMismatch { z: usize, u: usize },
    #[error("field needs at least two nodes")]
    TooFewNodes,
}

/// Space-time discretization of the fixed domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Grid {
    pub fn new(n_cells: usize, dt: f64, t_end: f64) -> Result<Self, GridError> {
        let grid = Self { n_cells, dt, t_end };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.n_cells < 4 {
            return Err(GridError::TooFewCells(self.n_cells));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(GridError::BadTimeStep(self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(GridError::BadHorizon {
                t_end: self.t_end,
                dt: self.dt,
            });
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        node(i, self.n_cells)
    }

    /// Number of time steps needed to reach `t_end`; the last one may be
    /// shortened so that the run ends exactly at `t_end`.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Time level after `n` steps.
    pub fn time_at(&self, n: usize) -> f64 {
        if n >= self.n_steps() {
            self.t_end
        } else {
            n as f64 * self.dt
        }
    }
}

#[inline]
fn node(i: usize, n_cells: usize) -> f64 {
    i as f64 / n_cells as f64
}

/// Front position and fixed-domain field at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedState {
    pub t: f64,
    pub s: f64,
    pub u_tilde: Vec<f64>,
}

impl TransformedState {
    pub fn n_cells(&self) -> usize {
        self.u_tilde.len() - 1
    }

    /// Value at the fixed end `y = 0`.
    pub fn u_left(&self) -> f64 {
        self.u_tilde[0]
    }

    /// Value at the front `y = 1`.
    pub fn u_front(&self) -> f64 {
        self.u_tilde[self.u_tilde.len() - 1]
    }
}

/// Concentration on the moving domain `[0, s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub s: f64,
    pub z_nodes: Vec<f64>,
    pub u: Vec<f64>,
}

/// Pulls a physical field back onto `n_cells + 1` uniform nodes of `[0, 1]`.
///
/// If the field is already sampled at `z_i = y_i s` the values are copied;
/// otherwise they are interpolated linearly in `z` (clamped at the ends).
pub fn landau_forward(field: &PhysicalField, n_cells: usize) -> Result<Vec<f64>, GridError> {
    let s = field.s;
    if !(s > 0.0) {
        return Err(GridError::NonPositiveFront(s));
    }
    if field.z_nodes.len() != field.u.len() {
        return Err(GridError::LengthMismatch {
            z: field.z_nodes.len(),
            u: field.u.len(),
        });
    }
    if field.u.len() < 2 {
        return Err(GridError::TooFewNodes);
    }

    let aligned = field.z_nodes.len() == n_cells + 1
        && field
            .z_nodes
            .iter()
            .enumerate()
            .all(|(i, &z)| z == node(i, n_cells) * s);
    if aligned {
        return Ok(field.u.clone());
    }

    let z = &field.z_nodes;
    let u = &field.u;
    let out = (0..=n_cells)
        .map(|i| {
            let zi = node(i, n_cells) * s;
            if zi <= z[0] {
                return u[0];
            }
            if zi >= z[z.len() - 1] {
                return u[u.len() - 1];
            }
            let j = z.partition_point(|&zk| zk <= zi);
            let w = (zi - z[j - 1]) / (z[j] - z[j - 1]);
            u[j - 1] + w * (u[j] - u[j - 1])
        })
        .collect();
    Ok(out)
}

/// Pushes a fixed-domain state forward onto the physical nodes `z_i = y_i s`.
pub fn landau_inverse(state: &TransformedState) -> Result<PhysicalField, GridError> {
    let s = state.s;
    if !(s > 0.0) {
        return Err(GridError::NonPositiveFront(s));
    }
    let n = state.n_cells();
    Ok(PhysicalField {
        s,
        z_nodes: (0..=n).map(|i| node(i, n) * s).collect(),
        u: state.u_tilde.clone(),
    })
}

/// Trapezoidal approximation of `int_0^s u dz`.
pub fn trapezoid_mass(field: &PhysicalField) -> f64 {
    field
        .z_nodes
        .windows(2)
        .zip(field.u.windows(2))
        .map(|(z, u)| 0.5 * (z[1] - z[0]) * (u[0] + u[1]))
        .sum()
}

/// Trapezoidal mass computed directly from the transformed state.
pub fn state_mass(state: &TransformedState) -> f64 {
    let u = &state.u_tilde;
    let n = u.len() - 1;
    let interior: f64 = u[1..n].iter().sum();
    state.s * (interior + 0.5 * (u[0] + u[n])) / n as f64
}
