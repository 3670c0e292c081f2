//! Problem definition: parameters, input functions, the positive-part
//! cut-off and the convex energy functional used as a run diagnostic.

use std::fmt;

use thiserror::Error;

use crate::grid::TransformedState;

/// Positive-part cut-off used in the kinetic front law.
#[inline]
pub fn sigma(r: f64) -> f64 {
    if r >= 0.0 {
        r
    } else {
        0.0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("table must contain at least one knot")]
    EmptyTable,
    #[error("table abscissae must be strictly increasing (knot {index})")]
    NotIncreasing { index: usize },
    #[error("table entry {index} is not finite")]
    NonFinite { index: usize },
}

/// Piecewise-linear interpolation table with clamping outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<(f64, f64)>,
}

impl Table {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if knots.is_empty() {
            return Err(ModelError::EmptyTable);
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(ModelError::NonFinite { index: i });
            }
            if i > 0 && x <= knots[i - 1].0 {
                return Err(ModelError::NotIncreasing { index: i });
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let (x0, y0) = k[0];
        let (xn, yn) = k[k.len() - 1];
        if x <= x0 {
            return y0;
        }
        if x >= xn {
            return yn;
        }
        // first knot strictly right of x
        let j = k.partition_point(|&(xi, _)| xi <= x);
        let (xa, ya) = k[j - 1];
        let (xb, yb) = k[j];
        let w = (x - xa) / (xb - xa);
        ya + w * (yb - ya)
    }

    fn min_value(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min)
    }

    fn max_value(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Threshold function `b(t)` driving the Robin condition at the fixed end.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryDriver {
    Constant(f64),
    Table(Table),
}

impl BoundaryDriver {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BoundaryDriver::Constant(c) => *c,
            BoundaryDriver::Table(table) => table.eval(t),
        }
    }

    /// Smallest and largest value the driver can take.
    pub fn range(&self) -> (f64, f64) {
        match self {
            BoundaryDriver::Constant(c) => (*c, *c),
            BoundaryDriver::Table(table) => (table.min_value(), table.max_value()),
        }
    }
}

/// Initial concentration profile on `[0, s0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Constant(f64),
    Table(Table),
}

impl InitialProfile {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            InitialProfile::Constant(c) => *c,
            InitialProfile::Table(table) => table.eval(z),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match self {
            InitialProfile::Constant(c) => (*c, *c),
            InitialProfile::Table(table) => (table.min_value(), table.max_value()),
        }
    }
}

/// Model parameters and input data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Kinetic rate coefficient of the front law.
    pub a0: f64,
    /// Robin transfer coefficient at the fixed end.
    pub beta: f64,
    /// Partition coefficient.
    pub gamma: f64,
    /// Initial front position.
    pub s0: f64,
    pub b: BoundaryDriver,
    pub u0: InitialProfile,
    pub b_lower: f64,
    pub b_upper: f64,
    /// Large-time limit of `b`, when known.
    pub b_infinity: Option<f64>,
}

/// The modelling assumption a [`Violation`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// Positivity of the constants.
    A1,
    /// Bounds on the driver.
    A2,
    /// Initial data.
    A3,
    /// Large-time limit of the driver.
    A2Prime,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::A1 => "(A1)",
            Assumption::A2 => "(A2)",
            Assumption::A3 => "(A3)",
            Assumption::A2Prime => "(A2)'",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub assumption: Assumption,
    pub message: String,
    /// Zero drive (`b_lower = 0` or `b_infinity = 0`): well posed, but outside
    /// the assumptions that guarantee front growth.
    pub degenerate: bool,
}

impl Violation {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.assumption, self.message)
    }
}

impl ProblemSpec {
    /// Upper bound `b*/gamma` of the concentration.
    pub fn u_max(&self) -> f64 {
        self.b_upper / self.gamma
    }

    /// Linear envelope `s0 + a0 (b*/gamma) t` of the front.
    pub fn front_envelope(&self, t: f64) -> f64 {
        self.s0 + self.a0 * self.u_max() * t
    }

    pub fn eval_b(&self, t: f64) -> f64 {
        self.b.eval(t)
    }

    /// Lists every broken assumption. An empty list means the spec is admissible.
    pub fn admissibility_check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let fatal = |assumption, message: String| Violation {
            assumption,
            message,
            degenerate: false,
        };
        let degenerate = |assumption, message: &str| Violation {
            assumption,
            message: message.to_string(),
            degenerate: true,
        };

        for (name, value) in [("a0", self.a0), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(value > 0.0 && value.is_finite()) {
                out.push(fatal(
                    Assumption::A1,
                    format!("{name} must be positive and finite, got {value}"),
                ));
            }
        }

        if self.b_lower == 0.0 {
            out.push(degenerate(
                Assumption::A2,
                "b_lower must be positive, got 0 (no drive)",
            ));
        } else if !(self.b_lower > 0.0 && self.b_lower.is_finite()) {
            out.push(fatal(
                Assumption::A2,
                format!("b_lower must be positive, got {}", self.b_lower),
            ));
        }
        if !(self.b_upper >= self.b_lower && self.b_upper.is_finite()) {
            out.push(fatal(
                Assumption::A2,
                format!(
                    "b_upper = {} must be >= b_lower = {}",
                    self.b_upper, self.b_lower
                ),
            ));
        }
        let (b_min, b_max) = self.b.range();
        if b_min < self.b_lower || b_max > self.b_upper {
            out.push(fatal(
                Assumption::A2,
                format!(
                    "b takes values in [{b_min}, {b_max}], outside [{}, {}]",
                    self.b_lower, self.b_upper
                ),
            ));
        }

        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            out.push(fatal(
                Assumption::A3,
                format!("s0 must be positive, got {}", self.s0),
            ));
        }
        if let InitialProfile::Table(table) = &self.u0 {
            let first = table.knots()[0].0;
            let last = table.knots()[table.knots().len() - 1].0;
            if first < 0.0 || last > self.s0 {
                out.push(fatal(
                    Assumption::A3,
                    format!(
                        "u0 knots span [{first}, {last}], outside [0, s0 = {}]",
                        self.s0
                    ),
                ));
            }
        }
        let (u_min, u_max) = self.u0.range();
        let cap = self.b_upper / self.gamma;
        if u_min < 0.0 || !(u_max <= cap) {
            out.push(fatal(
                Assumption::A3,
                format!(
                    "u0 takes values in [{u_min}, {u_max}], outside [0, b_upper/gamma = {cap}]"
                ),
            ));
        }

        if let Some(b_inf) = self.b_infinity {
            if b_inf == 0.0 && self.b_lower == 0.0 {
                out.push(degenerate(Assumption::A2Prime, "b_infinity = 0 (no drive)"));
            } else if !(b_inf > 0.0 && b_inf >= self.b_lower && b_inf <= self.b_upper) {
                out.push(fatal(
                    Assumption::A2Prime,
                    format!(
                        "b_infinity = {b_inf} outside [{}, {}]",
                        self.b_lower, self.b_upper
                    ),
                ));
            }
        }

        out
    }
}

/// Energy functional of the transformed problem at time `t`.
///
/// Returns `f64::INFINITY` when some nodal value is negative, i.e. the state
/// lies outside the effective domain of the functional. The gradient term is
/// integrated cell by cell (exact for the piecewise-linear interpolant); the
/// two boundary integrals are evaluated in closed form.
pub fn psi_energy(state: &TransformedState, spec: &ProblemSpec, t: f64) -> f64 {
    let u = &state.u_tilde;
    if u.iter().any(|&v| v < 0.0) {
        return f64::INFINITY;
    }
    let s = state.s;
    let n = u.len() - 1;
    let h = 1.0 / n as f64;
    let grad_sq: f64 = u.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum();

    let c1 = u[n];
    let c0 = u[0];
    let b = spec.eval_b(t);
    // int_0^c a0 xi sigma(xi) dxi for c >= 0
    let front = spec.a0 * c1 * c1 * c1 / 3.0;
    // -int_0^c beta (b - gamma xi) dxi
    let robin = -spec.beta * b * c0 + 0.5 * spec.beta * spec.gamma * c0 * c0;

    grad_sq / (2.0 * s * s) + (front + robin) / s
}
