//! Residual of the would-be steady state with limiting drive `b_infinity`.
//!
//! With `s_t = 0` the transformed problem reduces to `-u_yy = 0`, zero flux
//! at `y = 1` and the Robin condition at `y = 0`. Its only solution is the
//! constant `b_infinity / gamma`, which violates the remaining requirement
//! `u(1) = 0` by exactly that amount, whatever the candidate front.

use thiserror::Error;

use crate::model::ProblemSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StationaryError {
    #[error("spec has no b_infinity")]
    MissingLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResidual {
    /// Violation of `u(1) = 0` by the steady solution.
    pub value: f64,
    /// The constant solving the remaining boundary value problem.
    pub constant_solution: f64,
    /// True when `b_infinity` lies outside the large-time assumptions.
    pub outside_assumptions: bool,
}

impl StationaryResidual {
    /// A positive residual rules out a bounded steady state.
    pub fn certifies_nonexistence(&self) -> bool {
        self.value > 0.0 && !self.outside_assumptions
    }
}

pub fn stationary_residual(spec: &ProblemSpec) -> Result<StationaryResidual, StationaryError> {
    let b_inf = spec.b_infinity.ok_or(StationaryError::MissingLimit)?;
    let c = b_inf / spec.gamma;
    let outside = !(b_inf > 0.0 && b_inf >= spec.b_lower && b_inf <= spec.b_upper);
    Ok(StationaryResidual {
        value: c,
        constant_solution: c,
        outside_assumptions: outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundaryDriver, InitialProfile};

    fn spec(b_inf: Option<f64>, gamma: f64, b_lower: f64) -> ProblemSpec {
        ProblemSpec {
            a0: 1.0,
            beta: 1.0,
            gamma,
            s0: 1.0,
            b: BoundaryDriver::Constant(b_lower),
            u0: InitialProfile::Constant(0.0),
            b_lower,
            b_upper: 2.0,
            b_infinity: b_inf,
        }
    }

    /// Second-order finite-difference solve of the reduced two-point problem,
    /// used as an independent check of the closed form.
    fn discrete_steady(b_inf: f64, gamma: f64, beta: f64, s: f64, n: usize) -> Vec<f64> {
        // -u'' = 0, u'(1) = 0, -(1/s) u'(0) = beta (b_inf - gamma u(0)); dense Gauss elimination
        let m = n + 1;
        let h = 1.0 / n as f64;
        let mut a = vec![vec![0.0; m + 1]; m];
        a[0][0] = 1.0 + h * s * beta * gamma;
        a[0][1] = -1.0;
        a[0][m] = h * s * beta * b_inf;
        for i in 1..n {
            a[i][i - 1] = -1.0;
            a[i][i] = 2.0;
            a[i][i + 1] = -1.0;
        }
        a[n][n - 1] = -1.0;
        a[n][n] = 1.0;
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in 0..m {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..=m {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        (0..m).map(|i| a[i][m] / a[i][i]).collect()
    }

    #[test]
    fn closed_form_examples() {
        let r = stationary_residual(&spec(Some(1.0), 2.0, 0.5)).unwrap();
        assert_eq!(r.value, 0.5);
        assert!(r.certifies_nonexistence());

        let r = stationary_residual(&spec(Some(0.5), 1.0, 0.5)).unwrap();
        assert!(r.value >= 0.5);

        let r = stationary_residual(&spec(Some(0.0), 1.0, 0.0)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.outside_assumptions);
        assert!(!r.certifies_nonexistence());

        assert_eq!(
            stationary_residual(&spec(None, 1.0, 0.5)),
            Err(StationaryError::MissingLimit)
        );
    }

    #[test]
    fn discrete_bvp_agrees_with_closed_form() {
        for &(b_inf, gamma, beta, s) in &[
            (1.0, 2.0, 1.0, 1.0),
            (0.3, 0.7, 5.0, 12.0),
            (2.0, 1.0, 0.1, 0.2),
        ] {
            let u = discrete_steady(b_inf, gamma, beta, s, 16);
            for v in &u {
                assert!((v - b_inf / gamma).abs() < 1e-12, "{v}");
            }
        }
    }
}
