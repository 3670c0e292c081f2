//! Power-law fit `s(t) ~ c t^p` by least squares on log-log axes.

use thiserror::Error;

use super::SolveReport;

/// Minimum number of samples a fitting window must contain.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("invalid window [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },
    #[error("window holds {found} samples, need at least {MIN_SAMPLES}")]
    TooFewSamples { found: usize },
    #[error("non-positive sample (t = {t}, value = {value}) in window")]
    NonPositive { t: f64, value: f64 },
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
}

/// Which series is regressed against time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitTarget {
    /// The front position itself.
    #[default]
    Front,
    /// Front advance `s(t) - s0`.
    FrontMinusInitial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits the front series of `report` over `window`.
pub fn fit_power_law(report: &SolveReport, window: (f64, f64)) -> Result<PowerLawFit, FitError> {
    fit_power_law_with(report, window, FitTarget::Front)
}

pub fn fit_power_law_with(
    report: &SolveReport,
    window: (f64, f64),
    target: FitTarget,
) -> Result<PowerLawFit, FitError> {
    match target {
        FitTarget::Front => fit_power_law_series(&report.times, &report.fronts, window),
        FitTarget::FrontMinusInitial => {
            let s0 = report.fronts[0];
            let advance: Vec<f64> = report.fronts.iter().map(|s| s - s0).collect();
            fit_power_law_series(&report.times, &advance, window)
        }
    }
}

/// Ordinary least squares of `ln value` against `ln t` for samples with
/// `t` inside the closed window.
pub fn fit_power_law_series(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<PowerLawFit, FitError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(FitError::BadWindow { lo, hi });
    }
    if times.len() != values.len() {
        return Err(FitError::LengthMismatch {
            times: times.len(),
            values: values.len(),
        });
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi {
            continue;
        }
        if !(t > 0.0 && v > 0.0) {
            return Err(FitError::NonPositive { t, value: v });
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < MIN_SAMPLES {
        return Err(FitError::TooFewSamples { found: n });
    }

    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // a flat series is fitted exactly by a zero exponent
    let y_lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let r_squared = if y_hi - y_lo <= 4.0 * f64::EPSILON * y_hi.abs().max(y_lo.abs()) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };

    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        window,
        samples: n,
    })
}
