use std::fmt;
use std::fs;

use rayon::prelude::*;

use super::{emit_report, fmt17, CliError, RunManifest};
use crate::diagnostics::{
    calibrate_a0, fit_power_law, richardson_orders, stationary_residual, Calibration, Orders,
    PowerLawFit, SolveReport,
};
use crate::solver::run_with_stride;

/// Front growth factor a long run must exceed.
pub const GROWTH_FACTOR: f64 = 3.0;

/// Single forward run; writes the report files.
pub fn run(manifest: &RunManifest) -> Result<SolveReport, CliError> {
    let report = run_with_stride(
        &manifest.spec,
        &manifest.grid,
        &manifest.solver,
        manifest.output_stride,
    )?;
    emit_report(&report, manifest, &manifest.output_dir)?;
    Ok(report)
}

/// Parses `a0=v1,v2,...`.
pub fn parse_sweep_param(arg: &str) -> Result<Vec<f64>, CliError> {
    let (name, list) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--param expects `a0=v1,v2,...`, got `{arg}`")))?;
    if name.trim() != "a0" {
        return Err(CliError::Usage(format!(
            "only a0 can be swept, got `{}`",
            name.trim()
        )));
    }
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| CliError::Usage(format!("bad a0 value `{}`", v.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("empty sweep".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub a0: f64,
    pub dir_name: String,
    pub final_front: f64,
    pub fit: Option<PowerLawFit>,
}

/// Runs one simulation per `a0` value on `threads` workers, each into its
/// own `a0=<value>` subdirectory, and writes `sweep_summary.csv` in
/// parameter order.
pub fn sweep(
    manifest: &RunManifest,
    values: &[f64],
    threads: usize,
) -> Result<Vec<SweepEntry>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let entries = pool.install(|| {
        values
            .par_iter()
            .map(|&a0| -> Result<SweepEntry, CliError> {
                let dir_name = format!("a0={a0}");
                let mut m = manifest.clone();
                m.spec.a0 = a0;
                m.output_dir = manifest.output_dir.join(&dir_name);
                let report = run(&m)?;
                let t_end = report.final_time();
                let fit = fit_power_law(&report, (0.5 * t_end, t_end)).ok();
                Ok(SweepEntry {
                    a0,
                    dir_name,
                    final_front: report.final_front(),
                    fit,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut csv = String::from("a0,s_final,exponent,r_squared\n");
    for e in &entries {
        let (p, r2) = e
            .fit
            .map_or((f64::NAN, f64::NAN), |f| (f.exponent, f.r_squared));
        csv.push_str(&format!(
            "{},{},{},{}\n",
            e.a0,
            fmt17(e.final_front),
            fmt17(p),
            fmt17(r2)
        ));
    }
    fs::create_dir_all(&manifest.output_dir)?;
    fs::write(manifest.output_dir.join("sweep_summary.csv"), csv)?;
    Ok(entries)
}

/// Temporal and spatial convergence orders on the configured grid.
pub fn converge(manifest: &RunManifest) -> Result<Orders, CliError> {
    let orders = richardson_orders(&manifest.spec, &manifest.grid, &manifest.solver)?;
    let mut text = String::new();
    for (label, study) in [("temporal", &orders.temporal), ("spatial", &orders.spatial)] {
        text.push_str(&format!("{label}_order = {}\n", fmt17(study.order)));
        for (g, v) in study.grids.iter().zip(study.values) {
            text.push_str(&format!(
                "# {label}: n_cells = {}, dt = {}, s(T) = {}\n",
                g.n_cells,
                g.dt,
                fmt17(v)
            ));
        }
    }
    fs::create_dir_all(&manifest.output_dir)?;
    fs::write(manifest.output_dir.join("converge.txt"), text)?;
    Ok(orders)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSummary {
    pub growth_ratio: f64,
    pub final_speed: f64,
    pub fit: PowerLawFit,
    pub no_drive: bool,
    pub passed: bool,
}

impl fmt::Display for GrowthSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "s(t_end)/s0 = {:.6}", self.growth_ratio)?;
        writeln!(f, "s_t(t_end) = {:.6e}", self.final_speed)?;
        writeln!(f, "beta_hat = {:.6}", self.fit.exponent)?;
        writeln!(f, "r2 = {:.6}", self.fit.r_squared)?;
        let verdict = match (self.passed, self.no_drive) {
            (true, _) => "PASS",
            (false, true) => "FAIL (no drive)",
            (false, false) => "FAIL",
        };
        write!(f, "{verdict}")
    }
}

/// Long run followed by a tail power-law fit on `[t_end/2, t_end]`.
pub fn growth(manifest: &RunManifest) -> Result<GrowthSummary, CliError> {
    let report = run(manifest)?;
    let t_end = report.final_time();
    let fit = fit_power_law(&report, (0.5 * t_end, t_end))?;
    let s0 = manifest.spec.s0;
    let growth_ratio = report.final_front() / s0;
    let final_speed = *report.front_speeds.last().unwrap();
    let (b_min, b_max) = manifest.spec.b.range();
    let no_drive = b_min == 0.0 && b_max == 0.0;
    let passed = growth_ratio > GROWTH_FACTOR && final_speed > 0.0;
    let summary = GrowthSummary {
        growth_ratio,
        final_speed,
        fit,
        no_drive,
        passed,
    };
    fs::write(
        manifest.output_dir.join("growth.txt"),
        format!("{summary}\n"),
    )?;
    Ok(summary)
}

/// Reads `t,s` rows; a non-numeric first line is treated as a header.
pub fn parse_observed(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line.split_once(',').and_then(|(t, s)| {
            Some((t.trim().parse::<f64>().ok()?, s.trim().parse::<f64>().ok()?))
        });
        match parsed {
            Some(row) => rows.push(row),
            None if idx == 0 => continue,
            None => {
                return Err(CliError::Usage(format!(
                    "observed data line {}: expected `t,s`",
                    idx + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Fits `a0` to observed fronts.
pub fn calibrate(manifest: &RunManifest, observed: &[(f64, f64)]) -> Result<Calibration, CliError> {
    let fit = calibrate_a0(
        &manifest.spec,
        &manifest.grid,
        &manifest.solver,
        observed,
        manifest.calibration_bracket,
    )?;
    let flag = match fit.boundary {
        None => "none".to_string(),
        Some(edge) => format!("{edge:?}").to_lowercase(),
    };
    fs::create_dir_all(&manifest.output_dir)?;
    fs::write(
        manifest.output_dir.join("calibration.txt"),
        format!(
            "a0_hat = {}\nsse = {}\nboundary = {flag}\nevaluations = {}\n",
            fmt17(fit.a0_hat),
            fmt17(fit.sse),
            fit.evaluations
        ),
    )?;
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub lines: Vec<CheckLine>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for CheckSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(
                f,
                "{} {}: {}",
                if l.passed { "PASS" } else { "FAIL" },
                l.name,
                l.detail
            )?;
        }
        Ok(())
    }
}

/// Runs the configured problem and checks the discrete invariants.
pub fn check(manifest: &RunManifest) -> Result<CheckSummary, CliError> {
    let report = run(manifest)?;
    let c = &report.meta.checks;
    let mut lines = vec![
        CheckLine {
            name: "bounds",
            passed: c.bounds_hold(),
            detail: format!(
                "u in [{:e}, {:e}], cap {} (+/- {:e})",
                c.min_u, c.max_u, c.u_cap, c.bounds_tol
            ),
        },
        CheckLine {
            name: "front monotone",
            passed: c.front_monotone(),
            detail: format!("{} regressions", c.front_regressions),
        },
        CheckLine {
            name: "front envelope",
            passed: c.envelope_holds(),
            detail: format!("max excess {:e}", c.max_envelope_excess),
        },
        CheckLine {
            name: "energy finite",
            passed: report.energies.iter().all(|e| e.is_finite()),
            detail: format!("max psi {:e}", report.energies[report.energy_argmax()]),
        },
    ];
    if manifest.spec.b_infinity.is_some() {
        let r = stationary_residual(&manifest.spec).expect("b_infinity is set");
        lines.push(CheckLine {
            name: "stationary non-existence",
            passed: r.certifies_nonexistence(),
            detail: format!(
                "residual {}{}",
                r.value,
                if r.outside_assumptions {
                    " (outside assumptions)"
                } else {
                    ""
                }
            ),
        });
    }
    let summary = CheckSummary { lines };
    fs::write(manifest.output_dir.join("check.txt"), summary.to_string())?;
    Ok(summary)
}
