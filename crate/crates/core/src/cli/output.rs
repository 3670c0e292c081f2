//! Files written for each run: `timeseries.csv`, `meta.txt` and an optional
//! `front.svg`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::RunManifest;
use crate::diagnostics::SolveReport;
use crate::model::{BoundaryDriver, InitialProfile};
use crate::solver::{AdvectionScheme, Picard};

pub const CSV_HEADER: &str = "t,s,s_t,u0,uS,mass,mass_residual,psi";

/// Formats a value with 17 significant digits, enough to round-trip an f64.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn write_timeseries<W: Write>(report: &SolveReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..report.len() {
        let cols = [
            report.times[i],
            report.fronts[i],
            report.front_speeds[i],
            report.u_at_0[i],
            report.u_at_1[i],
            report.masses[i],
            report.mass_residuals[i],
            report.energies[i],
        ];
        let line = cols.iter().map(|&v| fmt17(v)).collect::<Vec<_>>().join(",");
        writeln!(out, "{line}")?;
    }
    out.flush()
}

fn table_text(knots: &[(f64, f64)]) -> String {
    knots
        .iter()
        .map(|(x, y)| format!("{x}:{y}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders the manifest back into config syntax, followed by the invariant
/// summary of the run.
pub fn meta_text(report: &SolveReport, manifest: &RunManifest) -> String {
    let spec = &report.meta.spec;
    let grid = &report.meta.grid;
    let cfg = &report.meta.config;
    let mut s = String::new();
    let _ = writeln!(s, "# command: {}", manifest.command.name());
    let _ = writeln!(s, "a0 = {}", spec.a0);
    let _ = writeln!(s, "beta = {}", spec.beta);
    let _ = writeln!(s, "gamma = {}", spec.gamma);
    let _ = writeln!(s, "s0 = {}", spec.s0);
    let _ = writeln!(s, "b_lower = {}", spec.b_lower);
    let _ = writeln!(s, "b_upper = {}", spec.b_upper);
    match &spec.b {
        BoundaryDriver::Constant(c) => {
            let _ = writeln!(s, "b.kind = constant\nb.value = {c}");
        }
        BoundaryDriver::Table(t) => {
            let _ = writeln!(s, "b.kind = table\nb.table = {}", table_text(t.knots()));
        }
    }
    match &spec.u0 {
        InitialProfile::Constant(c) => {
            let _ = writeln!(s, "u0.kind = constant\nu0.value = {c}");
        }
        InitialProfile::Table(t) => {
            let _ = writeln!(s, "u0.kind = table\nu0.table = {}", table_text(t.knots()));
        }
    }
    if let Some(b_inf) = spec.b_infinity {
        let _ = writeln!(s, "b_infinity = {b_inf}");
    }
    let _ = writeln!(s, "grid.n_cells = {}", grid.n_cells);
    let _ = writeln!(s, "grid.dt = {}", grid.dt);
    let _ = writeln!(s, "grid.t_end = {}", grid.t_end);
    let adv = match cfg.advection {
        AdvectionScheme::Central => "central",
        AdvectionScheme::Upwind => "upwind",
    };
    let _ = writeln!(s, "solver.advection = {adv}");
    match cfg.picard {
        Picard::Off => {
            let _ = writeln!(s, "solver.picard.enabled = false");
        }
        Picard::On { max_iters, tol } => {
            let _ = writeln!(
                s,
                "solver.picard.enabled = true\nsolver.picard.max_iters = {max_iters}\nsolver.picard.tol = {tol}"
            );
        }
    }
    let _ = writeln!(s, "solver.bounds_tol = {}", cfg.bounds_tol);
    let _ = writeln!(s, "output.stride = {}", report.meta.stride);
    let _ = writeln!(s, "output.plot = {}", manifest.plot);

    let c = &report.meta.checks;
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "\n# invariant checks over {} steps", report.meta.n_steps);
    for w in &manifest.warnings {
        let _ = writeln!(s, "# warning: {w}");
    }
    let _ = writeln!(
        s,
        "# bounds [-{tol:e}, {cap} + {tol:e}]: {} (min {}, max {}, steps out of bounds {})",
        verdict(c.bounds_hold()),
        fmt17(c.min_u),
        fmt17(c.max_u),
        c.out_of_bounds_steps,
        tol = c.bounds_tol,
        cap = c.u_cap,
    );
    let _ = writeln!(
        s,
        "# front monotone: {} ({} regressions)",
        verdict(c.front_monotone()),
        c.front_regressions
    );
    let _ = writeln!(
        s,
        "# front envelope: {} (max excess {})",
        verdict(c.envelope_holds()),
        fmt17(c.max_envelope_excess)
    );
    if let Picard::On { .. } = cfg.picard {
        let p = &report.meta.picard;
        let _ = writeln!(
            s,
            "# picard: {} iterations over {} steps, max per step {}, max ratio {}",
            p.total_iters,
            p.steps,
            p.max_iters_in_step,
            fmt17(p.max_ratio)
        );
    }
    let _ = writeln!(s, "# final front: {}", fmt17(report.final_front()));
    s
}

/// Single-series SVG line chart of the front position against time.
pub fn front_svg(report: &SolveReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let t_max = report.final_time().max(f64::MIN_POSITIVE);
    let s_min = report.fronts[0];
    let s_max = report.final_front();
    let span = if s_max > s_min { s_max - s_min } else { 1.0 };
    let px = |t: f64| PAD + (W - 2.0 * PAD) * t / t_max;
    let py = |s: f64| H - PAD - (H - 2.0 * PAD) * (s - s_min) / span;

    let points = report
        .times
        .iter()
        .zip(&report.fronts)
        .map(|(&t, &s)| format!("{:.2},{:.2}", px(t), py(s)))
        .collect::<Vec<_>>()
        .join(" ");

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD},{PAD} L{PAD},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#,
        y0 = H - PAD,
        x1 = W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<polyline points="{points}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle">s</text>"#,
        H / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-size="11">0</text>"#,
        H - PAD + 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{t_max}</text>"#,
        W - PAD,
        H - PAD + 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{s_min:.4}</text>"#,
        PAD - 4.0,
        H - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{PAD}" font-size="11" text-anchor="end">{s_max:.4}</text>"#,
        PAD - 4.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Writes the report files into `dir` (created if needed) and returns their paths.
pub fn emit_report(
    report: &SolveReport,
    manifest: &RunManifest,
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let csv = dir.join("timeseries.csv");
    write_timeseries(report, BufWriter::new(fs::File::create(&csv)?))?;
    written.push(csv);

    let meta = dir.join("meta.txt");
    fs::write(&meta, meta_text(report, manifest))?;
    written.push(meta);

    if manifest.plot {
        let svg = dir.join("front.svg");
        fs::write(&svg, front_svg(report))?;
        written.push(svg);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }
}
