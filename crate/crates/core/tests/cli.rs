use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kinetic_front::cli::{self, exit, parse_config, CSV_HEADER};

const BASE: &str = "\
a0 = 1
beta = 1
gamma = 1
s0 = 1
b_lower = 1
b_upper = 1
b.kind = constant
b.value = 1
b_infinity = 1
u0.kind = table
u0.table = 0:0.75, 1:0.5
";

fn config(extra: &str) -> String {
    format!("{BASE}{extra}")
}

fn binary(args: &[&str], cfg: &str, dir: &Path) -> Output {
    let path = dir.join("input.cfg");
    fs::write(&path, cfg).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kinetic-front"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn row_count_follows_stride() {
    let dir = tempfile::tempdir().unwrap();
    for (dt, t_end, stride) in [
        (0.003, 2.0, 7usize),
        (0.01, 1.0, 1),
        (0.01, 1.0, 100),
        (0.01, 1.0, 1000),
    ] {
        let mut m = parse_config(&config(&format!(
            "grid.n_cells = 16\ngrid.dt = {dt}\ngrid.t_end = {t_end}\noutput.stride = {stride}\n"
        )))
        .unwrap();
        m.output_dir = dir.path().join(format!("{dt}-{stride}"));
        let report = cli::run(&m).unwrap();
        let steps = m.grid.n_steps();
        let rows = csv_rows(&m.output_dir.join("timeseries.csv"));
        assert_eq!(rows.len(), 1 + steps / stride, "dt {dt}, stride {stride}");
        assert_eq!(report.len(), rows.len());
        assert!(rows.iter().all(|r| r.len() == 8));
    }
}

#[test]
fn csv_values_round_trip_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = parse_config(&config(
        "grid.n_cells = 16\ngrid.dt = 0.01\ngrid.t_end = 0.5\n",
    ))
    .unwrap();
    m.output_dir = dir.path().to_path_buf();
    let report = cli::run(&m).unwrap();
    let rows = csv_rows(&dir.path().join("timeseries.csv"));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], report.times[i]);
        assert_eq!(r[1], report.fronts[i]);
        assert_eq!(r[7], report.energies[i]);
    }
}

#[test]
fn trivial_run_has_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = "a0 = 1\nbeta = 1\ngamma = 1\ns0 = 2\nb_lower = 0\nb_upper = 0\n\
                b.kind = constant\nb.value = 0\nu0.kind = constant\nu0.value = 0\n\
                grid.n_cells = 8\ngrid.dt = 0.1\ngrid.t_end = 3\n";
    let mut m = parse_config(text).unwrap();
    assert_eq!(m.warnings.len(), 1);
    m.output_dir = dir.path().to_path_buf();
    cli::run(&m).unwrap();
    for r in csv_rows(&dir.path().join("timeseries.csv")) {
        assert_eq!((r[3], r[4], r[5]), (0.0, 0.0, 0.0));
        assert_eq!(r[1], 2.0);
        assert_eq!(r[2], 0.0);
    }
}

#[test]
fn meta_echoes_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = parse_config(&config(
        "grid.n_cells = 12\ngrid.dt = 0.02\ngrid.t_end = 1\nsolver.advection = upwind\n\
         solver.picard.enabled = true\nsolver.picard.tol = 1e-9\noutput.stride = 5\noutput.plot = true\n",
    ))
    .unwrap();
    m.output_dir = dir.path().to_path_buf();
    cli::run(&m).unwrap();
    let meta = fs::read_to_string(dir.path().join("meta.txt")).unwrap();
    let mut echoed = parse_config(&meta).unwrap();
    echoed.output_dir = m.output_dir.clone();
    assert_eq!(echoed, m);
    assert!(meta.contains("# bounds"));
    assert!(meta.contains("PASS"));
    let svg = fs::read_to_string(dir.path().join("front.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn no_plot_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = parse_config(&config("grid.n_cells = 8\ngrid.dt = 0.1\ngrid.t_end = 1\n")).unwrap();
    m.output_dir = dir.path().to_path_buf();
    cli::run(&m).unwrap();
    assert!(!dir.path().join("front.svg").exists());
}

#[test]
fn identical_manifests_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let text = config(
        "grid.n_cells = 24\ngrid.dt = 0.004\ngrid.t_end = 1.5\nsolver.picard.enabled = true\n",
    );
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let mut m = parse_config(&text).unwrap();
        m.output_dir = dir.path().join(name);
        cli::run(&m).unwrap();
        bytes.push(fs::read(m.output_dir.join("timeseries.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sweep_naming_and_worker_independence() {
    let dir = tempfile::tempdir().unwrap();
    let values = cli::parse_sweep_param("a0=0.5,1,2").unwrap();
    assert_eq!(values, vec![0.5, 1.0, 2.0]);
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let mut m = parse_config(&config(
            "grid.n_cells = 16\ngrid.dt = 0.01\ngrid.t_end = 2\n",
        ))
        .unwrap();
        m.output_dir = dir.path().join(format!("threads{threads}"));
        let entries = cli::sweep(&m, &values, threads).unwrap();
        let names: Vec<_> = entries.iter().map(|e| e.dir_name.as_str()).collect();
        assert_eq!(names, ["a0=0.5", "a0=1", "a0=2"]);
        let mut files = vec![fs::read(m.output_dir.join("sweep_summary.csv")).unwrap()];
        for name in names {
            files.push(fs::read(m.output_dir.join(name).join("timeseries.csv")).unwrap());
        }
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn sweep_param_errors() {
    assert!(cli::parse_sweep_param("beta=1,2").is_err());
    assert!(cli::parse_sweep_param("a0=1,x").is_err());
    assert!(cli::parse_sweep_param("a0=-1").is_err());
    assert!(cli::parse_sweep_param("a0").is_err());
}

#[test]
fn growth_without_drive_fails_with_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = "a0 = 1\nbeta = 1\ngamma = 1\ns0 = 1\nb_lower = 0\nb_upper = 0\n\
                b.kind = constant\nb.value = 0\nu0.kind = constant\nu0.value = 0\n\
                grid.n_cells = 8\ngrid.dt = 1\ngrid.t_end = 100\n";
    let out = binary(&["growth"], text, dir.path());
    assert_eq!(out.status.code(), Some(exit::CHECK_FAILED));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL (no drive)"), "{stdout}");
}

#[test]
fn growth_passes_on_driven_long_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = config("grid.n_cells = 32\ngrid.dt = 0.5\ngrid.t_end = 500\n");
    let out = binary(&["growth"], &text, dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{stdout}");
    assert!(stdout.contains("PASS"));
    assert!(dir.path().join("out/growth.txt").exists());
}

#[test]
fn doubling_the_horizon_increases_the_front() {
    let dir = tempfile::tempdir().unwrap();
    let mut fronts = Vec::new();
    for t_end in [200, 400] {
        let mut m = parse_config(&config(&format!(
            "grid.n_cells = 32\ngrid.dt = 0.5\ngrid.t_end = {t_end}\n"
        )))
        .unwrap();
        m.output_dir = dir.path().join(t_end.to_string());
        fronts.push(cli::growth(&m).unwrap().growth_ratio);
    }
    assert!(fronts[1] > fronts[0], "{fronts:?}");
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = config("grid.n_cells = 8\ngrid.dt = 0.1\ngrid.t_end = 1\n")
        .replace("gamma = 1", "gamma = -1");
    let out = binary(&["run"], &text, dir.path());
    assert_eq!(out.status.code(), Some(exit::INVALID_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(A1)"));
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        config("grid.n_cells = 64\ngrid.dt = 1\ngrid.t_end = 2\n").replace("a0 = 1", "a0 = 10000");
    let out = binary(&["run"], &text, dir.path());
    assert_eq!(out.status.code(), Some(exit::SOLVER_FAILURE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reduce dt"));
}

#[test]
fn check_command_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        config("grid.n_cells = 16\ngrid.dt = 0.01\ngrid.t_end = 1\nsolver.advection = upwind\n");
    let out = binary(&["check"], &text, dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{stdout}");
    for name in [
        "bounds",
        "front monotone",
        "front envelope",
        "stationary non-existence",
    ] {
        assert!(stdout.contains(&format!("PASS {name}")), "{stdout}");
    }
}

#[test]
fn converge_command_prints_orders() {
    let dir = tempfile::tempdir().unwrap();
    let text = config("grid.n_cells = 8\ngrid.dt = 0.02\ngrid.t_end = 1\n");
    let out = binary(&["converge"], &text, dir.path());
    assert_eq!(out.status.code(), Some(exit::SUCCESS));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("temporal_order") && stdout.contains("spatial_order"));
}

#[test]
fn calibrate_command_recovers_generator() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "grid.n_cells = 16\ngrid.dt = 0.02\ngrid.t_end = 4\n";
    let mut m = parse_config(&config(grid).replace("a0 = 1", "a0 = 0.4")).unwrap();
    m.output_dir = dir.path().join("truth");
    let truth = cli::run(&m).unwrap();
    let mut observed = String::from("t,s\n");
    for k in 1..=8 {
        let t = 0.5 * k as f64;
        observed.push_str(&format!("{t},{}\n", truth.front_at(t)));
    }
    let obs_path = dir.path().join("observed.csv");
    fs::write(&obs_path, observed).unwrap();

    let text = config(&format!(
        "{grid}calibrate.a0_lo = 0.05\ncalibrate.a0_hi = 5\n"
    ));
    let out = binary(
        &["calibrate", "--observed", obs_path.to_str().unwrap()],
        &text,
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{stdout}");
    let a0_hat: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("a0_hat = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((a0_hat / 0.4 - 1.0).abs() < 0.01, "{a0_hat}");
}

#[test]
fn observed_csv_parsing() {
    assert_eq!(
        cli::parse_observed("t,s\n1,2\n\n3, 4\n").unwrap(),
        vec![(1.0, 2.0), (3.0, 4.0)]
    );
    assert_eq!(cli::parse_observed("1,2\n").unwrap(), vec![(1.0, 2.0)]);
    assert!(cli::parse_observed("t,s\n1;2\n").is_err());
}
