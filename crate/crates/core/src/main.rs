use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinetic_front::cli::{self, exit, CliError, Command, RunManifest};

#[derive(Parser)]
#[command(
    name = "kinetic-front",
    version,
    about = "Free boundary solver with a kinetic front condition"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Configuration file (key = value).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Sub {
    /// Single forward run.
    Run(Common),
    /// One run per value of a swept parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Values to sweep, e.g. `a0=0.5,1,2`.
        #[arg(long)]
        param: String,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Temporal and spatial convergence orders.
    Converge(Common),
    /// Long run with tail power-law fit and growth verdict.
    Growth(Common),
    /// Fit a0 to observed front positions.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// CSV file with `t,s` rows.
        #[arg(long)]
        observed: PathBuf,
    },
    /// Run and check the discrete invariants.
    Check(Common),
}

fn load(common: &Common, command: Command) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut manifest = cli::parse_config(&text)?;
    manifest.command = command;
    manifest.output_dir = common.out.clone();
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(manifest)
}

fn dispatch(sub: Sub) -> Result<i32, CliError> {
    match sub {
        Sub::Run(common) => {
            let m = load(&common, Command::Run)?;
            let report = cli::run(&m)?;
            println!(
                "t_end = {}  s = {}  steps = {}  wrote {}",
                report.final_time(),
                cli::fmt17(report.final_front()),
                report.meta.n_steps,
                m.output_dir.display()
            );
            Ok(exit::SUCCESS)
        }
        Sub::Sweep {
            common,
            param,
            threads,
        } => {
            let m = load(&common, Command::Sweep)?;
            let values = cli::parse_sweep_param(&param)?;
            let threads = threads.unwrap_or_else(rayon::current_num_threads);
            for e in cli::sweep(&m, &values, threads)? {
                let p = e.fit.map_or(f64::NAN, |f| f.exponent);
                println!(
                    "{}  s_final = {}  beta_hat = {p:.4}",
                    e.dir_name,
                    cli::fmt17(e.final_front)
                );
            }
            Ok(exit::SUCCESS)
        }
        Sub::Converge(common) => {
            let m = load(&common, Command::Converge)?;
            let orders = cli::converge(&m)?;
            println!("temporal_order = {:.4}", orders.temporal_order());
            println!("spatial_order = {:.4}", orders.spatial_order());
            Ok(exit::SUCCESS)
        }
        Sub::Growth(common) => {
            let m = load(&common, Command::Growth)?;
            let summary = cli::growth(&m)?;
            println!("{summary}");
            Ok(if summary.passed {
                exit::SUCCESS
            } else {
                exit::CHECK_FAILED
            })
        }
        Sub::Calibrate { common, observed } => {
            let m = load(&common, Command::Calibrate)?;
            let text = std::fs::read_to_string(&observed)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", observed.display())))?;
            let fit = cli::calibrate(&m, &cli::parse_observed(&text)?)?;
            println!("a0_hat = {}", cli::fmt17(fit.a0_hat));
            println!("sse = {}", cli::fmt17(fit.sse));
            if let Some(edge) = fit.boundary {
                println!("warning: minimum on the {edge:?} bracket edge; widen the bracket");
            }
            Ok(exit::SUCCESS)
        }
        Sub::Check(common) => {
            let m = load(&common, Command::Check)?;
            let summary = cli::check(&m)?;
            print!("{summary}");
            Ok(if summary.passed() {
                exit::SUCCESS
            } else {
                exit::CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let code = match dispatch(args.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
