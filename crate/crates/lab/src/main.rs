// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use vlasov_core::observables::{fit_decay, DecayModel};
use vlasov_lab::harness::{bisect_data_scale, output_dir, run};
use vlasov_lab::report::RunReport;
use vlasov_lab::{compare, io, selftest, ExperimentConfig, RayonExecutor};

#[derive(Parser)]
#[command(
    name = "vlasov-lab",
    version,
    about = "Mean-field Vlasov experiments on the Bolza surface"
)]
struct Cli {
    /// Worker threads; overrides VLASOV_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its series, fits and report.
    Simulate {
        config: PathBuf,
        /// Output directory; overrides VLASOV_OUTPUT_DIR and the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a decay model to one column of a CSV series.
    Fit {
        series: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: DecayModel,
        /// Fit window as `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
        /// Column name; the second column by default.
        #[arg(long)]
        column: Option<String>,
    },
    /// Evaluate a relation such as "rate ratio = 2 ± 0.3" between two reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        relation: String,
    },
    /// Largest total mass of a nonlinear config whose speeds stay in band.
    Bisect {
        config: PathBuf,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 6)]
        iterations: usize,
    },
    /// Run the invariant suites on small problems.
    Selftest,
}

fn parse_model(s: &str) -> Result<DecayModel, String> {
    DecayModel::parse(s)
        .ok_or_else(|| format!("unknown model `{s}` (exponential, algebraic, exp-algebraic)"))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(lo < hi) {
        return Err("window needs lo < hi".into());
    }
    Ok((lo, hi))
}

fn executor(threads: Option<usize>) -> Result<RayonExecutor> {
    Ok(match threads {
        Some(n) => RayonExecutor::new(n)?,
        None => RayonExecutor::from_env()?,
    })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when the command ran but its verdict is negative.
fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output.unwrap_or_else(|| output_dir(&cfg));
            let exec = executor(cli.threads)?;
            let report =
                run(&cfg, &dir, &exec).with_context(|| format!("running {}", config.display()))?;
            print!("{}", report.summary());
            println!(
                "  wrote {} ({:.1} s, {} threads)",
                dir.display(),
                report.wall_time_s,
                exec.threads()
            );
            Ok(report.passed)
        }
        Command::Fit {
            series,
            model,
            window,
            floor,
            column,
        } => {
            let s = io::read_series(&series, column.as_deref())?;
            let fit = fit_decay(&s, model, window, floor)
                .with_context(|| format!("fitting {}", series.display()))?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(true)
        }
        Command::Compare { a, b, relation } => {
            let ra: RunReport = io::read_json(&a)?;
            let rb: RunReport = io::read_json(&b)?;
            let v = compare(&ra, &rb, &relation)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(v.passed)
        }
        Command::Bisect {
            config,
            lo,
            hi,
            iterations,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let b = bisect_data_scale(&cfg, lo, hi, iterations, &executor(cli.threads)?)?;
            println!("{}", serde_json::to_string_pretty(&b)?);
            Ok(true)
        }
        Command::Selftest => {
            let checks = selftest::selftest(&executor(cli.threads)?)?;
            for c in &checks {
                let tag = if c.passed { "ok" } else { "FAIL" };
                println!(
                    "{tag:4} {:<36} residual {:.3e} (tolerance {:.3e})",
                    c.name, c.residual, c.tolerance
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                eprintln!("{failed} invariant checks failed");
            }
            Ok(failed == 0)
        }
    }
}
