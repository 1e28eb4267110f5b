use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::config::{load_config, RunConfig};
use super::run::{compare_modes, run_scenario, run_sweep, write_json};
use crate::fractional_kernel::FractionalKernel;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "zener-beam",
    version,
    about = "Euler-Bernoulli beam on a fractional Zener foundation"
)]
pub struct Cli {
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario of a config file.
    Run { config: PathBuf },
    /// Run the config as an ε-sweep and write the moderateness report.
    Sweep { config: PathBuf },
    /// Compare direct and Picard trajectories.
    Compare { config: PathBuf },
    /// Tabulate the memory kernel on a uniform grid.
    KernelTable { alpha: f64, theta: f64, t: f64, dt: f64 },
}

#[derive(Debug, Serialize)]
struct Failure<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

fn classify(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::NoInteriorDofs { .. } => ("config", EXIT_CONFIG),
        _ => ("solver", EXIT_SOLVER),
    }
}

fn record(dir: &Path, kind: &str, exit_code: i32, message: String) -> i32 {
    eprintln!("{kind} failure: {message}");
    let failure = Failure {
        kind,
        exit_code,
        message,
    };
    if std::fs::create_dir_all(dir).is_ok() {
        if let Err(e) = write_json(&dir.join("failure.json"), &failure) {
            eprintln!("could not write failure record: {e}");
        }
    }
    exit_code
}

fn out_dir(cli_out: &Option<PathBuf>, config: Option<&RunConfig>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| config.map(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs the CLI and returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let config_path = match &cli.command {
        Command::Run { config } | Command::Sweep { config } | Command::Compare { config } => Some(config.clone()),
        Command::KernelTable { .. } => None,
    };
    let config = match config_path.as_deref().map(load_config).transpose() {
        Ok(c) => c,
        Err(e) => return record(&out_dir(&cli.out, None), "config", EXIT_CONFIG, e.to_string()),
    };
    let dir = out_dir(&cli.out, config.as_ref());
    let outcome = match (&cli.command, config) {
        (Command::Run { .. }, Some(c)) => run_scenario(&c, &dir).map(|r| {
            print_members(&r);
            (r.passed(), "energy inequality or moderateness check failed".to_string())
        }),
        (Command::Sweep { .. }, Some(c)) => run_sweep(&c, &dir).map(|r| {
            print_members(&r);
            if let Some(s) = &r.sweep {
                println!(
                    "fitted power {:.6}, envelope power {:.6} (correlation {:.6}), moderate {}",
                    s.fitted_power,
                    s.envelope_power,
                    s.envelope_correlation,
                    s.is_moderate()
                );
            }
            (r.passed(), "sweep is not moderate".to_string())
        }),
        (Command::Compare { .. }, Some(c)) => compare_modes(&c).and_then(|r| {
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            write_json(&dir.join("compare.json"), &r)?;
            println!(
                "direct vs picard: relative E_V distance {:.3e} (limit {:.3e}), {} Picard iterations",
                r.relative_distance,
                10.0 * r.tol,
                r.picard.iterations()
            );
            Ok((r.passed, "direct and Picard trajectories disagree".to_string()))
        }),
        (&Command::KernelTable { alpha, theta, t, dt }, _) => {
            FractionalKernel::build(alpha, theta, t, dt).and_then(|k| {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let path = dir.join("kernel.csv");
                k.write_csv(&path)?;
                println!("{} samples written to {}", k.values().len(), path.display());
                Ok((true, String::new()))
            })
        }
        _ => unreachable!("config is loaded for every config command"),
    };
    match outcome {
        Ok((true, _)) => EXIT_OK,
        Ok((false, msg)) => record(&dir, "verdict", EXIT_VERDICT, msg),
        Err(e) => {
            let (kind, code) = classify(&e);
            record(&dir, kind, code, e.to_string())
        }
    }
}

fn print_members(report: &super::run::RunReport) {
    for m in &report.members {
        println!(
            "{} eps={:.6e}{}: inequality {} (worst relative margin {:.3e})",
            report.scenario.name(),
            m.eps,
            m.speed.map(|v| format!(" speed={v}")).unwrap_or_default(),
            if m.verdict.holds { "holds" } else { "VIOLATED" },
            m.verdict.worst_relative_margin
        );
    }
}
