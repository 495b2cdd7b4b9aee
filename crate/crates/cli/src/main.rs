//! `singreg`: batch driver for the regularization experiments.
//!
//! Exit codes: 0 when every check passes, 1 on usage or configuration errors,
//! 2 when a check fails or a parameter guard is violated without `--override-guards`.

mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, RunConfig};
use report::{Check, VerdictReport};
use run::Failure;

#[derive(Debug, Parser)]
#[command(name = "singreg", version, about = "Delta-sequence regularization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Run configuration (sectioned key = value file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and verdict.json.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Worker threads for ε-sweeps.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Run even when a parameter guard is violated.
    #[arg(long)]
    override_guards: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fractional-integral L¹ bounds of the mollified delta.
    FracBounds(Common),
    /// Weakly singular Volterra equation: solve, sweep, uniqueness probe.
    Volterra(Common),
    /// Parabolic evolution: solve, sweep, uniqueness probe.
    Evolution(Common),
    /// Linear Schrödinger evolution.
    Schrodinger(Common),
    /// Mollified propagator bound table.
    Sweep(Common),
    /// Every experiment, each into its own subdirectory.
    All(Common),
}

fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn exit_for(report: &VerdictReport) -> u8 {
    if report.passed {
        0
    } else {
        2
    }
}

fn print_summary(report: &VerdictReport) {
    for c in &report.checks {
        println!(
            "{} {}/{}: measured {} tolerance {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            report.experiment,
            c.name,
            c.measured.map_or("-".into(), |v| format!("{v:.6e}")),
            c.tolerance.map_or("-".into(), |v| format!("{v:.6e}")),
            c.detail
        );
    }
}

fn failure_exit(f: Failure) -> ExitCode {
    match f {
        Failure::Usage(m) => eprintln!("error: {m}"),
        Failure::Io(m) => eprintln!("error: cannot write output: {m}"),
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (selected, common) = match cli.command {
        Command::FracBounds(c) => (Some(Experiment::FracBounds), c),
        Command::Volterra(c) => (Some(Experiment::Volterra), c),
        Command::Evolution(c) => (Some(Experiment::Evolution), c),
        Command::Schrodinger(c) => (Some(Experiment::Schrodinger), c),
        Command::Sweep(c) => (Some(Experiment::Sweep), c),
        Command::All(c) => (None, c),
    };
    if common.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(common.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    let cfg = match load(&common.config) {
        Ok(c) => c,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    let override_guards = common.override_guards || cfg.override_guards;
    match (selected, cfg.experiment) {
        (Some(s), Some(c)) if s != c => {
            eprintln!(
                "error: config is for '{}' but the '{}' subcommand was used",
                c.name(),
                s.name()
            );
            ExitCode::from(1)
        }
        (Some(s), _) => match run::run_experiment(s, &cfg, &common.out, override_guards) {
            Ok(report) => {
                print_summary(&report);
                ExitCode::from(exit_for(&report))
            }
            Err(f) => failure_exit(f),
        },
        (None, _) => {
            let start = std::time::Instant::now();
            let mut total = VerdictReport::new("all");
            for exp in Experiment::ALL {
                match run::run_experiment(exp, &cfg, &common.out.join(exp.name()), override_guards) {
                    Ok(report) => {
                        print_summary(&report);
                        for c in report.checks {
                            total.push(Check {
                                name: format!("{}/{}", exp.name(), c.name),
                                ..c
                            });
                        }
                    }
                    Err(f) => return failure_exit(f),
                }
            }
            total.runtime_s = start.elapsed().as_secs_f64();
            if let Err(e) = std::fs::create_dir_all(&common.out).and_then(|_| total.write(&common.out.join("verdict.json"))) {
                return failure_exit(Failure::Io(e.to_string()));
            }
            ExitCode::from(exit_for(&total))
        }
    }
}
