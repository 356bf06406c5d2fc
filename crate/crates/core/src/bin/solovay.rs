use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use solovay_core::scenario::{emit_csv, run_scenario, Overrides, Scenario};

/// Overrides `--csv-dir` when that flag is absent.
const OUT_DIR_ENV: &str = "SOLOVAY_OUT_DIR";

/// Exit status for unreadable, malformed or unresolvable scenarios.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "solovay", version, about = "Run Solovay-reducibility scenarios under explicit fuel budgets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its report; exit 0 all pass, 1 any fail, 2 inconclusive.
    Run {
        path: PathBuf,
        /// Default depth for tasks without their own.
        #[arg(long)]
        depth: Option<usize>,
        /// Default fuel for tasks without their own.
        #[arg(long)]
        fuel: Option<u64>,
        /// Run only this task and its dependencies; repeatable.
        #[arg(long = "task")]
        tasks: Vec<String>,
        /// Write the report and every task's CSV tables here.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Reserved; every bundled task is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario without running it.
    Check { path: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Check { path } => match Scenario::load(&path) {
            Ok(sc) => {
                println!("{}: {} tasks", sc.name, sc.tasks.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_ERROR)
            }
        },
        Command::Run { path, depth, fuel, tasks, csv_dir, seed } => {
            let ov = Overrides { depth, fuel, tasks, seed };
            let started = Instant::now();
            let sc = match Scenario::load(&path) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_ERROR);
                }
            };
            let report = match run_scenario(&sc, &ov) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_ERROR);
                }
            };
            let text = report.to_string();
            print!("{text}");
            let dir = csv_dir.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
            if let Some(dir) = dir {
                let written = std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::write(dir.join(format!("{}.report.txt", report.scenario)), &text))
                    .map_err(|e| e.to_string())
                    .and_then(|_| report.tasks.iter().try_for_each(|t| emit_csv(&report, &t.name, &dir).map(|_| ()).map_err(|e| e.to_string())));
                if let Err(e) = written {
                    eprintln!("error: {}: {e}", dir.display());
                    return ExitCode::from(EXIT_ERROR);
                }
            }
            eprintln!("elapsed {:.3}s", started.elapsed().as_secs_f64());
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
