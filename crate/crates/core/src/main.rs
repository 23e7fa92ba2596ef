use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use empclt::scenario::{manifest, run_scenario};
use empclt::Error;

#[derive(Parser)]
#[command(name = "empclt", version, about = "Run empirical-process CLT scenarios")]
struct Cli {
    /// Master seed, overriding the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the scenario file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Print version, task kinds, defaults and the seed scheme.
    Manifest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match cli.command {
        Command::Manifest => {
            print!("{}", manifest());
            ExitCode::SUCCESS
        }
        Command::Run { config } => match run_scenario(&config, cli.seed, cli.out.as_deref()) {
            Ok(summary) => {
                for c in &summary.checks {
                    println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                println!("report: {}", summary.report.display());
                if summary.passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(match e {
                    Error::Resource(_) => 3,
                    _ => 1,
                })
            }
        },
    }
}
