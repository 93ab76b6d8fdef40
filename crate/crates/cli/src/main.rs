//! `saspair` — scenario runner for the correlated Raman-pair simulator.
//!
//! Exit codes: 0 success, 1 validation failure at run time, 2 configuration
//! error (unreadable/malformed/invalid scenario, bad flags).

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use saspair::error::Error;
use saspair::scenario::{self, parse_scenario, run_scenario, self_check};

#[derive(Parser)]
#[command(name = "saspair", version, about = "Correlated Stokes/anti-Stokes photon-pair simulator")]
struct Cli {
    /// Size of the worker thread pool (default: all cores). Outputs do not
    /// depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its artifacts.
    Run {
        /// Scenario JSON file.
        file: PathBuf,
        /// Output directory for CSV artifacts and summary.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the scenario's Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario file without running it.
    Check {
        /// Scenario JSON file.
        file: PathBuf,
    },
    /// Print the scenario schema.
    Schema,
    /// Print the package version.
    Version,
    /// Run the bundled acceptance suite and print a JSON report.
    SelfCheck,
}

fn classify(err: &Error) -> u8 {
    match err {
        // problems with the scenario document itself
        Error::Config(_) | Error::Json(_) => 2,
        // everything that fails while executing a well-formed scenario
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    match cli.command {
        Command::Run { file, out_dir, seed } => {
            let mut scenario = match parse_scenario(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            match run_scenario(&scenario, &out_dir) {
                Ok(report) => {
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    for v in &report.validations {
                        let status = if v.passed { "ok" } else { "FAILED" };
                        println!("{status:6} {} (measured {:.6e})", v.name, v.measured);
                    }
                    for f in &report.files {
                        println!("wrote {}", out_dir.join(f).display());
                    }
                    if report.failed {
                        eprintln!("error: scenario validation failed; scans were skipped");
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(classify(&e))
                }
            }
        }
        Command::Check { file } => match parse_scenario(&file) {
            Ok(scenario) => {
                for w in scenario.warnings() {
                    eprintln!("warning: {w}");
                }
                println!("{}: ok", file.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Schema => {
            print!("{}", scenario::schema_text());
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("saspair {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::SelfCheck => {
            let report = self_check();
            print!("{}", report.to_json());
            // failures are report entries, not process failures
            ExitCode::SUCCESS
        }
    }
}
