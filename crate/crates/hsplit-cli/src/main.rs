use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hsplit_cli::{run_scenario, run_suite, validate_config, SolveOptions};

/// Proximal splitting runs on geodesic spaces: load a scenario, iterate,
/// and certify the trace against its convergence guarantees.
///
/// Set HS_LOG=debug for progress logging.
#[derive(Parser)]
#[command(name = "hsplit", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace.csv + summary.json.
    Solve {
        /// Scenario config (JSON).
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Add flattened iterate coordinates to the trace columns.
        #[arg(long)]
        dump_points: bool,
        /// Compute a search reference even if the config omits one.
        #[arg(long)]
        with_reference: bool,
    },
    /// Check a scenario config without running it.
    Validate {
        /// Scenario config (JSON).
        config: PathBuf,
    },
    /// Run every scenario in a directory, one subdirectory of output each.
    Suite {
        /// Directory of scenario configs.
        dir: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, out, seed, dump_points, with_reference } => {
            let opts = SolveOptions { seed, dump_points, with_reference };
            match run_scenario(&config, &out, &opts) {
                Ok(outcome) => {
                    let s = &outcome.summary;
                    println!(
                        "{}: {} iterations, stop cause {}, final objective {}",
                        s.scenario, s.iterations, s.stop_cause, s.final_phi_exact
                    );
                    for check in &s.checks {
                        println!("  {:<28} {}", check.name, check.verdict);
                    }
                    if outcome.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("diagnostic failures recorded in summary.json");
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { config } => match validate_config(&config) {
            Ok(report) => {
                println!("{report}\nok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("invalid: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Suite { dir, out } => {
            let opts = SolveOptions::default();
            match run_suite(&dir, &out, &opts) {
                Ok(entries) => {
                    let mut any_error = false;
                    let mut any_fail = false;
                    for entry in &entries {
                        match &entry.result {
                            Ok(outcome) if outcome.all_passed() => {
                                println!("{:<28} pass", entry.name);
                            }
                            Ok(_) => {
                                any_fail = true;
                                println!("{:<28} FAIL", entry.name);
                            }
                            Err(e) => {
                                any_error = true;
                                println!("{:<28} error: {e}", entry.name);
                            }
                        }
                    }
                    if any_error {
                        ExitCode::FAILURE
                    } else if any_fail {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
