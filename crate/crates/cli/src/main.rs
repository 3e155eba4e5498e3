use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use detsim_cli::{cmd_compare, cmd_run, exit, CliError, RunOptions};
use detsim_core::{TieBreak, Verdict};

#[derive(Parser)]
#[command(
    name = "detsim",
    version,
    about = "Deterministic discrete-event simulation runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a job N times and check that every run produced the same trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long)]
        trace_dir: PathBuf,
        /// Upper bound of the wall-clock sleep before each callback.
        #[arg(long)]
        jitter_max_ms: Option<f64>,
        /// Run kernels concurrently on this many threads.
        #[arg(long)]
        parallel: Option<usize>,
        /// Reverse the same-instant release order (diagnostic builds only).
        #[arg(long, hide = true)]
        invert_tie_break: bool,
    },
    /// Compare two trace files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also compare the header line.
        #[arg(long)]
        strict_header: bool,
    },
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run {
            config,
            runs,
            trace_dir,
            jitter_max_ms,
            parallel,
            invert_tie_break,
        } => {
            let options = RunOptions {
                jitter_max_ms,
                parallel,
                tie_break: if invert_tie_break {
                    TieBreak::Inverted
                } else {
                    TieBreak::Normative
                },
                ..RunOptions::new(config, runs, trace_dir)
            };
            match cmd_run(&options) {
                Ok(report) => {
                    for run in &report.runs {
                        if let Some(err) = &run.error {
                            eprintln!("run_{:03}: {err}", run.index);
                        }
                    }
                    if let Some((run, line)) = report.divergence {
                        eprintln!("run_{run:03} diverges from run_000 at line {line}");
                    }
                    println!("{report}");
                    report.exit_code
                }
                Err(e) => fail(e),
            }
        }
        Command::Compare {
            a,
            b,
            strict_header,
        } => match cmd_compare(&a, &b, strict_header) {
            Ok(Verdict::Equal) => {
                println!("Equal");
                exit::OK
            }
            Ok(Verdict::FirstDivergence { line, left, right }) => {
                println!("FirstDivergence at line {line}");
                println!("< {}", left.as_deref().unwrap_or("<missing>"));
                println!("> {}", right.as_deref().unwrap_or("<missing>"));
                exit::DIVERGENCE
            }
            Err(e) => fail(e),
        },
    };
    ExitCode::from(code as u8)
}

fn fail(err: CliError) -> i32 {
    eprintln!("error: {err}");
    err.exit_code()
}
