use std::path::PathBuf;
use std::process::ExitCode;

use bsbm::cli::{self, CliError};
use bsbm::readout::Construction;
use clap::{Parser, Subcommand};

/// Boson-sampling Born machines: train, sample, evaluate, inspect towers.
///
/// BSBM_ENUM_CAP overrides the enumeration cap (default 2^20 outcomes).
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on the configured dataset, writing a checkpoint and loss trace.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Checkpoint path, overriding io.checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw exact samples from a checkpoint.
    Sample {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Print m-bit Fock outcomes instead of n-bit readout values.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write a metrics CSV for a checkpoint against a dataset.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print a readout tower, optionally running its structural checks.
    Tower {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        construction: Option<Construction>,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Cross-check permanents, parities and the MMD against brute force.
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Train {
            config,
            seed,
            workers,
            out,
        } => {
            let summary = cli::cmd_train(&cli::TrainArgs {
                config,
                seed,
                workers,
                out,
            })?;
            eprintln!(
                "final loss {:.6e} ± {:.2e}; wrote {} and {}",
                summary.final_loss.0,
                summary.final_loss.1,
                summary.checkpoint.display(),
                summary.trace.display()
            );
            Ok(())
        }
        Command::Sample {
            checkpoint,
            count,
            seed,
            raw,
            out,
            workers,
        } => cli::cmd_sample(
            &cli::SampleArgs {
                checkpoint,
                count,
                seed,
                raw,
                out,
                workers,
            },
            &mut stdout,
        ),
        Command::Evaluate {
            checkpoint,
            data,
            seed,
            sigma,
            out,
            workers,
        } => cli::cmd_evaluate(
            &cli::EvaluateArgs {
                checkpoint,
                data,
                seed,
                sigma,
                out,
                workers,
            },
            &mut stdout,
        ),
        Command::Tower {
            config,
            n,
            construction,
            verify,
            seed,
            workers,
        } => cli::cmd_tower(
            &cli::TowerArgs {
                config,
                n,
                construction,
                verify,
                seed,
                workers,
            },
            &mut stdout,
        ),
        Command::Oracle { seed, workers } => {
            cli::cmd_oracle(&cli::OracleArgs { seed, workers }, &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
