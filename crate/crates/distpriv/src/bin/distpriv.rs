// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distpriv::config::ExperimentConfig;
use distpriv::error::{RunError, EXIT_OK};
use distpriv::runner::{self, Overrides};

#[derive(Parser)]
#[command(name = "distpriv", version, about = "Distribution-privacy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one curve (or `all`) and write CSV tables.
    Run {
        config: PathBuf,
        /// eps-vs-k, eps-vs-epsA, eps-vs-r, loss-vs-epsA,
        /// eps-vs-loss-comparison, distp-vs-asr, bounds, or all.
        #[arg(long)]
        curve: String,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config file.
    Validate { config: PathBuf },
}

fn base_dir(config: &Path) -> &Path {
    config.parent().unwrap_or(Path::new("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            curve,
            out,
            seed,
            samples,
            threads,
        } => (|| -> Result<(), RunError> {
            let cfg = ExperimentConfig::load(&config)?;
            let curves = runner::parse_curves(&curve)?;
            let out = out.unwrap_or_else(|| base_dir(&config).join(&cfg.output_dir));
            let overrides = Overrides {
                seed,
                samples,
                threads,
            };
            for path in runner::run(cfg, base_dir(&config), &curves, &out, overrides)? {
                println!("{}", path.display());
            }
            Ok(())
        })(),
        Command::Validate { config } => ExperimentConfig::load(&config)
            .map(|cfg| println!("ok {}", cfg.hash()))
            .map_err(RunError::from),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
