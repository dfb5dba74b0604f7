//! `jrc run|crlb|validate <config>`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::ExperimentSpec;
use super::csv::{to_csv_string, write_csv};
use super::run::{bounds_only, run_experiment_with_workers};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "jrc", about = "Joint radar/communication Monte Carlo sweeps")]
struct Cli {
    /// Worker threads for the Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep and write the CSV named in the config.
    Run {
        config: PathBuf,
        /// Write here instead of `output_csv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print bounds and rates without Monte Carlo.
    Crlb { config: PathBuf },
    /// Check the config and exit.
    Validate { config: PathBuf },
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Run { config, output } => {
            let spec = ExperimentSpec::load(&config)?;
            let rows = run_experiment_with_workers(&spec, workers)?;
            let path = output.unwrap_or_else(|| spec.output_csv.clone());
            write_csv(&rows, &path)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            let _ = writeln!(
                out,
                "wrote {} rows to {} ({failed} failed)",
                rows.len(),
                path.display()
            );
        }
        Command::Crlb { config } => {
            let spec = ExperimentSpec::load(&config)?;
            let _ = write!(out, "{}", to_csv_string(&bounds_only(&spec)));
        }
        Command::Validate { config } => {
            let spec = ExperimentSpec::load(&config)?;
            let _ = writeln!(
                out,
                "ok: {} waveforms, {} SNR points, {} trials",
                spec.waveforms.len(),
                spec.snr_points_db().len(),
                spec.trials
            );
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code. Diagnostics go to `err`
/// as a single line.
pub fn cli_main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_main_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
