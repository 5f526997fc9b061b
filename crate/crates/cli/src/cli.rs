use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qmeas_core::{Family, RelationId, ValueMap};

use crate::commands::{cmd_check, cmd_metrics, cmd_search, cmd_sweep, parse_grid, ObservableChoice, SearchOptions, SweepParam};
use crate::error::CliError;
use crate::report::Format;
use crate::reproduce::cmd_reproduce_spin;

#[derive(Debug, Parser)]
#[command(name = "qmeas", version, about = "Simulate indirect quantum measurements and check uncertainty relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One report row per scenario file.
    Metrics {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// One report row per grid point.
    Sweep {
        file: PathBuf,
        /// `phi_degrees` (sigma_phi models) or `scale` (factor applied to measurement values).
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values, e.g. `0,40,90`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Evaluate one relation, or all of them.
    Check {
        file: PathBuf,
        #[arg(long, value_parser = parse_relation)]
        relation: Option<RelationId>,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Search for the configuration with the smallest slack.
    Search {
        #[arg(long, value_parser = parse_relation)]
        relation: RelationId,
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        /// Write the witness as a scenario file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `pauli` or `random_pauli_type`.
        #[arg(long, default_value = "pauli")]
        observables: ObservableChoice,
        #[arg(long)]
        object_dim: Option<usize>,
        #[arg(long)]
        probe_dim: Option<usize>,
        /// Populated pointer levels for the shift family.
        #[arg(long)]
        probe_support: Option<usize>,
        /// Value map composed after the family's own, e.g. `scale:100`.
        #[arg(long, value_parser = parse_value_map)]
        rescale: Option<ValueMap>,
        #[arg(long, default_value_t = qmeas_core::DEFAULT_TOL)]
        tol: f64,
    },
    /// Table of the spin-1/2 sigma_phi example.
    ReproduceSpin {
        #[arg(long, default_value = "csv")]
        format: Format,
    },
}

fn parse_relation(s: &str) -> Result<RelationId, String> {
    s.parse().map_err(|e: qmeas_core::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: qmeas_core::Error| e.to_string())
}

fn parse_value_map(s: &str) -> Result<ValueMap, String> {
    s.parse().map_err(|e: qmeas_core::Error| e.to_string())
}

fn dispatch<W: Write>(command: Command, out: &mut W) -> Result<(), CliError> {
    match command {
        Command::Metrics { files, format } => cmd_metrics(&files, format, out),
        Command::Sweep { file, param, grid, format } => {
            let grid = parse_grid(&grid).map_err(CliError::Usage)?;
            cmd_sweep(&file, param, &grid, format, out)
        }
        Command::Check { file, relation, format } => cmd_check(&file, relation, format, out),
        Command::Search { relation, family, budget, seed, out: path, observables, object_dim, probe_dim, probe_support, rescale, tol } => {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::Usage(format!("tolerance must be finite and non-negative, got {tol}")));
            }
            let opts = SearchOptions {
                out: path,
                observables,
                object_dim,
                probe_dim,
                probe_support,
                rescale,
                tol,
                ..SearchOptions::new(relation, family, budget, seed)
            };
            cmd_search(&opts, out).map(|_| ())
        }
        Command::ReproduceSpin { format } => cmd_reproduce_spin(format, out),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
