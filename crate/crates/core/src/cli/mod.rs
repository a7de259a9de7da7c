//! Command-line front end: configuration, scenario orchestration and CSV/JSON output.
//!
//! Exit status: 0 success, 1 I/O failure, 2 usage error, 3 configuration
//! error, 4 numerical contract violation (norm loss, box truncation, algebra
//! order outside its window), 5 cross-method deviation beyond tolerance.

pub mod commands;
pub mod config;
pub mod output;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::dsl::DslError;
use crate::grid::GridError;
use crate::potential::PotentialError;
use crate::series::SeriesError;

pub use commands::{
    cmd_compare, cmd_decoherence, cmd_potentials, cmd_spectrum, cmd_susy_check, cmd_wavepackets, RunReport,
    SusyCheckReport,
};
pub use config::{load_config, parse_config, ConfigError, ScenarioConfig};
pub use output::{format_number, write_atomic, Table};
pub use scenario::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical contract violated: {0}")]
    Numerical(String),
    #[error("cross-method deviation beyond tolerance: {0}")]
    Deviation(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Deviation(_) => 5,
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        CliError::Config(ConfigError::Model(e))
    }
}

impl From<DslError> for CliError {
    fn from(e: DslError) -> Self {
        CliError::Config(ConfigError::Expression(e))
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::BadSize(_) | GridError::BadHalfWidth(_) | GridError::InvalidParameter(_) => {
                CliError::Config(ConfigError::Invalid { key: "scenario", message: e.to_string() })
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "susy-decoherence", version, about = "Spin decoherence in supersymmetric quantum mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Suppress status lines and warnings on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Superpotential expression, overriding [model].W.
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    superpotential: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partner potentials and their harmonic models.
    Potentials,
    /// Channel densities at the given times.
    Wavepackets {
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
    },
    /// Decoherence factor of every configured method, with a JSON summary.
    Decoherence {
        /// Summary path; defaults to the output path with a .json extension.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
    },
    /// Supersymmetry algebra residuals under grid refinement.
    SusyCheck {
        #[arg(long, default_value_t = 1)]
        halvings: usize,
    },
    /// Lowest eigenvalues of both partner Hamiltonians.
    Spectrum {
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Run every configured method and report deviations.
    Compare,
}

struct Sink {
    out: Option<PathBuf>,
    quiet: bool,
}

impl Sink {
    fn emit(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.out {
            Some(p) => write_atomic(p, bytes)?,
            None => std::io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn json_bytes(value: &impl serde::Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialize");
    v.push(b'\n');
    v
}

fn check_report(report: &RunReport, sink: &Sink) -> Result<(), CliError> {
    for w in &report.warnings {
        sink.note(&format!("warning: {w}"));
    }
    if report.within_tolerance {
        return Ok(());
    }
    let worst: Vec<String> = report
        .deviations
        .iter()
        .filter(|d| d.gated && d.max_abs_deviation > report.tolerance)
        .map(|d| format!("{} vs {}: {:e}", d.a, d.b, d.max_abs_deviation))
        .collect();
    Err(CliError::Deviation(format!("{} (tolerance {:e})", worst.join(", "), report.tolerance)))
}

fn summary_path(explicit: Option<PathBuf>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.or_else(|| out.map(|p| p.with_extension("json")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => load_config(p, cli.superpotential.as_deref())?,
        None => match &cli.superpotential {
            Some(expr) => ScenarioConfig::for_expression(expr)?,
            None => return Err(CliError::Usage("either --config or --superpotential is required".into())),
        },
    };
    let sink = Sink { out: cli.out.clone().or_else(|| config.output.path.clone()), quiet: cli.quiet };

    match cli.command {
        Command::Potentials => sink.emit(&cmd_potentials(&config)?.to_csv()),
        Command::Wavepackets { times } => {
            let scenario = Scenario::resolve(&config)?;
            sink.emit(&cmd_wavepackets(&scenario, &times)?.to_csv())
        }
        Command::Decoherence { summary } => {
            let scenario = Scenario::resolve(&config)?;
            let (table, report) = cmd_decoherence(&scenario)?;
            sink.emit(&table.to_csv())?;
            if let Some(p) = summary_path(summary, sink.out.as_deref()) {
                write_atomic(&p, &json_bytes(&report))?;
            }
            for m in &report.methods {
                sink.note(&format!("{}: min |D| = {:.6e} at omega0 t = {:.6}", m.method, m.min_abs, m.omega0_t_min));
            }
            check_report(&report, &sink)
        }
        Command::Compare => {
            let scenario = Scenario::resolve(&config)?;
            let report = cmd_compare(&scenario)?;
            sink.emit(&json_bytes(&report))?;
            check_report(&report, &sink)
        }
        Command::SusyCheck { halvings } => {
            let report = cmd_susy_check(&config, halvings)?;
            sink.emit(&json_bytes(&report))?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Numerical(format!(
                    "fitted convergence order outside [{}, {}]",
                    commands::ORDER_WINDOW[0],
                    commands::ORDER_WINDOW[1]
                )))
            }
        }
        Command::Spectrum { k } => sink.emit(&cmd_spectrum(&config, k)?.to_csv()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Io(std::io::Error::other("x")).exit_code(),
            CliError::Usage(String::new()).exit_code(),
            CliError::Config(ConfigError::MissingSection("model")).exit_code(),
            CliError::Numerical(String::new()).exit_code(),
            CliError::Deviation(String::new()).exit_code(),
        ];
        assert_eq!(codes, [1, 2, 3, 4, 5]);
        assert_eq!(CliError::from(GridError::BoxTooSmall { time: 0.0, amplitude: 1.0 }).exit_code(), 4);
        assert_eq!(CliError::from(GridError::BadSize(3)).exit_code(), 3);
    }

    #[test]
    fn summary_beside_output() {
        assert_eq!(summary_path(None, Some(Path::new("a/d.csv"))), Some(PathBuf::from("a/d.json")));
        assert_eq!(summary_path(None, None), None);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["susy-decoherence", "potentials"]), 2);
        assert_eq!(run(["susy-decoherence", "frobnicate"]), 2);
    }
}
