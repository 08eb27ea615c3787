//! Reproducible command-line runs over the `digiq` solvers.
//!
//! A run is a [`RunConfig`] (TOML, with flags layered on top) dispatched by
//! [`run`] to one subcommand. Every run yields a [`Report`]; numeric failures
//! are reported, not raised, so the exit code can separate them from usage
//! errors.

pub mod config;
pub mod report;
mod run;

use std::path::Path;

pub use config::{parse_config, Command, RunConfig};
pub use report::{write_history_csv, Report, SCHEMA_VERSION};
pub use run::{run, RunOutcome};

/// Problems with the invocation rather than the numerics. Exit code 1.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl From<digiq::Error> for CliError {
    fn from(e: digiq::Error) -> Self {
        match e {
            digiq::Error::Io(msg) => CliError::Io(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Write the report (stdout when no path is set), the state dump and the
/// history CSV named in `outcome.report.inputs.output`.
pub fn emit(outcome: &RunOutcome) -> Result<(), CliError> {
    let out = &outcome.report.inputs.output;
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    match &out.report {
        Some(path) => report::write_json(&outcome.report, path)?,
        None => print!("{}", outcome.report.to_json()),
    }
    if let (Some(path), Some(state)) = (&out.state, &outcome.state) {
        let file = std::fs::File::create(path).map_err(|e| io(path, e))?;
        let w = std::io::BufWriter::new(file);
        let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let res = if csv { state.write_csv(w) } else { state.write_binary(w) };
        res.map_err(CliError::from)?;
    }
    if let Some(path) = &out.history_csv {
        let file = std::fs::File::create(path).map_err(|e| io(path, e))?;
        write_history_csv(&outcome.report, std::io::BufWriter::new(file)).map_err(|e| io(path, e))?;
    }
    Ok(())
}
