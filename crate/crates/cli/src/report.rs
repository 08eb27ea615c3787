//! The JSON report document and its CSV history view.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use digiq::sparse::{OperatorFamily, SparseOperator};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub seed: u64,
    /// The resolved configuration, flags included.
    pub inputs: RunConfig,
    pub operator: Option<OperatorSummary>,
    /// Every formula-derived parameter with the inputs that produced it.
    pub derived: BTreeMap<String, Derived>,
    pub result: BTreeMap<String, Value>,
    /// Per-step series, written as CSV columns by [`write_history_csv`].
    pub histories: BTreeMap<String, Vec<f64>>,
    pub contract: Contract,
    /// The only field that differs between identical runs.
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub value: Value,
    pub formula: String,
    pub inputs: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub satisfied: bool,
    pub detail: String,
    /// Set when the run stopped on a numeric failure.
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub source: OperatorFamily,
    pub dim: usize,
    pub sparsity: usize,
    pub nnz: usize,
    pub hermitian: bool,
}

impl OperatorSummary {
    pub fn of(op: &SparseOperator) -> Self {
        OperatorSummary {
            source: op.family().clone(),
            dim: op.dim(),
            sparsity: op.sparsity(),
            nnz: op.nnz(),
            hermitian: op.is_hermitian(),
        }
    }
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            inputs: config.clone(),
            operator: None,
            derived: BTreeMap::new(),
            result: BTreeMap::new(),
            histories: BTreeMap::new(),
            contract: Contract {
                satisfied: false,
                detail: "not run".into(),
                error: None,
            },
            wall_time_seconds: 0.0,
        }
    }

    pub fn derive<T: Serialize>(&mut self, name: &str, value: T, formula: &str, inputs: &[(&str, Value)]) {
        self.derived.insert(
            name.into(),
            Derived {
                value: to_value(value),
                formula: formula.into(),
                inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            },
        );
    }

    pub fn set<T: Serialize>(&mut self, name: &str, value: T) {
        self.result.insert(name.into(), to_value(value));
    }

    pub fn history(&mut self, name: &str, series: Vec<f64>) {
        self.histories.insert(name.into(), series);
    }

    /// 0 when the contract holds, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.contract.satisfied {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("report: {e}")))
    }
}

pub fn to_value<T: Serialize>(value: T) -> Value {
    serde_json::to_value(value).expect("report values are always serializable")
}

pub fn write_json(report: &Report, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, report.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// One `step` column plus one column per history, one row per step.
/// Shorter series leave their cells empty.
pub fn write_history_csv<W: Write>(report: &Report, mut w: W) -> std::io::Result<()> {
    let names: Vec<&String> = report.histories.keys().collect();
    let rows = report.histories.values().map(Vec::len).max().unwrap_or(0);
    write!(w, "step")?;
    for n in &names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for i in 0..rows {
        write!(w, "{i}")?;
        for series in report.histories.values() {
            match series.get(i) {
                Some(x) => write!(w, ",{x:e}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
