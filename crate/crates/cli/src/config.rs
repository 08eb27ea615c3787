//! Run configuration: a TOML document, optionally overridden by flags.

use std::path::PathBuf;
use std::str::FromStr;

use digiq::nr::AlphaMode;
use digiq::pauli::{PauliString, PauliSum, PauliTerm};
use digiq::sparse::OperatorFamily;
use digiq::FixedPointFormat;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Expm,
    InverseExp,
    Measure,
    Groundstate,
    Thermal,
    Decompose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Expm => "expm",
            Command::InverseExp => "inverse-exp",
            Command::Measure => "measure",
            Command::Groundstate => "groundstate",
            Command::Thermal => "thermal",
            Command::Decompose => "decompose",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Set by the positional subcommand when run from the command line.
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    pub operator: Option<OperatorFamily>,
    #[serde(default)]
    pub vector: VectorSource,
    #[serde(default)]
    pub accuracy: Accuracy,
    #[serde(default)]
    pub format: FormatChoice,
    #[serde(default)]
    pub solve: SolveOptions,
    /// Evolution time for `expm`, Euclidean time for `groundstate`.
    pub t: Option<f64>,
    pub beta: Option<f64>,
    /// Spectrum bracket `[lo, hi]`; derived from the operator when absent.
    pub bounds: Option<[f64; 2]>,
    /// Known excitation gap for `groundstate`.
    pub gap: Option<f64>,
    /// Observables as `coef*LABEL` terms joined by commas, e.g. `0.5*XZ,ZZ`.
    #[serde(default)]
    pub observables: Vec<String>,
    /// TOML file holding a k-local observable as dense clusters.
    pub observable_spec: Option<PathBuf>,
    #[serde(default)]
    pub measure: MeasureMode,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSource {
    /// Equal amplitudes, normalized.
    #[default]
    Uniform,
    /// Seeded uniform draws on the unit square per amplitude, normalized.
    Random,
    Basis { index: usize },
    Values {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    /// A binary state dump.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Accuracy {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    #[serde(default = "default_epsilon_m")]
    pub epsilon_m: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_epsilon() -> f64 {
    1e-6
}
fn default_epsilon0() -> f64 {
    1e-8
}
fn default_epsilon_m() -> f64 {
    0.01
}
fn default_delta() -> f64 {
    0.5
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy {
            epsilon: default_epsilon(),
            epsilon0: default_epsilon0(),
            epsilon_m: default_epsilon_m(),
            delta: default_delta(),
        }
    }
}

/// `"auto"` or `"q_total/frac_bits"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FormatChoice {
    #[default]
    Auto,
    Explicit(FixedPointFormat),
}

impl FormatChoice {
    pub fn explicit(self) -> Option<FixedPointFormat> {
        match self {
            FormatChoice::Auto => None,
            FormatChoice::Explicit(f) => Some(f),
        }
    }
}

impl FromStr for FormatChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "auto" {
            return Ok(FormatChoice::Auto);
        }
        let (q, f) = s
            .split_once('/')
            .ok_or_else(|| format!("format '{s}' is neither 'auto' nor 'q_total/frac_bits'"))?;
        let q = q.trim().parse().map_err(|e| format!("q_total in '{s}': {e}"))?;
        let f = f.trim().parse().map_err(|e| format!("frac_bits in '{s}': {e}"))?;
        FixedPointFormat::new(q, f).map(FormatChoice::Explicit).map_err(|e| e.to_string())
    }
}

impl std::fmt::Display for FormatChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatChoice::Auto => write!(f, "auto"),
            FormatChoice::Explicit(x) => write!(f, "{}/{}", x.q_total(), x.frac_bits()),
        }
    }
}

impl Serialize for FormatChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FormatChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    #[serde(default = "default_alpha")]
    pub alpha: AlphaMode,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_alpha() -> AlphaMode {
    AlphaMode::Optimal
}
fn default_max_iterations() -> usize {
    1_000_000
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            alpha: default_alpha(),
            max_iterations: default_max_iterations(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// JSON report; stdout when absent.
    pub report: Option<PathBuf>,
    /// State dump: `.csv` for text, anything else for the binary format.
    pub state: Option<PathBuf>,
    /// CSV of the history series.
    pub history_csv: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// `name` or `name:key=value,key=value`; list values use `;`.
/// Random families take their seed from `seed` unless one is given.
pub fn parse_family(spec: &str, seed: u64) -> Result<OperatorFamily, CliError> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let family = match name {
        "identity" => "identity",
        "diagonal" => "diagonal",
        "laplacian1d" | "laplacian" => "laplacian1d",
        "tfi" | "transverse_field_ising" => "transverse_field_ising",
        "random" | "random_hermitian" => "random_hermitian",
        other => return Err(CliError::Usage(format!("unknown operator family '{other}'"))),
    };
    let mut table = toml::Table::new();
    table.insert("family".into(), family.into());
    for kv in args.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("family argument '{kv}' is not key=value")))?;
        let value: toml::Value = if v.contains(';') {
            let items = v
                .split(';')
                .map(|x| x.trim().parse::<f64>().map(toml::Value::Float))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("list '{v}': {e}")))?;
            toml::Value::Array(items)
        } else if let Ok(i) = v.parse::<i64>() {
            toml::Value::Integer(i)
        } else if let Ok(x) = v.parse::<f64>() {
            toml::Value::Float(x)
        } else if let Ok(b) = v.parse::<bool>() {
            toml::Value::Boolean(b)
        } else {
            toml::Value::String(v.into())
        };
        table.insert(k.trim().into(), value);
    }
    if family == "random_hermitian" && !table.contains_key("seed") {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    if let Some(v) = table.get("values").filter(|v| !v.is_array()).cloned() {
        // a one-element list has no separator
        table.insert("values".into(), toml::Value::Array(vec![v]));
    }
    OperatorFamily::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Usage(format!("family '{spec}': {e}")))
}

/// `coef*LABEL` terms joined by commas; character `i` of a label acts on site `i`.
pub fn parse_observable(spec: &str) -> Result<PauliSum, CliError> {
    let mut terms = Vec::new();
    for raw in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (beta, label) = match raw.split_once('*') {
            Some((c, l)) => (
                c.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("coefficient in '{raw}': {e}")))?,
                l.trim(),
            ),
            None => (1.0, raw),
        };
        let string: PauliString = label.parse().map_err(|e| CliError::Usage(format!("observable '{raw}': {e}")))?;
        terms.push(PauliTerm { beta, string });
    }
    let n = terms
        .first()
        .map(|t| t.string.n_sites())
        .ok_or_else(|| CliError::Usage(format!("observable '{spec}' has no terms")))?;
    PauliSum::new(n, terms).map_err(|e| CliError::Usage(format!("observable '{spec}': {e}")))
}
