use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use digiq::nr::AlphaMode;
use digiq_cli::config::{parse_family, FormatChoice, MeasureMode, VectorSource};
use digiq_cli::{emit, parse_config, run, CliError, Command, RunConfig};

/// Fixed-point linear algebra runs with JSON reports.
///
/// Exit status: 0 when the run's numeric contract holds, 2 when it fails
/// (a report is still written), 1 on usage or I/O errors. DIGIQ_THREADS sets
/// the worker count; results do not depend on it.
#[derive(Debug, Parser)]
#[command(name = "digiq", version)]
struct Cli {
    command: Command,
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix Market file as the operator.
    #[arg(long, conflicts_with = "family")]
    matrix: Option<PathBuf>,
    /// Builtin operator, e.g. `laplacian1d:dim=8` or `tfi:sites=4,coupling=1,field=0.5`.
    #[arg(long)]
    family: Option<String>,
    /// uniform | random | basis:INDEX | file:PATH
    #[arg(long)]
    vector: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    epsilon0: Option<f64>,
    #[arg(long)]
    epsilon_m: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// `auto` or `Q/F`.
    #[arg(long)]
    format: Option<FormatChoice>,
    /// optimal | frobenius1 | frobenius2 | a positive number
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gap: Option<f64>,
    /// Spectrum bracket as `LO,HI`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    bounds: Option<Vec<f64>>,
    /// Observable such as `0.5*XZ,ZZ`; repeat for several.
    #[arg(long)]
    observable: Vec<String>,
    #[arg(long)]
    observable_spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<MeasureMode>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// `.csv` for exact decimals, otherwise binary.
    #[arg(long)]
    state_out: Option<PathBuf>,
    #[arg(long)]
    history_csv: Option<PathBuf>,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.command = Some(cli.command);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(path) = cli.matrix {
        cfg.operator = Some(digiq::sparse::OperatorFamily::MatrixMarket {
            path: path.display().to_string(),
        });
    }
    if let Some(spec) = &cli.family {
        cfg.operator = Some(parse_family(spec, cfg.seed)?);
    }
    if let Some(v) = &cli.vector {
        cfg.vector = parse_vector(v)?;
    }
    let acc = &mut cfg.accuracy;
    acc.epsilon = cli.epsilon.unwrap_or(acc.epsilon);
    acc.epsilon0 = cli.epsilon0.unwrap_or(acc.epsilon0);
    acc.epsilon_m = cli.epsilon_m.unwrap_or(acc.epsilon_m);
    acc.delta = cli.delta.unwrap_or(acc.delta);
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(a) = &cli.alpha {
        cfg.solve.alpha = parse_alpha(a)?;
    }
    if let Some(m) = cli.max_iterations {
        cfg.solve.max_iterations = m;
    }
    cfg.t = cli.t.or(cfg.t);
    cfg.beta = cli.beta.or(cfg.beta);
    cfg.gap = cli.gap.or(cfg.gap);
    if let Some(b) = cli.bounds {
        cfg.bounds = Some([b[0], b[1]]);
    }
    if !cli.observable.is_empty() {
        cfg.observables = cli.observable;
    }
    cfg.observable_spec = cli.observable_spec.or(cfg.observable_spec);
    if let Some(m) = cli.mode {
        cfg.measure = m;
    }
    let out = &mut cfg.output;
    out.report = cli.report.or(out.report.take());
    out.state = cli.state_out.or(out.state.take());
    out.history_csv = cli.history_csv.or(out.history_csv.take());
    Ok(cfg)
}

fn parse_vector(s: &str) -> Result<VectorSource, CliError> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "uniform" => Ok(VectorSource::Uniform),
        "random" => Ok(VectorSource::Random),
        "basis" => arg
            .parse()
            .map(|index| VectorSource::Basis { index })
            .map_err(|e| CliError::Usage(format!("basis index '{arg}': {e}"))),
        "file" => Ok(VectorSource::File { path: arg.into() }),
        _ => Err(CliError::Usage(format!("unknown vector source '{s}'"))),
    }
}

fn parse_alpha(s: &str) -> Result<AlphaMode, CliError> {
    match s {
        "optimal" => Ok(AlphaMode::Optimal),
        "frobenius1" => Ok(AlphaMode::Frobenius1),
        "frobenius2" => Ok(AlphaMode::Frobenius2),
        x => x
            .parse()
            .map(AlphaMode::Explicit)
            .map_err(|_| CliError::Usage(format!("unknown alpha mode '{s}'"))),
    }
}

fn threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("DIGIQ_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("DIGIQ_THREADS='{v}' is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = threads().and_then(|_| resolve(cli)).and_then(|cfg| run(&cfg)).and_then(|o| {
        emit(&o)?;
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            if let Some(e) = &o.report.contract.error {
                eprintln!("digiq: {}: {}", e.kind, e.message);
            }
            ExitCode::from(o.report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("digiq: {e}");
            ExitCode::from(1)
        }
    }
}
