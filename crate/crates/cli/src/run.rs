//! Subcommand dispatch.

use std::time::Instant;

use digiq::cheb::{bessel_coeffs, expm_apply, ExpmJob};
use digiq::inverse::{inverse_apply, InverseJob};
use digiq::nr::{self, AlphaMode, NrConfig};
use digiq::pauli::{operator_expectation, ChernoffPlan, MeasureMode as CoreMode};
use digiq::pauli::{pauli_decompose, KLocalSpec, PauliSum};
use digiq::phys::{
    expectation_ratio, ground_state_project, spectral_bracket, thermal_ratio, GroundStateJob, ThermalJob,
};
use digiq::sparse::{edge_color_decompose, Block, SpectralEstimate, SparseOperator};
use digiq::state::index_bits_for;
use digiq::{DigitalState, Error, FixedPointFormat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{parse_observable, Command, MeasureMode, RunConfig, VectorSource};
use crate::report::{ErrorInfo, OperatorSummary, Report};
use crate::CliError;

/// Input registers when the format is chosen downstream.
const WIDE_INPUT: (u32, u32) = (128, 96);

/// A finished run: the report and the state the command produced, if any.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub state: Option<DigitalState>,
}

/// Run `config.command`. Numeric failures come back as a report whose
/// contract is unsatisfied; usage and I/O problems are errors.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let command = config
        .command
        .ok_or_else(|| CliError::Usage("no subcommand given".into()))?;
    let start = Instant::now();
    let mut report = Report::new(command.name(), config);
    let state = match dispatch(command, config, &mut report) {
        Ok(state) => state,
        Err(e) if is_numeric(&e) => {
            if let Error::MaxIterationsExceeded { residuals, .. } = &e {
                report.history("residual", residuals.clone());
            }
            report.contract.satisfied = false;
            report.contract.detail = "numeric contract failed".into();
            report.contract.error = Some(ErrorInfo {
                kind: error_kind(&e).into(),
                message: e.to_string(),
            });
            None
        }
        Err(e) => return Err(e.into()),
    };
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutcome { report, state })
}

/// Failures of the numerical contract, as opposed to bad input.
fn is_numeric(e: &Error) -> bool {
    matches!(
        e,
        Error::Overflow { .. }
            | Error::ZeroMatrix
            | Error::DegenerateSpectrumBounds { .. }
            | Error::NotHermitian { .. }
            | Error::NonHermitianBlock { .. }
            | Error::UnnormalizedState { .. }
            | Error::MaxIterationsExceeded { .. }
            | Error::SingularOperator { .. }
            | Error::NotPositiveDefinite(_)
            | Error::DivisionByNegligible { .. }
    )
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Overflow { .. } => "overflow",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::InvalidFormat(_) => "invalid_format",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::ZeroMatrix => "zero_matrix",
        Error::DegenerateSpectrumBounds { .. } => "degenerate_spectrum_bounds",
        Error::Domain(_) => "domain",
        Error::NonHermitianBlock { .. } => "non_hermitian_block",
        Error::UnnormalizedState { .. } => "unnormalized_state",
        Error::MaxIterationsExceeded { .. } => "max_iterations_exceeded",
        Error::SingularOperator { .. } => "singular_operator",
        Error::NotPositiveDefinite(_) => "not_positive_definite",
        Error::DivisionByNegligible { .. } => "division_by_negligible",
        Error::DimensionTooLarge { .. } => "dimension_too_large",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
    }
}

type Step = Result<Option<DigitalState>, Error>;

fn dispatch(command: Command, cfg: &RunConfig, report: &mut Report) -> Step {
    match command {
        Command::Solve => solve(cfg, report),
        Command::Expm => expm(cfg, report),
        Command::InverseExp => inverse_exp(cfg, report),
        Command::Measure => measure(cfg, report),
        Command::Groundstate => groundstate(cfg, report),
        Command::Thermal => thermal(cfg, report),
        Command::Decompose => decompose(cfg, report),
    }
}

fn operator(cfg: &RunConfig, report: &mut Report) -> Result<SparseOperator, Error> {
    let family = cfg
        .operator
        .as_ref()
        .ok_or_else(|| Error::Domain("no operator source: give --family, --matrix or an [operator] table".into()))?;
    let op = family.build()?;
    report.operator = Some(OperatorSummary::of(&op));
    Ok(op)
}

/// The configured vector, zero-padded to `2^n` entries.
fn vector(cfg: &RunConfig, logical_dim: usize) -> Result<Vec<Complex64>, Error> {
    let dim = 1usize << index_bits_for(logical_dim);
    let normalize = |mut v: Vec<Complex64>| {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        v.resize(dim, Complex64::default());
        v
    };
    let v = match &cfg.vector {
        VectorSource::Uniform => normalize(vec![Complex64::new(1.0, 0.0); logical_dim]),
        VectorSource::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            normalize(
                (0..logical_dim)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        }
        VectorSource::Basis { index } => {
            if *index >= logical_dim {
                return Err(Error::IndexOutOfRange {
                    index: *index,
                    dim: logical_dim,
                });
            }
            let mut v = vec![Complex64::default(); dim];
            v[*index] = Complex64::new(1.0, 0.0);
            v
        }
        VectorSource::Values { re, im } => {
            if re.len() > logical_dim || im.len() > re.len() {
                return Err(Error::DimensionMismatch {
                    expected: logical_dim,
                    found: re.len().max(im.len()),
                });
            }
            let mut v: Vec<Complex64> = re
                .iter()
                .enumerate()
                .map(|(j, &x)| Complex64::new(x, im.get(j).copied().unwrap_or(0.0)))
                .collect();
            v.resize(dim, Complex64::default());
            v
        }
        VectorSource::File { path } => {
            let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let s = DigitalState::read_binary(std::io::BufReader::new(file))?;
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            s.to_c64()
        }
    };
    Ok(v)
}

fn input_format(cfg: &RunConfig) -> FixedPointFormat {
    cfg.format
        .explicit()
        .unwrap_or_else(|| FixedPointFormat::new(WIDE_INPUT.0, WIDE_INPUT.1).expect("valid format"))
}

fn bounds(cfg: &RunConfig) -> Option<SpectralEstimate> {
    cfg.bounds.map(|[lo, hi]| SpectralEstimate::from_interval(lo, hi))
}

fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::Domain(format!("{name} is required for this command")))
}

fn observables(cfg: &RunConfig, frac_bits: u32, report: &mut Report) -> Result<Vec<(String, PauliSum)>, Error> {
    let mut out = Vec::new();
    for spec in &cfg.observables {
        let o = parse_observable(spec).map_err(|e| Error::Domain(e.to_string()))?;
        out.push((spec.clone(), o));
    }
    if let Some(path) = &cfg.observable_spec {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let spec: KLocalSpec = toml::from_str(&text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            message: format!("{}: {}", path.display(), e.message()),
        })?;
        let o = pauli_decompose(&spec, frac_bits)?;
        report.derive(
            "pauli_terms",
            o.term_count(),
            "nonzero tensor-Pauli coefficients Tr(P M)/2^s of the clusters, pruned below 2^-f",
            &[
                ("locality", json!(spec.locality())),
                ("bound_4_pow_k", json!(4f64.powi(spec.locality() as i32))),
                ("frac_bits", json!(frac_bits)),
            ],
        );
        out.push((path.display().to_string(), o));
    }
    if out.is_empty() {
        return Err(Error::Domain("no observables given".into()));
    }
    Ok(out)
}

fn format_value(f: FixedPointFormat) -> Value {
    json!({ "q_total": f.q_total(), "frac_bits": f.frac_bits() })
}

fn solve(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    let b = vector(cfg, op.dim())?;
    let b_norm = digiq::dense::norm(&b);
    let mut nr_cfg = NrConfig {
        alpha_mode: cfg.solve.alpha,
        epsilon: cfg.accuracy.epsilon,
        max_iterations: cfg.solve.max_iterations,
        format: FixedPointFormat::default(),
        kappa: None,
    };
    let plan = nr::plan(&op, b_norm, &nr_cfg)?;
    let alpha_formula = match cfg.solve.alpha {
        AlphaMode::Optimal if plan.gram_bounds.is_some() => "2 / (mu_min + mu_max) over the spectrum of A^dagger A",
        AlphaMode::Optimal | AlphaMode::Frobenius2 => "1 / (max row sum * max column sum)",
        AlphaMode::Frobenius1 => "1 / sum |A_jk|^2",
        AlphaMode::Explicit(_) => "given",
    };
    report.derive(
        "alpha",
        plan.alpha,
        alpha_formula,
        &[("alpha_mode", json!(cfg.solve.alpha)), ("gram_bounds", json!(plan.gram_bounds))],
    );
    report.derive(
        "contraction",
        plan.contraction,
        "max(|1 - alpha mu_min|, |1 - alpha mu_max|)",
        &[("alpha", json!(plan.alpha)), ("gram_bounds", json!(plan.gram_bounds))],
    );
    report.derive(
        "r",
        plan.a_priori_iterations,
        "max(1, ceil(ln(1/epsilon) / ln(1/contraction)))",
        &[("contraction", json!(plan.contraction)), ("epsilon", json!(nr_cfg.epsilon))],
    );
    report.derive(
        "residual_tolerance",
        plan.residual_tolerance,
        "epsilon |b| / kappa",
        &[
            ("epsilon", json!(nr_cfg.epsilon)),
            ("b_norm", json!(b_norm)),
            ("kappa", json!(plan.kappa)),
        ],
    );
    nr_cfg.format = match cfg.format.explicit() {
        Some(f) => f,
        None => {
            let f = nr::auto_format(&op, &b, &nr_cfg)?;
            let (lo, hi) = plan.gram_bounds.unwrap_or((1.0, 1.0));
            report.derive(
                "format",
                format_value(f),
                "frac_bits = ceil(log2(d r |A| / (kappa epsilon |b|))) + 8; integer bits cover max(|b|/sigma_min, |A|, alpha |A|, 1) with 2 spare",
                &[
                    ("d", json!(op.sparsity().max(1))),
                    ("r", json!(plan.a_priori_iterations.unwrap_or(1))),
                    ("epsilon", json!(nr_cfg.epsilon)),
                    ("kappa", json!(plan.kappa)),
                    ("a_norm", json!(hi.sqrt())),
                    ("sigma_min", json!(lo.sqrt())),
                    ("b_norm", json!(b_norm)),
                ],
            );
            f
        }
    };
    let bs = DigitalState::from_c64(&b, nr_cfg.format)?;
    let res = nr::solve(&op, &bs, &nr_cfg)?;
    let last = res.residual_history.last().copied().unwrap_or(b_norm);
    report.set("iterations", res.iterations);
    report.set("stop", res.stop);
    report.set("final_residual", last);
    report.set("fractional_residual", last / b_norm);
    report.set("contraction_estimate", res.contraction_estimate);
    report.set("solution_norm", res.solution.norm());
    report.set("format", format_value(res.solution.format()));
    report.set("products", res.solution.product_count());
    report.set("error_bound", json!({ "fractional": nr_cfg.epsilon }));
    report.history("residual", res.residual_history);
    report.contract.satisfied = true;
    report.contract.detail = match res.stop {
        nr::StopReason::Residual => "residual below epsilon |b| / kappa".into(),
        nr::StopReason::APriori => "a-priori iteration count reached".into(),
    };
    Ok(Some(res.solution))
}

fn expm(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    let t = require(cfg.t, "t")?;
    let b = vector(cfg, op.dim())?;
    let (est, source) = spectral_bracket(&op, bounds(cfg))?;
    report.set("bounds", est);
    report.set("bounds_source", source);
    let bs = DigitalState::from_c64(&b, input_format(cfg))?;
    let res = expm_apply(
        &ExpmJob {
            op: &op,
            bounds: est,
            t,
            epsilon0: cfg.accuracy.epsilon0,
            format: cfg.format.explicit(),
        },
        &bs,
    )?;
    let (lo, hi) = (est.lambda_min_lower, est.lambda_max_upper);
    report.derive(
        "rescaled_time",
        res.rescaled_time,
        "t (lambda_max - lambda_min) / 2",
        &[("t", json!(t)), ("lambda_min", json!(lo)), ("lambda_max", json!(hi))],
    );
    report.derive(
        "r",
        res.order,
        "smallest order from ceil(e^(5/4) t_hat / 2 + ln(1/epsilon0)) whose Bessel tail bound is below epsilon0",
        &[("t_hat", json!(res.rescaled_time)), ("epsilon0", json!(cfg.accuracy.epsilon0))],
    );
    report.derive(
        "log_prefactor",
        res.log_prefactor,
        "-lambda_min t",
        &[("lambda_min", json!(lo)), ("t", json!(t))],
    );
    report.derive(
        "format",
        format_value(res.format),
        match cfg.format {
            crate::config::FormatChoice::Auto => {
                "frac_bits = ceil(2 log2(r+1) + log2(N)/2 - log2(epsilon0 e^(-t_hat))) + 8, capped at 127 - int_bits; int_bits = ceil(log2(2 (r+1) max(|b|, 1))) + 1"
            }
            crate::config::FormatChoice::Explicit(_) => "given",
        },
        &[
            ("r", json!(res.order)),
            ("t_hat", json!(res.rescaled_time)),
            ("epsilon0", json!(cfg.accuracy.epsilon0)),
            ("dim", json!(bs.dim())),
            ("b_norm", json!(bs.norm())),
        ],
    );
    report.set("tail_bound", res.tail_bound);
    report.set("prefactor", res.prefactor());
    report.set("state_error_bound", res.state_error_bound);
    report.set("error_bound", res.error_bound());
    report.set("state_norm", res.state.norm());
    report.set("products", res.products);
    if res.order > 0 {
        let c = bessel_coeffs(res.rescaled_time, res.order)?;
        report.history("scaled_chebyshev_coefficient", c.folded().iter().map(|x| x.to_f64()).collect());
    }
    report.contract.satisfied = true;
    report.contract.detail = "state holds e^{-(A - lambda_min) t} b; multiply by prefactor for e^{-A t} b".into();
    Ok(Some(res.state))
}

fn inverse_exp(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    let b = vector(cfg, op.dim())?;
    let bs = DigitalState::from_c64(&b, input_format(cfg))?;
    let res = inverse_apply(
        &InverseJob {
            op: &op,
            epsilon: cfg.accuracy.epsilon,
            bounds: bounds(cfg),
            format: cfg.format.explicit(),
        },
        &bs,
    )?;
    let g = res.grid;
    let grid_inputs = [("epsilon", json!(g.epsilon)), ("kappa", json!(g.kappa))];
    report.derive(
        "kappa",
        g.kappa,
        "1 / lambda_min for a spectrum in [1/kappa, 1]",
        &[("lambda_min", json!(res.bounds.lambda_min_lower))],
    );
    report.derive("n_disc", g.n_disc, "discretization count for epsilon and kappa", &grid_inputs);
    report.derive("h", g.h, "quadrature step for epsilon and kappa", &grid_inputs);
    report.derive("p", g.p, "lowest quadrature index", &grid_inputs);
    report.derive("p_prime", g.p_prime, "highest quadrature index", &grid_inputs);
    report.derive(
        "epsilon0_term",
        res.epsilon0_term,
        "min(kappa epsilon / (p' - p + 1), epsilon / sum_j w_j e^(-shift t_j))",
        &[
            ("epsilon", json!(g.epsilon)),
            ("kappa", json!(g.kappa)),
            ("terms", json!(g.len())),
        ],
    );
    report.derive(
        "r_tot",
        res.r_tot,
        "sum of Chebyshev orders over evaluated terms",
        &[("terms", json!(res.terms.iter().filter(|t| !t.skipped).count()))],
    );
    report.derive(
        "format",
        format_value(res.format),
        match cfg.format {
            crate::config::FormatChoice::Auto => {
                "frac_bits = ceil(log2(2 (r+1)^2 sqrt(N) (kappa + terms) / epsilon)) + 8; int_bits = ceil(log2 max(2 (r+1) |b|, kappa |b|)) + 2"
            }
            crate::config::FormatChoice::Explicit(_) => "given",
        },
        &[
            ("r", json!(res.terms.iter().map(|t| t.order).max().unwrap_or(0))),
            ("terms", json!(g.len())),
            ("dim", json!(bs.dim())),
            ("kappa", json!(g.kappa)),
            ("epsilon", json!(g.epsilon)),
            ("b_norm", json!(bs.norm())),
        ],
    );
    report.set("bounds", res.bounds);
    report.set("skipped_mass", res.skipped_mass);
    report.set("skipped_terms", res.terms.iter().filter(|t| t.skipped).count());
    report.set("fractional_error_bound", res.fractional_error_bound);
    report.set("solution_norm", res.solution.norm());
    report.set(
        "order_histogram",
        res.order_histogram()
            .into_iter()
            .map(|(bucket, count)| json!({ "order_from": bucket, "count": count }))
            .collect::<Vec<_>>(),
    );
    report.history("term_j", res.terms.iter().map(|t| t.j as f64).collect());
    report.history("term_t", res.terms.iter().map(|t| t.t).collect());
    report.history("term_weight", res.terms.iter().map(|t| t.weight).collect());
    report.history("term_order", res.terms.iter().map(|t| t.order as f64).collect());
    report.contract.satisfied = true;
    report.contract.detail = "solution within the fractional error bound of A^-1 b".into();
    Ok(Some(res.solution))
}

fn measure(cfg: &RunConfig, report: &mut Report) -> Step {
    let (logical, state) = match (&cfg.vector, &cfg.operator) {
        (VectorSource::File { .. }, _) | (_, None) => {
            let v = vector_for_sites(cfg)?;
            (v.len(), v)
        }
        (_, Some(_)) => {
            let op = operator(cfg, report)?;
            (op.dim(), vector(cfg, op.dim())?)
        }
    };
    let fmt = input_format_for_measure(cfg);
    let s = DigitalState::from_c64(&state, fmt)?;
    let mode = match cfg.measure {
        MeasureMode::Exact => CoreMode::Exact,
        MeasureMode::Sampled => {
            let plan = ChernoffPlan::new(cfg.accuracy.delta, 1.0, cfg.accuracy.epsilon_m)?;
            report.derive(
                "m",
                plan.trials,
                "ceil(ln(2/epsilon_m) (8 p + 2 delta) / delta^2)",
                &[
                    ("delta", json!(plan.delta)),
                    ("p_bound", json!(plan.p_bound)),
                    ("epsilon_m", json!(plan.epsilon_m)),
                ],
            );
            CoreMode::Sampled { plan, seed: cfg.seed }
        }
    };
    report.set("dim", logical);
    let mut values = Vec::new();
    for (name, o) in observables(cfg, fmt.frac_bits(), report)? {
        let r = operator_expectation(&s, &o, mode)?;
        values.push(json!({
            "observable": name,
            "K": o.term_count(),
            "value": r.value,
            "error_bound": r.error_bound,
            "per_term_accuracy": r.per_term_accuracy,
            "terms": r.terms,
        }));
    }
    report.set("expectations", values);
    report.contract.satisfied = true;
    report.contract.detail = match mode {
        CoreMode::Exact => "exact digital expectations within k 2^(-f+2) per term".into(),
        CoreMode::Sampled { .. } => "each term within delta except with probability epsilon_m".into(),
    };
    Ok(None)
}

/// Without an operator, the state size follows the observables.
fn vector_for_sites(cfg: &RunConfig) -> Result<Vec<Complex64>, Error> {
    if let VectorSource::File { path } = &cfg.vector {
        // the dump carries its own size
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        return Ok(DigitalState::read_binary(std::io::BufReader::new(file))?.to_c64());
    }
    let n = match cfg.observables.first() {
        Some(spec) => parse_observable(spec).map_err(|e| Error::Domain(e.to_string()))?.n_sites,
        None => match &cfg.observable_spec {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let spec: KLocalSpec = toml::from_str(&text).map_err(|e| Error::Parse {
                    line: 0,
                    message: e.to_string(),
                })?;
                spec.n_sites
            }
            None => return Err(Error::Domain("no observables given".into())),
        },
    };
    vector(cfg, 1usize << n)
}

fn input_format_for_measure(cfg: &RunConfig) -> FixedPointFormat {
    cfg.format.explicit().unwrap_or_default()
}

fn groundstate(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    let t = require(cfg.t, "t")?;
    let b = vector(cfg, op.dim())?;
    let ansatz = DigitalState::from_c64(&b, input_format(cfg))?;
    let (state, diag) = ground_state_project(&GroundStateJob {
        hamiltonian: &op,
        ansatz,
        time: t,
        epsilon: cfg.accuracy.epsilon0,
        gap: cfg.gap,
        bounds: bounds(cfg),
        format: cfg.format.explicit(),
    })?;
    report.derive(
        "r",
        diag.order,
        "Chebyshev order for t_hat = T (lambda_max - lambda_min) / 2 at epsilon0",
        &[
            ("T", json!(t)),
            ("lambda_min", json!(diag.bounds.lambda_min_lower)),
            ("lambda_max", json!(diag.bounds.lambda_max_upper)),
            ("epsilon0", json!(cfg.accuracy.epsilon0)),
        ],
    );
    report.derive(
        "contamination_bound",
        diag.contamination_bound,
        "e^(-gap T)",
        &[("gap", json!(diag.gap)), ("T", json!(t))],
    );
    report.set("diagnostics", &diag);
    if !cfg.observables.is_empty() || cfg.observable_spec.is_some() {
        let mut values = Vec::new();
        for (name, o) in observables(cfg, state.format().frac_bits(), report)? {
            values.push(json!({ "observable": name, "ratio": expectation_ratio(&state, &o, None)? }));
        }
        report.set("ratios", values);
    }
    report.contract.satisfied = true;
    report.contract.detail = "unnormalized e^{-(H - lambda_min) T} psi; ratios are normalization-free".into();
    Ok(Some(state))
}

fn thermal(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    let beta = require(cfg.beta, "beta")?;
    let frac_bits = cfg.format.explicit().map(|f| f.frac_bits()).unwrap_or(48);
    let mut values = Vec::new();
    for (name, o) in observables(cfg, frac_bits, report)? {
        let r = thermal_ratio(&ThermalJob {
            hamiltonian: &op,
            beta,
            observable: o,
            epsilon: cfg.accuracy.epsilon0,
            bounds: bounds(cfg),
            format: cfg.format.explicit(),
        })?;
        values.push(json!({ "observable": name, "report": r }));
    }
    report.set("thermal", values);
    report.contract.satisfied = true;
    report.contract.detail = "exact basis sweep of Tr(e^{-beta H/2} O e^{-beta H/2}) / Tr(e^{-beta H})".into();
    Ok(None)
}

fn decompose(cfg: &RunConfig, report: &mut Report) -> Step {
    let op = operator(cfg, report)?;
    op.require_hermitian()?;
    let dec = edge_color_decompose(&op)?;
    let bound = (2 * dec.sparsity).saturating_sub(1).max(1);
    report.derive(
        "parts_bound",
        bound,
        "2 d - 1",
        &[("d", json!(dec.sparsity))],
    );
    report.set("parts", dec.part_count());
    report.set("block_diagonal", dec.parts_are_block_diagonal());
    if op.dim() <= digiq::dense::DESK_SCALE_LIMIT {
        report.set("exact_reconstruction", dec.to_dense() == op.to_dense());
    }
    let summary: Vec<Value> = dec
        .parts
        .iter()
        .map(|p| {
            let pairs = p.blocks.iter().filter(|b| matches!(b, Block::Block2 { .. })).count();
            json!({ "color": p.color, "pairs": pairs, "singles": p.blocks.len() - pairs })
        })
        .collect();
    report.set("part_summary", summary);
    report.contract.satisfied = dec.part_count() <= bound && dec.parts_are_block_diagonal();
    report.contract.detail = format!("{} parts, bound {bound}", dec.part_count());
    Ok(None)
}
