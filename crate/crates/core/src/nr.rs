//! Newton-Raphson solution of `A x = b`.
//!
//! With `B_0 = alpha A^dagger` the iteration `x_{r+1} = x_r + B_0 (b - A x_r)`
//! contracts the error by `||I - alpha A^dagger A||` per step for any
//! nonsingular `A`, Hermitian positive definite or not. Each step costs
//! two sparse products.
//!
//! Iterates are counted from `x = 0`: the first step produces
//! `x_0 = alpha A^dagger b`, so after `s` steps the error is at most
//! `c^s ||x*||` for contraction `c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::DdComplex;
use crate::dense::{self, DESK_SCALE_LIMIT};
use crate::engine::{LinearMap, VectorSpace};
use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::sparse::{frobenius_alpha, QuantizedOperator, SparseOperator};
use crate::state::DigitalState;

/// Guard bits added to [`register_width`].
pub const GUARD_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum AlphaMode {
    /// `2 / (mu_min + mu_max)` over the spectrum of `A^dagger A`; falls back
    /// to `Frobenius2` above desk scale.
    Optimal,
    /// `1 / sum |A_jk|^2`
    Frobenius1,
    /// `1 / (max row sum * max column sum)`
    Frobenius2,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NrConfig {
    pub alpha_mode: AlphaMode,
    /// Target fractional accuracy `||x - x*|| / ||x*||`.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub format: FixedPointFormat,
    /// Known bound on the condition number of `A`; overrides the dense
    /// estimate when given.
    pub kappa: Option<f64>,
}

impl Default for NrConfig {
    fn default() -> Self {
        NrConfig {
            alpha_mode: AlphaMode::Optimal,
            epsilon: 1e-6,
            max_iterations: 1_000_000,
            format: FixedPointFormat::default(),
            kappa: None,
        }
    }
}

/// `ceil(ln(1/eps) / ln(1/c))`; zero for `c = 0`.
pub fn iteration_count(contraction: f64, epsilon: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&contraction) {
        return Err(Error::Domain(format!("contraction {contraction} outside [0, 1)")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must be positive")));
    }
    if contraction == 0.0 || epsilon >= 1.0 {
        return Ok(0);
    }
    Ok(((1.0 / epsilon).ln() / (1.0 / contraction).ln()).ceil() as usize)
}

/// Contraction of the optimal scale for condition number `kappa` of `A`.
pub fn contraction_from_kappa(kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    (k2 - 1.0) / (k2 + 1.0)
}

/// Fraction bits keeping round-off below the target:
/// `ceil(log2(d r ||A|| / (kappa eps ||b||))) + GUARD_BITS`, floored at the guard.
pub fn register_width(d: usize, r: usize, epsilon: f64, kappa: f64, a_norm: f64, b_norm: f64) -> Result<u32> {
    let args = [d as f64, r as f64, epsilon, kappa, a_norm, b_norm];
    if args.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!(
            "register_width needs positive finite arguments, got d={d} r={r} eps={epsilon} kappa={kappa} |A|={a_norm} |b|={b_norm}"
        )));
    }
    let bits = (d as f64 * r as f64 * a_norm / (kappa * epsilon * b_norm)).log2().ceil();
    Ok(bits.max(0.0) as u32 + GUARD_BITS)
}

/// Spectral facts the solver derives before iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NrPlan {
    pub alpha: f64,
    /// Extreme eigenvalues of `A^dagger A`, when computed densely.
    pub gram_bounds: Option<(f64, f64)>,
    pub kappa: Option<f64>,
    /// `||I - alpha A^dagger A||` when it can be bounded.
    pub contraction: Option<f64>,
    /// Steps the a-priori analysis requires for `epsilon`.
    pub a_priori_iterations: Option<usize>,
    /// Absolute residual at which iteration stops early.
    pub residual_tolerance: f64,
}

pub fn plan(op: &SparseOperator, b_norm: f64, cfg: &NrConfig) -> Result<NrPlan> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon {} must be positive", cfg.epsilon)));
    }
    let alphas = frobenius_alpha(op)?;
    let gram_bounds = if op.dim() <= DESK_SCALE_LIMIT {
        Some(dense::gram_eigen_bounds(op)?)
    } else {
        None
    };
    if let Some((lo, hi)) = gram_bounds {
        if lo <= hi * 1e-24 {
            return Err(Error::SingularOperator {
                contraction: 1.0,
            });
        }
    }
    let alpha = match cfg.alpha_mode {
        AlphaMode::Optimal => match gram_bounds {
            Some((lo, hi)) => 2.0 / (lo + hi),
            None => alphas.row_column,
        },
        AlphaMode::Frobenius1 => alphas.frobenius,
        AlphaMode::Frobenius2 => alphas.row_column,
        AlphaMode::Explicit(a) if a > 0.0 => a,
        AlphaMode::Explicit(a) => return Err(Error::Domain(format!("explicit alpha {a} must be positive"))),
    };
    let kappa = cfg.kappa.or(gram_bounds.map(|(lo, hi)| (hi / lo).sqrt()));
    let contraction = gram_bounds.map(|(lo, hi)| (1.0 - alpha * lo).abs().max((1.0 - alpha * hi).abs()));
    if let Some(c) = contraction {
        if c >= 1.0 {
            return Err(Error::SingularOperator { contraction: c });
        }
    }
    let a_priori_iterations = contraction
        .map(|c| iteration_count(c, cfg.epsilon).map(|r| r.max(1)))
        .transpose()?;
    let residual_tolerance = cfg.epsilon * b_norm / kappa.unwrap_or(1.0);
    Ok(NrPlan {
        alpha,
        gram_bounds,
        kappa,
        contraction,
        a_priori_iterations,
        residual_tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `||b - A x|| <= eps ||b|| / kappa`
    Residual,
    /// The a-priori step count was reached.
    APriori,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NrResult {
    pub solution: DigitalState,
    pub iterations: usize,
    /// `||b - A x_s||` after every step.
    pub residual_history: Vec<f64>,
    pub contraction_estimate: f64,
    pub stop: StopReason,
    pub plan: NrPlan,
    pub register_width: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowResult {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub stop: StopReason,
}

fn contraction_estimate(history: &[f64]) -> f64 {
    match (history.first(), history.last()) {
        (Some(&first), Some(&last)) if history.len() > 1 && first > 0.0 => {
            (last / first).powf(1.0 / (history.len() - 1) as f64)
        }
        _ => 0.0,
    }
}

/// The shared driver. `observe` sees every iterate in order.
fn iterate<V, M, F>(
    a: &M,
    a_adj: &M,
    b: &V,
    plan: &NrPlan,
    max_iterations: usize,
    mut observe: F,
) -> Result<(V, Vec<f64>, StopReason)>
where
    V: VectorSpace,
    M: LinearMap<V>,
    F: FnMut(usize, &V),
{
    let alpha = DdComplex::from(plan.alpha);
    let one = DdComplex::ONE;
    let minus_one = DdComplex::from(-1.0);
    let stall_window = 64;

    let mut x = V::combine(&[(alpha, &a_adj.apply(b)?)])?;
    let mut history = Vec::new();
    loop {
        observe(history.len(), &x);
        let r = V::combine(&[(one, b), (minus_one, &a.apply(&x)?)])?;
        let res = r.norm();
        history.push(res);
        let steps = history.len();
        if res <= plan.residual_tolerance {
            return Ok((x, history, StopReason::Residual));
        }
        if plan.a_priori_iterations.is_some_and(|n| steps >= n) {
            return Ok((x, history, StopReason::APriori));
        }
        if steps >= max_iterations {
            return Err(Error::MaxIterationsExceeded {
                iterations: steps,
                last_residual: res,
                residuals: history,
            });
        }
        if plan.a_priori_iterations.is_none() && steps > stall_window {
            let before = history[steps - 1 - stall_window];
            if res >= before {
                return Err(Error::SingularOperator {
                    contraction: contraction_estimate(&history[steps - 1 - stall_window..]),
                });
            }
        }
        x = V::combine(&[(one, &x), (alpha, &a_adj.apply(&r)?)])?;
    }
}

/// Fixed-point solve in `b`'s register format.
pub fn solve(op: &SparseOperator, b: &DigitalState, cfg: &NrConfig) -> Result<NrResult> {
    solve_observed(op, b, cfg, |_, _| {})
}

pub fn solve_observed<F>(op: &SparseOperator, b: &DigitalState, cfg: &NrConfig, observe: F) -> Result<NrResult>
where
    F: FnMut(usize, &DigitalState),
{
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Err(Error::Domain("right-hand side is zero".into()));
    }
    let plan = plan(op, b_norm, cfg)?;
    let fmt = b.format();
    let a = QuantizedOperator::from_rows(op, fmt)?;
    let a_adj = QuantizedOperator::from_rows(&op.adjoint(), fmt)?;
    let (solution, residual_history, stop) = iterate(&a, &a_adj, b, &plan, cfg.max_iterations, observe)?;
    Ok(NrResult {
        solution,
        iterations: residual_history.len(),
        contraction_estimate: contraction_estimate(&residual_history),
        residual_history,
        stop,
        plan,
        register_width: fmt.frac_bits(),
    })
}

/// The same iteration in double precision.
pub fn solve_shadow(op: &SparseOperator, b: &[Complex64], cfg: &NrConfig) -> Result<ShadowResult> {
    solve_shadow_observed(op, b, cfg, |_, _| {})
}

pub fn solve_shadow_observed<F>(op: &SparseOperator, b: &[Complex64], cfg: &NrConfig, observe: F) -> Result<ShadowResult>
where
    F: FnMut(usize, &Vec<Complex64>),
{
    let b = b.to_vec();
    let b_norm = dense::norm(&b);
    if b_norm == 0.0 {
        return Err(Error::Domain("right-hand side is zero".into()));
    }
    let plan = plan(op, b_norm, cfg)?;
    let (solution, residual_history, stop) = iterate(op, &op.adjoint(), &b, &plan, cfg.max_iterations, observe)?;
    Ok(ShadowResult {
        solution,
        iterations: residual_history.len(),
        residual_history,
        stop,
    })
}

/// Register format sized by [`register_width`] for this system, with
/// integer bits for `||x*|| <= ||b|| / sigma_min`.
pub fn auto_format(op: &SparseOperator, b: &[Complex64], cfg: &NrConfig) -> Result<FixedPointFormat> {
    let b_norm = dense::norm(b);
    let plan = plan(op, b_norm, cfg)?;
    let (lo, hi) = plan
        .gram_bounds
        .ok_or_else(|| Error::Domain("auto format needs desk-scale spectral bounds".into()))?;
    let (sigma_min, a_norm) = (lo.sqrt(), hi.sqrt());
    let r = plan.a_priori_iterations.unwrap_or(1);
    let kappa = plan.kappa.unwrap_or(a_norm / sigma_min);
    let f = register_width(op.sparsity().max(1), r, cfg.epsilon, kappa, a_norm, b_norm)?;
    let largest = (b_norm / sigma_min).max(a_norm).max(plan.alpha * a_norm).max(1.0);
    let int_bits = largest.log2().ceil() as u32 + 2;
    FixedPointFormat::new((f + int_bits + 1).min(128), f)
}
