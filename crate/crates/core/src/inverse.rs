//! `A^{-1} b` for positive definite `A` as a quadrature of exponentials,
//!
//! ```text
//! 1/a ~ sum_{j=p}^{p'} h e^{jh} e^{-a e^{jh}},   a in [1/kappa, 1]
//! ```
//!
//! with each `e^{-A t_j} b` evaluated by the Chebyshev engine.

use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::{expm_apply, truncation_order, ExpmJob};
use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::sparse::{gershgorin_bounds, SparseOperator, SpectralEstimate};
use crate::state::DigitalState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub epsilon: f64,
    pub kappa: f64,
    pub n_disc: u32,
    pub h: f64,
    pub p: i64,
    pub p_prime: i64,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        (self.p_prime - self.p + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.p_prime < self.p
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.p..=self.p_prime
    }

    /// `t_j = e^{jh}`.
    pub fn node(&self, j: i64) -> f64 {
        (j as f64 * self.h).exp()
    }

    /// `w_j = h e^{jh}`.
    pub fn weight(&self, j: i64) -> f64 {
        self.h * self.node(j)
    }
}

pub fn discretization_params(epsilon: f64, kappa: f64) -> Result<QuadratureGrid> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa {kappa} must be finite and >= 1")));
    }
    let n_disc = (0.5 * (24.0 / epsilon).ln()).ceil() as u32;
    let m = (2 * n_disc + 1) as f64;
    let h = 2.0 * std::f64::consts::PI / (std::f64::consts::E.powi(2) * m * m);
    let log3 = (3.0 / epsilon).ln();
    Ok(QuadratureGrid {
        epsilon,
        kappa,
        n_disc,
        h,
        p: (-log3 / h).floor() as i64,
        p_prime: ((kappa * log3).ln() / h).ceil() as i64,
    })
}

/// `sum_j h e^{jh} e^{-a e^{jh}}`, an approximation of `1/a`.
pub fn scalar_inverse_check(a: f64, grid: &QuadratureGrid) -> Result<f64> {
    let slack = 1e-12;
    if !(a >= (1.0 - slack) / grid.kappa && a <= 1.0 + slack) {
        return Err(Error::Domain(format!("a = {a} outside [1/{}, 1]", grid.kappa)));
    }
    Ok(grid.indices().map(|j| grid.weight(j) * (-a * grid.node(j)).exp()).sum())
}

#[derive(Debug, Clone)]
pub struct InverseJob<'a> {
    pub op: &'a SparseOperator,
    pub epsilon: f64,
    /// Spectrum bracket; Gershgorin when `None`. Must lie in `(0, 1]`.
    pub bounds: Option<SpectralEstimate>,
    /// Working format; chosen from the grid when `None`.
    pub format: Option<FixedPointFormat>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TermRecord {
    pub j: i64,
    pub t: f64,
    pub weight: f64,
    /// Chebyshev order; zero for skipped terms.
    pub order: usize,
    pub skipped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseResult {
    #[serde(skip)]
    pub solution: DigitalState,
    pub grid: QuadratureGrid,
    pub bounds: SpectralEstimate,
    pub format: FixedPointFormat,
    /// Truncation tolerance given to each exponential.
    pub epsilon0_term: f64,
    pub terms: Vec<TermRecord>,
    /// `sum w_j e^{-lambda_min t_j} ||b||` over skipped terms.
    pub skipped_mass: f64,
    pub r_tot: usize,
    /// Bound on `||x - A^{-1} b|| / ||A^{-1} b||`.
    pub fractional_error_bound: f64,
}

impl InverseResult {
    /// Count of terms per Chebyshev order bucket `[2^i, 2^{i+1})`.
    pub fn order_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist = std::collections::BTreeMap::new();
        for t in self.terms.iter().filter(|t| !t.skipped) {
            let bucket = if t.order == 0 { 0 } else { 1usize << t.order.ilog2() };
            *hist.entry(bucket).or_insert(0) += 1;
        }
        hist.into_iter().collect()
    }
}

struct Plan {
    grid: QuadratureGrid,
    bounds: SpectralEstimate,
    epsilon0_term: f64,
    terms: Vec<TermRecord>,
    skipped_mass: f64,
    format: FixedPointFormat,
}

fn plan(job: &InverseJob, b_norm: f64) -> Result<Plan> {
    job.op.require_hermitian()?;
    let bounds = match job.bounds {
        Some(b) => b,
        None => gershgorin_bounds(job.op)?,
    };
    let (lo, hi) = (bounds.lambda_min_lower, bounds.lambda_max_upper);
    if !(lo > 0.0) || hi > 1.0 + 1e-9 {
        return Err(Error::NotPositiveDefinite(format!(
            "spectrum bracket [{lo}, {hi}] is not inside (0, 1]; rescale first"
        )));
    }
    let grid = discretization_params(job.epsilon, (1.0 / lo).max(1.0))?;
    let shift = (lo + hi) / 2.0;
    let scale = (hi - lo) / 2.0;
    // equal split of kappa * eps, tightened so the weighted sum of the
    // per-term contracts stays below eps ||b||
    let weighted: f64 = grid.indices().map(|j| grid.weight(j) * (-shift * grid.node(j)).exp()).sum();
    let epsilon0_term = (grid.kappa * grid.epsilon / grid.len() as f64).min(grid.epsilon / weighted);

    // skip test needs the resolution, which needs the largest order
    let order_of = |t: f64| truncation_order(scale * t, epsilon0_term);
    let mut max_order = 0;
    for j in grid.indices() {
        max_order = max_order.max(order_of(grid.node(j))?);
    }
    let format = match job.format {
        Some(f) => f,
        None => inverse_format(max_order, grid.len(), job.op.dim(), grid.kappa, grid.epsilon, b_norm)?,
    };
    let mut terms = Vec::with_capacity(grid.len());
    let mut skipped_mass = 0.0;
    for j in grid.indices() {
        let (t, weight) = (grid.node(j), grid.weight(j));
        let mass = weight * (-lo * t).exp() * b_norm;
        let skipped = mass < format.resolution();
        if skipped {
            skipped_mass += mass;
        }
        terms.push(TermRecord {
            j,
            t,
            weight,
            order: if skipped { 0 } else { order_of(t)? },
            skipped,
        });
    }
    Ok(Plan {
        grid,
        bounds,
        epsilon0_term,
        terms,
        skipped_mass,
        format,
    })
}

/// Rounding across all terms below `eps ||b||`: each term contributes at
/// most `2 (r+1)^2 sqrt(N) 2^-f` in its bounded part, weighted by
/// `w_j e^{-lambda_min t_j}`, which sums to about `kappa`.
pub fn inverse_format(
    max_order: usize,
    terms: usize,
    dim: usize,
    kappa: f64,
    epsilon: f64,
    b_norm: f64,
) -> Result<FixedPointFormat> {
    let r1 = (max_order + 1) as f64;
    let f = (2.0 * r1 * r1 * (dim.max(1) as f64).sqrt() * (kappa + terms as f64) / epsilon)
        .log2()
        .ceil() as u32
        + 8;
    let largest = (2.0 * r1 * b_norm.max(1.0)).max(kappa * b_norm);
    let int_bits = largest.log2().ceil() as u32 + 2;
    let f = f.min(127 - int_bits);
    FixedPointFormat::new(f + int_bits + 1, f)
}

pub fn inverse_apply(job: &InverseJob, b: &DigitalState) -> Result<InverseResult> {
    let b_norm = b.norm();
    let plan = plan(job, b_norm)?;
    let b = b.convert(plan.format)?;
    let active: Vec<&TermRecord> = plan.terms.iter().filter(|t| !t.skipped).collect();
    let evolved = active
        .par_iter()
        .map(|term| {
            let res = expm_apply(
                &ExpmJob {
                    op: job.op,
                    bounds: plan.bounds,
                    t: term.t,
                    epsilon0: plan.epsilon0_term,
                    format: Some(plan.format),
                },
                &b,
            )?;
            debug_assert_eq!(res.order, term.order);
            let c = Dd::new(term.weight) * Dd::new(res.log_prefactor).exp();
            Ok((DdComplex::real(c), res.state))
        })
        .collect::<Result<Vec<_>>>()?;
    let solution = if evolved.is_empty() {
        DigitalState::zeros(b.n(), plan.format)
    } else {
        let refs: Vec<(DdComplex, &DigitalState)> = evolved.iter().map(|(c, s)| (*c, s)).collect();
        DigitalState::combine(&refs)?
    };
    let r_tot = active.iter().map(|t| t.order).sum();
    // ||x|| >= ||b|| because the spectrum lies in (0, 1]
    let denom = b_norm.max(f64::MIN_POSITIVE);
    let fractional_error_bound = 2.0 * plan.grid.epsilon + plan.skipped_mass / denom;
    Ok(InverseResult {
        solution,
        grid: plan.grid,
        bounds: plan.bounds,
        format: plan.format,
        epsilon0_term: plan.epsilon0_term,
        terms: plan.terms,
        skipped_mass: plan.skipped_mass,
        r_tot,
        fractional_error_bound,
    })
}
