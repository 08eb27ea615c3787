use num_complex::Complex64;
use serde::Serialize;

use super::bessel::{bessel_coeffs, bessel_coeffs_dd, truncation_order};
use super::clenshaw::clenshaw_apply;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::sparse::{
    edge_color_decompose, rescale_affine, AffineRecord, QuantizedOperator, RescaleTarget, SparseOperator,
    SpectralEstimate,
};
use crate::state::DigitalState;

#[derive(Debug, Clone)]
pub struct ExpmJob<'a> {
    pub op: &'a SparseOperator,
    /// Bracket of the spectrum of `op`.
    pub bounds: SpectralEstimate,
    pub t: f64,
    /// Truncation tolerance on `sum_{k>r} 2 I_k(t_hat)`.
    pub epsilon0: f64,
    /// Working format; chosen from the expansion when `None`.
    pub format: Option<FixedPointFormat>,
}

/// `e^{-At} b = e^{log_prefactor} * state`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpmResult {
    #[serde(skip)]
    pub state: DigitalState,
    /// `-lambda_min t`. The bounded part `state` is `e^{-(A - lambda_min) t} b`.
    pub log_prefactor: f64,
    pub order: usize,
    pub rescaled_time: f64,
    pub tail_bound: f64,
    pub record: Option<AffineRecord>,
    pub format: FixedPointFormat,
    /// Bound on the 2-norm error of `state` (not of the full vector).
    pub state_error_bound: f64,
    pub products: u64,
}

impl ExpmResult {
    pub fn prefactor(&self) -> f64 {
        self.log_prefactor.exp()
    }

    /// Error bound on the full vector `e^{-At} b`.
    pub fn error_bound(&self) -> f64 {
        self.state_error_bound * self.prefactor()
    }

    /// `e^{-At} b` in double precision. Underflows for large `lambda_min t`.
    pub fn full_state(&self) -> Vec<Complex64> {
        let p = self.prefactor();
        self.state.to_c64().into_iter().map(|z| z * p).collect()
    }
}

/// A format whose rounding stays below the truncation error: fractional
/// bits cover `(r+1)^2 sqrt(N) / (eps0 e^{-t_hat})` with 8 guard bits, and
/// the integer part holds `2 (r+1) ||b||`.
pub fn expm_format(order: usize, t_hat: f64, epsilon0: f64, dim: usize, b_norm: f64) -> Result<FixedPointFormat> {
    if !(epsilon0 > 0.0) || !(t_hat >= 0.0) {
        return Err(Error::Domain(format!("need eps0 > 0 and t_hat >= 0, got {epsilon0}, {t_hat}")));
    }
    let r1 = (order + 1) as f64;
    let log2_target = epsilon0.log2() - t_hat * std::f64::consts::LOG2_E;
    let f = (2.0 * r1.log2() + 0.5 * (dim.max(1) as f64).log2() - log2_target).ceil() as u32 + 8;
    let int_bits = (2.0 * r1 * b_norm.max(1.0)).log2().ceil() as u32 + 1;
    let f = f.max(2).min(127 - int_bits);
    FixedPointFormat::new(f + int_bits + 1, f)
}

fn rounding_bound(order: usize, dim: usize, format: FixedPointFormat) -> f64 {
    let r1 = (order + 1) as f64;
    2.0 * r1 * r1 * (dim as f64).sqrt() * format.resolution()
}

pub fn expm_apply(job: &ExpmJob, b: &DigitalState) -> Result<ExpmResult> {
    validate(job)?;
    let (lo, hi) = (job.bounds.lambda_min_lower, job.bounds.lambda_max_upper);
    let b_norm = b.norm();
    if job.t == 0.0 || hi == lo {
        // e^{-At} = e^{-lo t} I on a one-point spectrum
        let state = match job.format {
            Some(f) => b.convert(f)?,
            None => b.clone(),
        };
        return Ok(ExpmResult {
            format: state.format(),
            products: state.product_count(),
            state,
            log_prefactor: if job.t == 0.0 { 0.0 } else { -lo * job.t },
            order: 0,
            rescaled_time: 0.0,
            tail_bound: 0.0,
            record: None,
            state_error_bound: 0.0,
        });
    }
    let record = AffineRecord::new(&job.bounds, RescaleTarget::Symmetric)?;
    // shift, scale and t_hat in double-double so that
    // e^{-(A_hat + 1) t_hat} is exactly e^{-(A - lo) t}
    let (lo_dd, hi_dd) = (Dd::new(lo), Dd::new(hi));
    let shift = (lo_dd + hi_dd).ldexp(-1);
    let scale = (hi_dd - lo_dd).ldexp(-1);
    let t_hat = scale * Dd::new(job.t);
    let order = truncation_order(t_hat.to_f64(), job.epsilon0)?;
    let coeffs = bessel_coeffs_dd(t_hat, order)?;
    let format = match job.format {
        Some(f) => f,
        None => expm_format(order, t_hat.to_f64(), job.epsilon0, job.op.dim(), b_norm)?,
    };
    let a_hat = QuantizedOperator::affine_from_decomposition(&edge_color_decompose(job.op)?, format, shift, scale)?;
    let b = b.convert(format)?;
    let state = clenshaw_apply(&coeffs.folded(), &a_hat, &b)?;
    let t_hat = t_hat.to_f64();
    Ok(ExpmResult {
        format,
        products: state.product_count(),
        state,
        log_prefactor: -lo * job.t,
        order,
        rescaled_time: t_hat,
        tail_bound: coeffs.tail_bound,
        record: Some(record),
        state_error_bound: (coeffs.tail_bound * b_norm) * (-t_hat).exp() + rounding_bound(order, b.dim(), format),
    })
}

fn validate(job: &ExpmJob) -> Result<()> {
    job.op.require_hermitian()?;
    if !(job.t >= 0.0 && job.t.is_finite()) {
        return Err(Error::Domain(format!("time {} must be finite and non-negative", job.t)));
    }
    if !(job.epsilon0 > 0.0) {
        return Err(Error::Domain(format!("epsilon0 {} must be positive", job.epsilon0)));
    }
    let (lo, hi) = (job.bounds.lambda_min_lower, job.bounds.lambda_max_upper);
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::Domain(format!("invalid spectrum bounds [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ShadowExpm {
    /// `e^{-(A - lambda_min) t} b`.
    pub state: Vec<Complex64>,
    pub log_prefactor: f64,
    pub order: usize,
}

/// Double-precision run of the same expansion.
pub fn expm_shadow(job: &ExpmJob, b: &[Complex64]) -> Result<ShadowExpm> {
    validate(job)?;
    let (lo, hi) = (job.bounds.lambda_min_lower, job.bounds.lambda_max_upper);
    if job.t == 0.0 || hi == lo {
        return Ok(ShadowExpm {
            state: b.to_vec(),
            log_prefactor: if job.t == 0.0 { 0.0 } else { -lo * job.t },
            order: 0,
        });
    }
    let rescaled = rescale_affine(job.op, &job.bounds, RescaleTarget::Symmetric)?;
    let t_hat = rescaled.record.time(job.t);
    let order = truncation_order(t_hat, job.epsilon0)?;
    let coeffs = bessel_coeffs(t_hat, order)?;
    let state = clenshaw_apply(&coeffs.folded(), &rescaled.op, &b.to_vec())?;
    Ok(ShadowExpm {
        state,
        log_prefactor: -lo * job.t,
        order,
    })
}
