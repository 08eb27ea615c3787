//! Spectral bounds, convergence scales, and affine spectrum rescaling.

use serde::{Deserialize, Serialize};

use super::SparseOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lambda_min_lower: f64,
    pub lambda_max_upper: f64,
    /// Upper bound on the condition number of `A^dagger A`; infinite when
    /// the bracketing interval contains zero.
    pub kappa_sq_upper: f64,
    /// Suggested Newton-Raphson scale `2 / (mu_min + mu_max)` over the
    /// bracketed spectrum of `A^dagger A`, when it is nonsingular.
    pub alpha: Option<f64>,
}

impl SpectralEstimate {
    pub fn from_interval(lambda_min_lower: f64, lambda_max_upper: f64) -> Self {
        let (lo, hi) = (lambda_min_lower, lambda_max_upper);
        let big = lo.abs().max(hi.abs());
        let small = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
        let (kappa_sq_upper, alpha) = if small > 0.0 {
            let k = big / small;
            (k * k, Some(2.0 / (small * small + big * big)))
        } else {
            (f64::INFINITY, None)
        };
        SpectralEstimate {
            lambda_min_lower,
            lambda_max_upper,
            kappa_sq_upper,
            alpha,
        }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min_lower && lambda <= self.lambda_max_upper
    }
}

/// Disk bounds: every eigenvalue lies in some `[A_jj - R_j, A_jj + R_j]`
/// with `R_j = sum_{l != j} |A_lj|`.
pub fn gershgorin_bounds(op: &SparseOperator) -> Result<SpectralEstimate> {
    op.require_hermitian()?;
    let n = op.dim();
    let mut radius = vec![0.0; n];
    for (l, row) in op.rows().iter().enumerate() {
        for &(j, v) in row {
            if j != l {
                radius[j] += v.norm();
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..n {
        let c = op.entry(j, j).re;
        lo = lo.min(c - radius[j]);
        hi = hi.max(c + radius[j]);
    }
    if n == 0 {
        lo = 0.0;
        hi = 0.0;
    }
    Ok(SpectralEstimate::from_interval(lo, hi))
}

/// The two Frobenius-type scales that guarantee Newton-Raphson convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    /// `1 / sum_jk |A_jk|^2`
    pub frobenius: f64,
    /// `1 / ((max_j sum_k |A_jk|) (max_k sum_j |A_jk|))`
    pub row_column: f64,
}

impl AlphaChoice {
    /// The larger of the two; both are valid.
    pub fn preferred(&self) -> f64 {
        self.frobenius.max(self.row_column)
    }
}

pub fn frobenius_alpha(op: &SparseOperator) -> Result<AlphaChoice> {
    if op.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let mut sum_sq = 0.0;
    let mut col_sums = vec![0.0; op.dim()];
    let mut max_row: f64 = 0.0;
    for row in op.rows() {
        let mut row_sum = 0.0;
        for &(l, v) in row {
            let a = v.norm();
            sum_sq += a * a;
            row_sum += a;
            col_sums[l] += a;
        }
        max_row = max_row.max(row_sum);
    }
    let max_col = col_sums.iter().cloned().fold(0.0, f64::max);
    Ok(AlphaChoice {
        frobenius: 1.0 / sum_sq,
        row_column: 1.0 / (max_row * max_col),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleTarget {
    /// `[0, 1]`
    Unit,
    /// `[-1, 1]`
    Symmetric,
}

/// `A_hat = (A - shift I) / scale`, so `e^{-A t} = e^{-shift t} e^{-A_hat (scale t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub target: RescaleTarget,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub shift: f64,
    pub scale: f64,
}

impl AffineRecord {
    pub fn new(bounds: &SpectralEstimate, target: RescaleTarget) -> Result<Self> {
        let (lo, hi) = (bounds.lambda_min_lower, bounds.lambda_max_upper);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::Domain(format!("invalid spectrum bounds [{lo}, {hi}]")));
        }
        if hi == lo {
            return Err(Error::DegenerateSpectrumBounds { value: lo });
        }
        let (shift, scale) = match target {
            RescaleTarget::Unit => (lo, hi - lo),
            RescaleTarget::Symmetric => ((hi + lo) / 2.0, (hi - lo) / 2.0),
        };
        Ok(AffineRecord {
            target,
            lambda_min: lo,
            lambda_max: hi,
            shift,
            scale,
        })
    }

    /// Time in the rescaled problem.
    pub fn time(&self, t: f64) -> f64 {
        t * self.scale
    }

    /// `ln` of the scalar prefactor `e^{-shift t}`.
    pub fn log_prefactor(&self, t: f64) -> f64 {
        -self.shift * t
    }

    pub fn prefactor(&self, t: f64) -> f64 {
        self.log_prefactor(t).exp()
    }

    /// Map a rescaled eigenvalue back.
    pub fn undo(&self, lambda_hat: f64) -> f64 {
        lambda_hat * self.scale + self.shift
    }
}

#[derive(Debug, Clone)]
pub struct RescaledOperator {
    pub op: SparseOperator,
    pub record: AffineRecord,
}

pub fn rescale_affine(
    op: &SparseOperator,
    bounds: &SpectralEstimate,
    target: RescaleTarget,
) -> Result<RescaledOperator> {
    let record = AffineRecord::new(bounds, target)?;
    Ok(RescaledOperator {
        op: op.affine(1.0 / record.scale, -record.shift / record.scale),
        record,
    })
}
