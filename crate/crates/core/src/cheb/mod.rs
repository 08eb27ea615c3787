//! `e^{-At} b` for Hermitian `A` by a Chebyshev expansion in modified
//! Bessel coefficients, evaluated with the Clenshaw recurrence.

mod bessel;
mod clenshaw;
mod expm;

pub use bessel::{bessel_coeffs, bessel_coeffs_dd, bessel_i_series, tail_bound, truncation_order, ChebCoefficients};
pub use clenshaw::{clenshaw_apply, forward_chebyshev_apply};
pub use expm::{expm_apply, expm_format, expm_shadow, ExpmJob, ExpmResult, ShadowExpm};
