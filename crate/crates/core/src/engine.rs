//! Vector and operator abstractions shared by the iterative drivers.
//!
//! The Newton-Raphson and Clenshaw drivers are written once against these
//! traits and run either on fixed-point [`DigitalState`]s with a
//! [`QuantizedOperator`], or on plain `Vec<Complex64>` with a
//! [`SparseOperator`] as the double-precision shadow.

use num_complex::Complex64;

use crate::dd::DdComplex;
use crate::error::{Error, Result};
use crate::sparse::{QuantizedOperator, SparseOperator};
use crate::state::DigitalState;

pub trait VectorSpace: Sized + Clone {
    /// `sum_i c_i v_i`.
    fn combine(terms: &[(DdComplex, &Self)]) -> Result<Self>;
    fn norm(&self) -> f64;
}

pub trait LinearMap<V> {
    fn apply(&self, v: &V) -> Result<V>;
}

impl VectorSpace for DigitalState {
    fn combine(terms: &[(DdComplex, &Self)]) -> Result<Self> {
        DigitalState::combine(terms)
    }

    fn norm(&self) -> f64 {
        DigitalState::norm(self)
    }
}

impl LinearMap<DigitalState> for QuantizedOperator {
    fn apply(&self, v: &DigitalState) -> Result<DigitalState> {
        QuantizedOperator::apply(self, v)
    }
}

impl VectorSpace for Vec<Complex64> {
    fn combine(terms: &[(DdComplex, &Self)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Domain("empty linear combination".into()))?
            .1;
        let mut out = vec![Complex64::default(); first.len()];
        for (c, v) in terms {
            if v.len() != out.len() {
                return Err(Error::DimensionMismatch {
                    expected: out.len(),
                    found: v.len(),
                });
            }
            let c = c.to_c64();
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    fn norm(&self) -> f64 {
        crate::dense::norm(self)
    }
}

impl LinearMap<Vec<Complex64>> for SparseOperator {
    fn apply(&self, v: &Vec<Complex64>) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(self.mul_vec(v))
    }
}
