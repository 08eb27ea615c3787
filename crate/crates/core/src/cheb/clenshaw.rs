//! Clenshaw evaluation of `sum_k c_k T_k(A) b`.

use crate::dd::{Dd, DdComplex};
use crate::engine::{LinearMap, VectorSpace};
use crate::error::{Error, Result};

fn real(x: Dd) -> DdComplex {
    DdComplex::real(x)
}

/// Backward recurrence `y_k = c_k b + 2 A y_{k+1} - y_{k+2}` from `y_r = c_r b`,
/// combined as `(c_0 b + y_0 - y_2) / 2`. Uses `r` products.
pub fn clenshaw_apply<V, M>(coeffs: &[Dd], a: &M, b: &V) -> Result<V>
where
    V: VectorSpace,
    M: LinearMap<V>,
{
    let r = coeffs
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::Domain("empty coefficient list".into()))?;
    let two = real(Dd::new(2.0));
    let minus_one = real(Dd::new(-1.0));
    let half = real(Dd::new(0.5));
    let minus_half = real(Dd::new(-0.5));

    // (y_{k+1}, y_{k+2})
    let mut y1 = V::combine(&[(real(coeffs[r]), b)])?;
    let mut y2: Option<V> = None;
    for k in (0..r).rev() {
        let ay = a.apply(&y1)?;
        let next = match &y2 {
            Some(y2) => V::combine(&[(real(coeffs[k]), b), (two, &ay), (minus_one, y2)])?,
            None => V::combine(&[(real(coeffs[k]), b), (two, &ay)])?,
        };
        if k == 0 {
            // y1 = y_1, y2 = y_2
            let c0 = real(Dd::new(0.5) * coeffs[0]);
            return match &y2 {
                Some(y_2) => V::combine(&[(c0, b), (half, &next), (minus_half, y_2)]),
                None => V::combine(&[(c0, b), (half, &next)]),
            };
        }
        y2 = Some(std::mem::replace(&mut y1, next));
    }
    // r == 0: the sum is c_0 b
    Ok(y1)
}

/// `sum_k c_k T_k(A) b` through the forward recurrence
/// `T_{k+1} = 2 A T_k - T_{k-1}`. Reference path for [`clenshaw_apply`].
pub fn forward_chebyshev_apply<V, M>(coeffs: &[Dd], a: &M, b: &V) -> Result<V>
where
    V: VectorSpace,
    M: LinearMap<V>,
{
    if coeffs.is_empty() {
        return Err(Error::Domain("empty coefficient list".into()));
    }
    let two = real(Dd::new(2.0));
    let minus_one = real(Dd::new(-1.0));
    let one = DdComplex::ONE;
    let mut acc = V::combine(&[(real(coeffs[0]), b)])?;
    if coeffs.len() == 1 {
        return Ok(acc);
    }
    let mut prev = b.clone();
    let mut cur = a.apply(b)?;
    acc = V::combine(&[(one, &acc), (real(coeffs[1]), &cur)])?;
    for &c in &coeffs[2..] {
        let next = V::combine(&[(two, &a.apply(&cur)?), (minus_one, &prev)])?;
        acc = V::combine(&[(one, &acc), (real(c), &next)])?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(acc)
}
