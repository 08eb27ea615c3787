//! Modified Bessel functions `I_k(t)` for the Chebyshev expansion of `e^{-x t}`.
//!
//! Values come from Miller's descending recursion carried out in
//! double-double arithmetic and normalized with `I_0 + 2 sum_k I_k = e^t`.
//! The normalized values are `e^{-t} I_k(t)`, which stay in `[0, 1]` for
//! any `t`.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// `ceil(e^{5/4} t / 2 + ln(1/eps0))`, at least `ceil(t) - 2`, then raised
/// until [`tail_bound`] drops below `eps0`. Zero at `t = 0`.
pub fn truncation_order(t: f64, epsilon0: f64) -> Result<usize> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time {t} must be finite and non-negative")));
    }
    if !(epsilon0 > 0.0) {
        return Err(Error::Domain(format!("epsilon0 {epsilon0} must be positive")));
    }
    if t == 0.0 {
        return Ok(0);
    }
    let guess = (1.25f64.exp() * t / 2.0 + (1.0 / epsilon0).ln()).ceil().max(0.0) as usize;
    let floor = (t.ceil() as usize).saturating_sub(2);
    let mut r = guess.max(floor);
    while tail_bound(t, r) >= epsilon0 {
        r += 1;
    }
    Ok(r)
}

/// `4 (t/2)^{r+1} / (r+1)! e^{t^2 / (4 (r+2))}`, an upper bound on
/// `sum_{k>r} 2 I_k(t)`.
pub fn tail_bound(t: f64, r: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let k = (r + 1) as f64;
    let ln_fact: f64 = (2..=r + 1).map(|i| (i as f64).ln()).sum();
    (4f64.ln() + k * (t / 2.0).ln() - ln_fact + t * t / (4.0 * (k + 1.0))).exp()
}

/// Bessel values and Chebyshev coefficients of `e^{-x t}` on `[-1, 1]`:
/// `C_0 = I_0(t)`, `C_k = 2 (-1)^k I_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebCoefficients {
    pub t: f64,
    /// `t` carried to double-double, used by the recursion.
    pub time: Dd,
    pub order: usize,
    /// `e^{-t} I_k(t)` for `k = 0..=order`.
    pub scaled_bessel: Vec<Dd>,
    /// Certified bound on `sum_{k>order} 2 I_k(t)`.
    pub tail_bound: f64,
}

impl ChebCoefficients {
    pub fn bessel_i(&self, k: usize) -> Dd {
        self.scaled_bessel[k] * self.time.exp()
    }

    /// `C_k` in double precision.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.unscaled(k).to_f64()
    }

    fn unscaled(&self, k: usize) -> Dd {
        let i = self.bessel_i(k);
        match k {
            0 => i,
            _ if k % 2 == 0 => i * Dd::new(2.0),
            _ => i * Dd::new(-2.0),
        }
    }

    /// `C_0 .. C_r`.
    pub fn coefficients(&self) -> Vec<Dd> {
        (0..=self.order).map(|k| self.unscaled(k)).collect()
    }

    /// `e^{-t} C_k`: the expansion of `e^{-(x+1) t}`, bounded by one in sum.
    pub fn folded(&self) -> Vec<Dd> {
        self.scaled_bessel
            .iter()
            .enumerate()
            .map(|(k, &v)| match k {
                0 => v,
                _ if k % 2 == 0 => v * Dd::new(2.0),
                _ => v * Dd::new(-2.0),
            })
            .collect()
    }
}

/// Normalized Miller recursion for `e^{-t} I_k(t)`, `k = 0..=r`.
pub fn bessel_coeffs(t: f64, r: usize) -> Result<ChebCoefficients> {
    bessel_coeffs_dd(Dd::new(t), r)
}

/// [`bessel_coeffs`] for a time known to double-double precision.
pub fn bessel_coeffs_dd(time: Dd, r: usize) -> Result<ChebCoefficients> {
    let t = time.to_f64();
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time {t} must be finite and non-negative")));
    }
    let scaled_bessel = if t == 0.0 {
        let mut v = vec![Dd::ZERO; r + 1];
        v[0] = Dd::ONE;
        v
    } else {
        miller(time, r)
    };
    Ok(ChebCoefficients {
        t,
        time,
        order: r,
        scaled_bessel,
        tail_bound: tail_bound(t, r),
    })
}

fn miller(time: Dd, r: usize) -> Vec<Dd> {
    let t = time.to_f64();
    // start far enough past both r and the peak of I_k(t) near k ~ t
    let margin = (15.0 + t / 2.0).ceil() as usize;
    let start = r.max((1.75 * t).ceil() as usize) + margin;
    let inv_t = Dd::ONE / time;
    let mut vals = vec![Dd::ZERO; start + 2];
    vals[start] = Dd::new(1e-300);
    for k in (1..=start).rev() {
        let two_k_over_t = Dd::new(2.0 * k as f64) * inv_t;
        let next = two_k_over_t * vals[k] + vals[k + 1];
        vals[k - 1] = next;
        if next.hi > 1e250 {
            for v in &mut vals[k - 1..] {
                *v = v.ldexp(-800);
            }
        }
    }
    let mut sum = vals[0];
    for v in &vals[1..=start] {
        sum += *v * Dd::new(2.0);
    }
    let inv = Dd::ONE / sum;
    vals.truncate(r + 1);
    vals.iter().map(|&v| v * inv).collect()
}

/// `I_k(t)` by direct summation of `sum_s (t/2)^{k+2s} / (s! (k+s)!)`,
/// stopped when terms fall below `2^-106` of the sum.
pub fn bessel_i_series(k: usize, t: f64) -> Dd {
    if t == 0.0 {
        return if k == 0 { Dd::ONE } else { Dd::ZERO };
    }
    let half = Dd::new(t / 2.0);
    let mut term = Dd::ONE;
    for i in 1..=k {
        term = term * half / Dd::new(i as f64);
    }
    let quarter_sq = half * half;
    let mut sum = term;
    for s in 1.. {
        term = term * quarter_sq / Dd::new((s * (k + s)) as f64);
        sum += term;
        if term.hi <= sum.hi * 1.2e-32 && (s as f64) > t {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncation_examples() {
        assert_eq!(truncation_order(0.0, 1.0).unwrap(), 0);
        assert_eq!(truncation_order(0.0, 1e-9).unwrap(), 0);
        assert_eq!(truncation_order(1.0, 1e-6).unwrap(), 16);
        let r = truncation_order(20.0, 1e-3).unwrap();
        assert_eq!(r, 42);
        assert!(r + 2 >= 20);
        assert!(truncation_order(-1.0, 1e-3).is_err());
        assert!(truncation_order(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_time_is_identity_expansion() {
        let c = bessel_coeffs(0.0, 5).unwrap();
        assert_eq!(c.coefficient(0), 1.0);
        assert!((1..=5).all(|k| c.coefficient(k) == 0.0));
    }

    #[test]
    fn values_at_one() {
        let c = bessel_coeffs(1.0, 16).unwrap();
        let want = [1.266066, 0.565159, 0.135748, 0.022168];
        for (k, w) in want.iter().enumerate() {
            assert!((c.bessel_i(k).to_f64() - w).abs() < 5e-7);
        }
        let even: Dd = (1..=8).fold(Dd::ZERO, |acc, k| acc + c.bessel_i(2 * k));
        let cosh = c.bessel_i(0) + even * Dd::new(2.0);
        assert!((cosh.to_f64() - 1f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn miller_matches_series() {
        for &t in &[0.01, 0.5, 1.0, 5.0, 12.5, 30.0] {
            let c = bessel_coeffs(t, 60).unwrap();
            for k in 0..=60 {
                let want = bessel_i_series(k, t);
                let got = c.bessel_i(k);
                let rel = ((got - want) / want).abs().to_f64();
                assert!(rel < 1e-24, "t={t} k={k} rel={rel:e}");
            }
        }
    }

    #[test]
    fn series_oracle_matches_known_values() {
        // I_0(1), I_1(1) to 20 digits
        assert!((bessel_i_series(0, 1.0) - Dd::new(1.2660658777520083)).abs().hi < 2e-16);
        assert!((bessel_i_series(1, 1.0) - Dd::new(0.5651591039924851)).abs().hi < 2e-16);
    }

    #[test]
    fn coefficients_decay_past_t() {
        for &t in &[0.5, 3.0, 10.0, 25.0] {
            let c = bessel_coeffs(t, truncation_order(t, 1e-12).unwrap()).unwrap();
            let start = t.ceil() as usize;
            for k in start..c.order {
                assert!(c.coefficient(k + 1).abs() < c.coefficient(k).abs());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tail_bound_dominates_series_tail(t in 0.0f64..25.0, e in 1u32..12) {
            let eps = 10f64.powi(-(e as i32));
            let r = truncation_order(t, eps).unwrap();
            let tail: Dd = (r + 1..=r + 80).fold(Dd::ZERO, |acc, k| acc + bessel_i_series(k, t) * Dd::new(2.0));
            prop_assert!(tail.to_f64() < eps);
            prop_assert!(tail.to_f64() <= tail_bound(t, r));
        }

        #[test]
        fn folded_coefficients_sum_to_one_at_x_minus_one(t in 0.0f64..40.0) {
            // sum_k C_k T_k(-1) = e^{t}, so the folded series at x = -1 is 1
            let c = bessel_coeffs(t, truncation_order(t, 1e-20).unwrap()).unwrap();
            let s = c.folded().iter().enumerate().fold(Dd::ZERO, |acc, (k, &v)| {
                if k % 2 == 0 { acc + v } else { acc - v }
            });
            prop_assert!((s - Dd::ONE).abs().to_f64() < 1e-18);
        }
    }
}
