//! Signed two's-complement fixed-point registers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::wide::I256;

/// Register layout: `q_total` bits in total, `frac_bits` of them after the
/// binary point. Values step by `2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointFormat {
    q_total: u32,
    frac_bits: u32,
}

impl Default for FixedPointFormat {
    fn default() -> Self {
        FixedPointFormat {
            q_total: 64,
            frac_bits: 48,
        }
    }
}

impl FixedPointFormat {
    pub fn new(q_total: u32, frac_bits: u32) -> Result<Self> {
        if !(2 <= frac_bits && frac_bits < q_total && q_total <= 128) {
            return Err(Error::InvalidFormat(format!(
                "need 2 <= f < q_total <= 128, got q_total={q_total}, f={frac_bits}"
            )));
        }
        Ok(FixedPointFormat { q_total, frac_bits })
    }

    pub fn q_total(&self) -> u32 {
        self.q_total
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Register resolution `2^-f`.
    pub fn resolution(&self) -> f64 {
        2f64.powi(-(self.frac_bits as i32))
    }

    pub fn max_raw(&self) -> i128 {
        if self.q_total == 128 {
            i128::MAX
        } else {
            (1i128 << (self.q_total - 1)) - 1
        }
    }

    pub fn min_raw(&self) -> i128 {
        if self.q_total == 128 {
            i128::MIN
        } else {
            -(1i128 << (self.q_total - 1))
        }
    }

    /// Largest representable value, `2^(q_total-f-1) - 2^-f`.
    pub fn max_value(&self) -> f64 {
        raw_to_f64(self.max_raw(), self.frac_bits)
    }

    pub fn contains_raw(&self, raw: i128) -> bool {
        raw >= self.min_raw() && raw <= self.max_raw()
    }

    fn check(&self, raw: I256, index: usize) -> Result<i128> {
        match raw.to_i128() {
            Some(v) if self.contains_raw(v) => Ok(v),
            _ => Err(Error::Overflow {
                index,
                value: raw.to_f64() * self.resolution(),
                limit: self.max_value(),
            }),
        }
    }

    /// Round an exact product-scale value (`2 f` fraction bits) to a word.
    pub(crate) fn round_wide(&self, acc: I256, index: usize) -> Result<i128> {
        self.check(acc.round_shift(self.frac_bits), index)
    }

    /// Nearest register word to `x`, ties to even.
    pub fn round_f64(&self, x: f64, index: usize) -> Result<i128> {
        if !x.is_finite() {
            return Err(Error::Overflow {
                index,
                value: x,
                limit: self.max_value(),
            });
        }
        let scaled = x * 2f64.powi(self.frac_bits as i32);
        let limit = 2f64.powi(self.q_total as i32 - 1);
        let r = scaled.round_ties_even();
        if r >= limit || r < -limit {
            return Err(Error::Overflow {
                index,
                value: x,
                limit: self.max_value(),
            });
        }
        self.check(I256::from_i128(r as i128), index)
    }

    /// Nearest register word to a double-double value.
    pub fn round_dd(&self, x: Dd, index: usize) -> Result<i128> {
        let hi = x.hi * 2f64.powi(self.frac_bits as i32);
        let lo = x.lo * 2f64.powi(self.frac_bits as i32);
        let limit = 2f64.powi(self.q_total as i32 - 1);
        if !hi.is_finite() || hi.abs() >= limit {
            return Err(Error::Overflow {
                index,
                value: x.to_f64(),
                limit: self.max_value(),
            });
        }
        // hi - whole is exact; (s, e) carries the residual without loss
        let whole = hi.round_ties_even();
        let (s, e) = crate::dd::two_sum(hi - whole, lo);
        let floor = s.floor();
        let frac = s - floor;
        let mut raw = whole as i128 + floor as i128;
        let up = if frac > 0.5 {
            true
        } else if frac < 0.5 {
            false
        } else if e != 0.0 {
            e > 0.0
        } else {
            raw & 1 == 1
        };
        if up {
            raw += 1;
        }
        self.check(I256::from_i128(raw), index)
    }

    pub fn to_f64(&self, raw: i128) -> f64 {
        raw_to_f64(raw, self.frac_bits)
    }

    /// Exact value of a word as a double-double (exact for words below
    /// 2^106 in magnitude).
    pub fn to_dd(&self, raw: i128) -> Dd {
        let hi = raw as f64;
        let rest = raw - hi as i128;
        (Dd::new(hi) + Dd::new(rest as f64)).ldexp(-(self.frac_bits as i32))
    }
}

fn raw_to_f64(raw: i128, frac_bits: u32) -> f64 {
    raw as f64 * 2f64.powi(-(frac_bits as i32))
}

/// Round a real number into a register of the given format.
pub fn round_to_register(x: f64, fmt: FixedPointFormat) -> Result<i128> {
    fmt.round_f64(x, 0)
}

/// A complex register pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FixedComplex {
    pub re: i128,
    pub im: i128,
}

impl FixedComplex {
    pub const ZERO: FixedComplex = FixedComplex { re: 0, im: 0 };

    pub fn from_c64(z: Complex64, fmt: FixedPointFormat, index: usize) -> Result<Self> {
        Ok(FixedComplex {
            re: fmt.round_f64(z.re, index)?,
            im: fmt.round_f64(z.im, index)?,
        })
    }

    pub fn from_dd(z: DdComplex, fmt: FixedPointFormat, index: usize) -> Result<Self> {
        Ok(FixedComplex {
            re: fmt.round_dd(z.re, index)?,
            im: fmt.round_dd(z.im, index)?,
        })
    }

    pub fn to_c64(self, fmt: FixedPointFormat) -> Complex64 {
        Complex64::new(fmt.to_f64(self.re), fmt.to_f64(self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
}

/// Exact wide accumulator for a complex register at `2 f` fraction bits.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct WideComplex {
    pub re: I256,
    pub im: I256,
}

impl WideComplex {
    /// `self += c * x`, exact.
    #[inline]
    pub fn mul_add(&mut self, c: FixedComplex, x: FixedComplex) {
        if c.im == 0 && x.im == 0 {
            if c.re != 0 && x.re != 0 {
                self.re = self.re + I256::mul(c.re, x.re);
            }
            return;
        }
        self.re = self.re + I256::mul(c.re, x.re) - I256::mul(c.im, x.im);
        self.im = self.im + I256::mul(c.re, x.im) + I256::mul(c.im, x.re);
    }

    pub fn round(self, fmt: FixedPointFormat, index: usize) -> Result<FixedComplex> {
        Ok(FixedComplex {
            re: fmt.round_wide(self.re, index)?,
            im: fmt.round_wide(self.im, index)?,
        })
    }
}

/// Bit weights of a register word: bit `i` (from the least significant)
/// carries `2^(i-f)`, the sign bit carries `-2^(q_total-1-f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceValueDecomposition {
    fmt: FixedPointFormat,
}

impl PlaceValueDecomposition {
    pub fn new(fmt: FixedPointFormat) -> Self {
        PlaceValueDecomposition { fmt }
    }

    /// Weights as base-2 exponents with sign, most significant bit first.
    pub fn weights(&self) -> Vec<(i32, i32)> {
        let f = self.fmt.frac_bits as i32;
        let q = self.fmt.q_total as i32;
        (0..q)
            .rev()
            .map(|i| (if i == q - 1 { -1 } else { 1 }, i - f))
            .collect()
    }

    /// Bits of a word, most significant first.
    pub fn bits(&self, raw: i128) -> Vec<bool> {
        let q = self.fmt.q_total;
        (0..q).rev().map(|i| (raw >> i) & 1 == 1).collect()
    }

    /// Weighted bit sum, returned as the word at `f` fraction bits. Exact.
    pub fn reconstruct(&self, bits: &[bool]) -> i128 {
        let mut acc = I256::ZERO;
        for (bit, (sign, _)) in bits.iter().zip(self.weights()) {
            acc = acc.shl(1);
            if *bit {
                acc = if sign < 0 {
                    acc - I256::from_i128(1)
                } else {
                    acc + I256::from_i128(1)
                };
            }
        }
        acc.to_i128().expect("reconstruction within 128 bits")
    }

    /// `|x|^2` at `2 f` fraction bits, accumulated bit by bit from the
    /// magnitude's place values: `sum_i b_i 2^i * |x|`.
    pub fn square(&self, raw: i128) -> I256 {
        let mag = raw.unsigned_abs();
        let mut acc = I256::ZERO;
        let mut bits = mag;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            acc = acc + mul_u128_wide(mag).shl(i);
        }
        acc
    }
}

fn mul_u128_wide(m: u128) -> I256 {
    // 2^127 does not fit an i128; split it.
    if m <= i128::MAX as u128 {
        I256::from_i128(m as i128)
    } else {
        I256::from_i128(1).shl(127)
    }
}
