//! 256-bit two's-complement accumulator.
//!
//! Register words are at most 128 bits, so the exact product of two words
//! and short sums of such products fit here. Every fixed-point operation
//! accumulates exactly in this type and rounds once at the end.

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct I256 {
    hi: i128,
    lo: u128,
}

impl I256 {
    pub const ZERO: I256 = I256 { hi: 0, lo: 0 };

    pub fn from_i128(v: i128) -> Self {
        I256 {
            hi: if v < 0 { -1 } else { 0 },
            lo: v as u128,
        }
    }

    /// Exact product of two 128-bit words.
    pub fn mul(a: i128, b: i128) -> Self {
        if let Some(p) = a.checked_mul(b) {
            return I256::from_i128(p);
        }
        let negative = (a < 0) != (b < 0);
        let (hi, lo) = mul_u128(a.unsigned_abs(), b.unsigned_abs());
        let mag = I256 { hi: hi as i128, lo };
        if negative {
            -mag
        } else {
            mag
        }
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    /// Arithmetic shift left; `s < 256`. Bits shifted past the top are lost.
    pub fn shl(self, s: u32) -> Self {
        match s {
            0 => self,
            1..=127 => I256 {
                hi: (self.hi << s) | (self.lo >> (128 - s)) as i128,
                lo: self.lo << s,
            },
            _ => I256 {
                hi: (self.lo << (s - 128)) as i128,
                lo: 0,
            },
        }
    }

    /// Arithmetic (flooring) shift right; `s < 256`.
    pub fn shr(self, s: u32) -> Self {
        match s {
            0 => self,
            1..=127 => I256 {
                hi: self.hi >> s,
                lo: (self.lo >> s) | ((self.hi as u128) << (128 - s)),
            },
            _ => I256 {
                hi: if self.hi < 0 { -1 } else { 0 },
                lo: (self.hi >> (s - 128)) as u128,
            },
        }
    }

    /// Divide by `2^s`, rounding to nearest with ties to even.
    pub fn round_shift(self, s: u32) -> Self {
        if s == 0 {
            return self;
        }
        let q = self.shr(s);
        let rem = self - q.shl(s); // in [0, 2^s)
        let half = I256::from_i128(1).shl(s - 1);
        match rem.cmp(&half) {
            Ordering::Greater => q + I256::from_i128(1),
            Ordering::Equal if q.lo & 1 == 1 => q + I256::from_i128(1),
            _ => q,
        }
    }

    pub fn to_i128(self) -> Option<i128> {
        let v = self.lo as i128;
        if (v < 0 && self.hi == -1) || (v >= 0 && self.hi == 0) {
            Some(v)
        } else {
            None
        }
    }

    /// Nearest double; used for diagnostics only.
    pub fn to_f64(self) -> f64 {
        if self.is_negative() {
            let m = -self;
            -(m.hi as f64 * 2f64.powi(128) + m.lo as f64)
        } else {
            self.hi as f64 * 2f64.powi(128) + self.lo as f64
        }
    }
}

fn mul_u128(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

impl Add for I256 {
    type Output = I256;
    fn add(self, rhs: I256) -> I256 {
        let (lo, carry) = self.lo.overflowing_add(rhs.lo);
        I256 {
            hi: self.hi.wrapping_add(rhs.hi).wrapping_add(carry as i128),
            lo,
        }
    }
}

impl Sub for I256 {
    type Output = I256;
    fn sub(self, rhs: I256) -> I256 {
        self + (-rhs)
    }
}

impl Neg for I256 {
    type Output = I256;
    fn neg(self) -> I256 {
        let (lo, carry) = (!self.lo).overflowing_add(1);
        I256 {
            hi: (!self.hi).wrapping_add(carry as i128),
            lo,
        }
    }
}

impl PartialOrd for I256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for I256 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.hi.cmp(&other.hi).then(self.lo.cmp(&other.lo))
    }
}
