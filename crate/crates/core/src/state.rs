//! Digital states: one complex fixed-point register per basis index.
//!
//! A state of `n` index bits holds `2^n` registers. No normalization is
//! imposed on the register values; operations that need a normalized
//! state check it themselves.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::fixed::{FixedComplex, FixedPointFormat, WideComplex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalState {
    n: u32,
    amplitudes: Vec<FixedComplex>,
    format: FixedPointFormat,
    product_count: u64,
}

/// Smallest `n` with `2^n >= dim`.
pub fn index_bits_for(dim: usize) -> u32 {
    dim.max(1).next_power_of_two().trailing_zeros()
}

impl DigitalState {
    pub fn zeros(n: u32, format: FixedPointFormat) -> Self {
        DigitalState {
            n,
            amplitudes: vec![FixedComplex::ZERO; 1usize << n],
            format,
            product_count: 0,
        }
    }

    /// Build from raw register words; `amplitudes.len()` must be a power of two.
    pub fn from_registers(amplitudes: Vec<FixedComplex>, format: FixedPointFormat) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two(),
                found: len,
            });
        }
        for (j, a) in amplitudes.iter().enumerate() {
            if !format.contains_raw(a.re) || !format.contains_raw(a.im) {
                return Err(Error::Overflow {
                    index: j,
                    value: a.to_c64(format).norm(),
                    limit: format.max_value(),
                });
            }
        }
        Ok(DigitalState {
            n: len.trailing_zeros(),
            amplitudes,
            format,
            product_count: 0,
        })
    }

    /// Round a vector of complex values into registers, zero-padding to
    /// the next power of two.
    pub fn from_c64(values: &[Complex64], format: FixedPointFormat) -> Result<Self> {
        let n = index_bits_for(values.len());
        init_state(|j| values.get(j).copied().unwrap_or_default(), n, values.len(), format)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    pub fn product_count(&self) -> u64 {
        self.product_count
    }

    pub fn registers(&self) -> &[FixedComplex] {
        &self.amplitudes
    }

    pub(crate) fn with_registers(&self, amplitudes: Vec<FixedComplex>, product_count: u64) -> Self {
        DigitalState {
            n: self.n,
            amplitudes,
            format: self.format,
            product_count,
        }
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(|a| a.to_c64(self.format)).collect()
    }

    pub fn to_dd(&self) -> Vec<DdComplex> {
        self.amplitudes
            .iter()
            .map(|a| DdComplex {
                re: self.format.to_dd(a.re),
                im: self.format.to_dd(a.im),
            })
            .collect()
    }

    /// Same values in another format (one rounding per register).
    pub fn convert(&self, format: FixedPointFormat) -> Result<Self> {
        let amplitudes = self
            .to_dd()
            .into_iter()
            .enumerate()
            .map(|(j, z)| FixedComplex::from_dd(z, format, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(DigitalState {
            n: self.n,
            amplitudes,
            format,
            product_count: self.product_count,
        })
    }

    fn check_compatible(&self, other: &DigitalState) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.format != other.format {
            return Err(Error::InvalidFormat(format!(
                "formats differ: {:?} vs {:?}",
                self.format, other.format
            )));
        }
        Ok(())
    }

    /// `sum_i c_i x_i` accumulated exactly and rounded once per register.
    /// Coefficients are first rounded to the register format.
    pub fn combine(terms: &[(DdComplex, &DigitalState)]) -> Result<DigitalState> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Domain("empty linear combination".into()))?
            .1;
        for (_, s) in &terms[1..] {
            first.check_compatible(s)?;
        }
        let fmt = first.format;
        let coeffs = terms
            .iter()
            .map(|(c, _)| FixedComplex::from_dd(*c, fmt, 0))
            .collect::<Result<Vec<_>>>()?;
        let amplitudes = (0..first.dim())
            .map(|j| {
                let mut acc = WideComplex::default();
                for (c, (_, s)) in coeffs.iter().zip(terms) {
                    acc.mul_add(*c, s.amplitudes[j]);
                }
                acc.round(fmt, j)
            })
            .collect::<Result<Vec<_>>>()?;
        let product_count = terms.iter().map(|(_, s)| s.product_count).max().unwrap_or(0);
        Ok(first.with_registers(amplitudes, product_count))
    }

    /// Exact register value at index `j`.
    pub fn readout(&self, j: usize) -> Result<Complex64> {
        self.amplitudes
            .get(j)
            .map(|a| a.to_c64(self.format))
            .ok_or(Error::IndexOutOfRange {
                index: j,
                dim: self.dim(),
            })
    }

    /// `sum_j |x_j|^2` by a classical sweep over all registers.
    pub fn norm_squared(&self) -> f64 {
        self.norm_squared_dd().to_f64()
    }

    pub fn norm_squared_dd(&self) -> Dd {
        self.to_dd()
            .iter()
            .fold(Dd::ZERO, |acc, z| acc + z.re * z.re + z.im * z.im)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Binary dump: magic `DQS1`, then `n`, `q_total`, `f` as little-endian
    /// `u32`, then `2^(n+1)` little-endian `i128` words (re, im interleaved).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"DQS1")?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.format.q_total().to_le_bytes())?;
        w.write_all(&self.format.frac_bits().to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"DQS1" {
            return Err(Error::Parse {
                line: 0,
                message: "bad state dump magic".into(),
            });
        }
        let mut word = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let n = read_u32(&mut r)?;
        let q_total = read_u32(&mut r)?;
        let f = read_u32(&mut r)?;
        if n > 40 {
            return Err(Error::Parse {
                line: 0,
                message: format!("index bit count {n} too large"),
            });
        }
        let format = FixedPointFormat::new(q_total, f)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        let mut buf = [0u8; 16];
        for _ in 0..(1usize << n) {
            r.read_exact(&mut buf)?;
            let re = i128::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = i128::from_le_bytes(buf);
            amplitudes.push(FixedComplex { re, im });
        }
        DigitalState::from_registers(amplitudes, format)
    }

    /// CSV with exact decimal expansions of every register.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,re,im")?;
        let f = self.format.frac_bits();
        for (j, a) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{j},{},{}", exact_decimal(a.re, f), exact_decimal(a.im, f))?;
        }
        Ok(())
    }
}

/// Exact decimal string of `raw * 2^-f` (a dyadic rational has a finite
/// decimal expansion of at most `f` digits).
pub fn exact_decimal(raw: i128, f: u32) -> String {
    let negative = raw < 0;
    let scaled = BigInt::from(raw.unsigned_abs()) * BigInt::from(5u32).pow(f);
    let digits = scaled.to_string();
    let f = f as usize;
    let (int_part, frac_part) = if digits.len() > f {
        let (a, b) = digits.split_at(digits.len() - f);
        (a.to_string(), b.to_string())
    } else {
        ("0".to_string(), format!("{digits:0>f$}"))
    };
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Fill registers from an index oracle. Indices at or beyond `logical_dim`
/// are zero.
pub fn init_state<F>(oracle: F, n: u32, logical_dim: usize, format: FixedPointFormat) -> Result<DigitalState>
where
    F: Fn(usize) -> Complex64,
{
    let dim = 1usize << n;
    if logical_dim > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: logical_dim,
        });
    }
    let amplitudes = (0..dim)
        .map(|j| {
            if j < logical_dim {
                FixedComplex::from_c64(oracle(j), format, j)
            } else {
                Ok(FixedComplex::ZERO)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DigitalState {
        n,
        amplitudes,
        format,
        product_count: 0,
    })
}

/// `c x_j` for every register, one rounding each.
pub fn scale_state(s: &DigitalState, c: Complex64) -> Result<DigitalState> {
    DigitalState::combine(&[(c.into(), s)])
}

/// `x_j + y_j` for every register.
pub fn add_states(a: &DigitalState, b: &DigitalState) -> Result<DigitalState> {
    DigitalState::combine(&[(DdComplex::ONE, a), (DdComplex::ONE, b)])
}
