//! Operator application on digital states.
//!
//! Matrix entries are rounded to the state's register format once, when
//! the operator is quantized. Products are accumulated exactly and every
//! output register is rounded once, so the part-by-part block schedule
//! and a plain row sweep give bit-identical results.

use num_complex::Complex64;

use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::fixed::{FixedComplex, FixedPointFormat, WideComplex};
use crate::state::DigitalState;

use super::decompose::{Block, Decomposition};
use super::SparseOperator;

#[derive(Debug, Clone, Copy)]
enum QBlock {
    Diag1 {
        j: usize,
        a: FixedComplex,
    },
    Block2 {
        j: usize,
        k: usize,
        a_jj: FixedComplex,
        a_jk: FixedComplex,
        a_kj: FixedComplex,
        a_kk: FixedComplex,
    },
}

#[derive(Debug, Clone)]
enum Layout {
    Rows(Vec<Vec<(usize, FixedComplex)>>),
    Parts(Vec<Vec<QBlock>>),
}

/// An operator with entries rounded to one register format.
#[derive(Debug, Clone)]
pub struct QuantizedOperator {
    dim: usize,
    format: FixedPointFormat,
    layout: Layout,
}

impl QuantizedOperator {
    /// Row-sweep form; works for any operator.
    pub fn from_rows(op: &SparseOperator, format: FixedPointFormat) -> Result<Self> {
        let rows = op
            .rows()
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.iter()
                    .map(|&(l, v)| Ok((l, FixedComplex::from_c64(v, format, j)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantizedOperator {
            dim: op.dim(),
            format,
            layout: Layout::Rows(rows),
        })
    }

    /// Block-diagonal part form, applied part by part in color order.
    pub fn from_decomposition(dec: &Decomposition, format: FixedPointFormat) -> Result<Self> {
        let q = |z, j| FixedComplex::from_c64(z, format, j);
        let parts = dec
            .parts
            .iter()
            .map(|part| {
                part.blocks
                    .iter()
                    .map(|b| {
                        Ok(match *b {
                            Block::Diag1 { j, a } => QBlock::Diag1 { j, a: q(a, j)? },
                            Block::Block2 {
                                j,
                                mu,
                                a_jj,
                                a_jk,
                                a_kj,
                                a_kk,
                            } => QBlock::Block2 {
                                j,
                                k: j + mu,
                                a_jj: q(a_jj, j)?,
                                a_jk: q(a_jk, j)?,
                                a_kj: q(a_kj, j + mu)?,
                                a_kk: q(a_kk, j + mu)?,
                            },
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantizedOperator {
            dim: dec.dim,
            format,
            layout: Layout::Parts(parts),
        })
    }

    /// `(A - shift I) / scale` from the decomposition of `A`, with every
    /// entry formed in double-double before its single rounding. The
    /// diagonal part covers all indices so the shift is never dropped.
    pub fn affine_from_decomposition(dec: &Decomposition, format: FixedPointFormat, shift: Dd, scale: Dd) -> Result<Self> {
        let inv = Dd::ONE / scale;
        let q = |z: Complex64, j: usize| {
            FixedComplex::from_dd(
                DdComplex {
                    re: Dd::new(z.re) * inv,
                    im: Dd::new(z.im) * inv,
                },
                format,
                j,
            )
        };
        let mut diag = vec![Complex64::default(); dec.dim];
        let mut off = Vec::new();
        for part in &dec.parts {
            let mut blocks = Vec::new();
            for b in &part.blocks {
                match *b {
                    Block::Diag1 { j, a } => diag[j] += a,
                    Block::Block2 {
                        j,
                        mu,
                        a_jj,
                        a_jk,
                        a_kj,
                        a_kk,
                    } => blocks.push(QBlock::Block2 {
                        j,
                        k: j + mu,
                        a_jj: q(a_jj, j)?,
                        a_jk: q(a_jk, j)?,
                        a_kj: q(a_kj, j + mu)?,
                        a_kk: q(a_kk, j + mu)?,
                    }),
                }
            }
            if !blocks.is_empty() {
                off.push(blocks);
            }
        }
        let diag_part = diag
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let re = (Dd::new(a.re) - shift) * inv;
                let im = Dd::new(a.im) * inv;
                Ok(QBlock::Diag1 {
                    j,
                    a: FixedComplex::from_dd(DdComplex { re, im }, format, j)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut parts = vec![diag_part];
        parts.extend(off);
        Ok(QuantizedOperator {
            dim: dec.dim,
            format,
            layout: Layout::Parts(parts),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    /// `A x`; increments the product count.
    pub fn apply(&self, x: &DigitalState) -> Result<DigitalState> {
        if x.dim() < self.dim || x.dim() != self.dim.next_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: self.dim.next_power_of_two(),
                found: x.dim(),
            });
        }
        if x.format() != self.format {
            return Err(Error::InvalidFormat(format!(
                "operator quantized for {:?}, state uses {:?}",
                self.format,
                x.format()
            )));
        }
        let regs = x.registers();
        let mut acc = vec![WideComplex::default(); x.dim()];
        match &self.layout {
            Layout::Rows(rows) => {
                for (j, row) in rows.iter().enumerate() {
                    for &(l, a) in row {
                        acc[j].mul_add(a, regs[l]);
                    }
                }
            }
            Layout::Parts(parts) => {
                for part in parts {
                    for block in part {
                        apply_block(block, regs, &mut acc);
                    }
                }
            }
        }
        let out = acc
            .into_iter()
            .enumerate()
            .map(|(j, a)| a.round(self.format, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(x.with_registers(out, x.product_count() + 1))
    }
}

/// Exchange the registers of a 2x2 block's index pair. Applying it twice
/// restores the pair.
pub fn swap_pair(pair: (FixedComplex, FixedComplex)) -> (FixedComplex, FixedComplex) {
    (pair.1, pair.0)
}

#[inline]
fn apply_block(block: &QBlock, regs: &[FixedComplex], acc: &mut [WideComplex]) {
    match *block {
        QBlock::Diag1 { j, a } => acc[j].mul_add(a, regs[j]),
        QBlock::Block2 {
            j,
            k,
            a_jj,
            a_jk,
            a_kj,
            a_kk,
        } => {
            let pair = (regs[j], regs[k]);
            acc[j].mul_add(a_jj, pair.0);
            acc[k].mul_add(a_kk, pair.1);
            // off-diagonal elements act on the swapped registers
            let swapped = swap_pair(pair);
            acc[j].mul_add(a_jk, swapped.0);
            acc[k].mul_add(a_kj, swapped.1);
        }
    }
}

/// Quantize `dec` for the state's format and apply it once.
pub fn apply_operator(dec: &Decomposition, x: &DigitalState) -> Result<DigitalState> {
    QuantizedOperator::from_decomposition(dec, x.format())?.apply(x)
}
