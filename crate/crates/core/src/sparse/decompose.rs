//! Block-diagonal decomposition by greedy edge coloring.
//!
//! Nonzero diagonal entries go into one part of 1x1 blocks. Each
//! off-diagonal pair `(j, l)`, `j < l`, is one undirected edge; edges are
//! visited in `(min, max)` order and given the lowest color unused at
//! either endpoint, so at most `2d - 1` colors appear. Every color class
//! becomes a part of independent 2x2 blocks.

use num_complex::Complex64;
use serde::Serialize;

use super::SparseOperator;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Block {
    Diag1 {
        j: usize,
        a: Complex64,
    },
    /// Indices `j` and `j + mu`; entries in row-major order.
    Block2 {
        j: usize,
        mu: usize,
        a_jj: Complex64,
        a_jk: Complex64,
        a_kj: Complex64,
        a_kk: Complex64,
    },
}

impl Block {
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Block::Diag1 { j, .. } => vec![j],
            Block::Block2 { j, mu, .. } => vec![j, j + mu],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDiagonalPart {
    pub color: usize,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub dim: usize,
    pub sparsity: usize,
    pub parts: Vec<BlockDiagonalPart>,
}

impl Decomposition {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// Entrywise sum of all parts.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::default(); self.dim]; self.dim];
        for part in &self.parts {
            for block in &part.blocks {
                match *block {
                    Block::Diag1 { j, a } => out[j][j] += a,
                    Block::Block2 {
                        j,
                        mu,
                        a_jj,
                        a_jk,
                        a_kj,
                        a_kk,
                    } => {
                        let k = j + mu;
                        out[j][j] += a_jj;
                        out[j][k] += a_jk;
                        out[k][j] += a_kj;
                        out[k][k] += a_kk;
                    }
                }
            }
        }
        out
    }

    /// True if no index appears twice within any part.
    pub fn parts_are_block_diagonal(&self) -> bool {
        self.parts.iter().all(|part| {
            let mut seen = vec![false; self.dim];
            part.blocks.iter().flat_map(Block::indices).all(|i| !std::mem::replace(&mut seen[i], true))
        })
    }
}

pub fn edge_color_decompose(op: &SparseOperator) -> Result<Decomposition> {
    op.require_hermitian()?;
    let dim = op.dim();
    let mut parts = Vec::new();

    let diag: Vec<Block> = (0..dim)
        .filter_map(|j| {
            let a = op.entry(j, j);
            (a != Complex64::default()).then_some(Block::Diag1 { j, a })
        })
        .collect();
    if !diag.is_empty() {
        parts.push(BlockDiagonalPart {
            color: 0,
            blocks: diag,
        });
    }

    // rows are sorted by column, so this visits edges in (min, max) order
    let mut used: Vec<Vec<bool>> = vec![Vec::new(); dim];
    let mut classes: Vec<Vec<Block>> = Vec::new();
    for j in 0..dim {
        for &(l, a_jl) in op.row(j) {
            if l <= j {
                continue;
            }
            let color = (0..)
                .find(|&c| !is_used(&used[j], c) && !is_used(&used[l], c))
                .expect("some color is free");
            mark(&mut used[j], color);
            mark(&mut used[l], color);
            if classes.len() <= color {
                classes.resize_with(color + 1, Vec::new);
            }
            classes[color].push(Block::Block2 {
                j,
                mu: l - j,
                a_jj: Complex64::default(),
                a_jk: a_jl,
                a_kj: op.entry(l, j),
                a_kk: Complex64::default(),
            });
        }
    }
    let offset = parts.len();
    parts.extend(
        classes
            .into_iter()
            .enumerate()
            .map(|(c, blocks)| BlockDiagonalPart {
                color: c + offset,
                blocks,
            }),
    );

    Ok(Decomposition {
        dim,
        sparsity: op.sparsity(),
        parts,
    })
}

fn is_used(set: &[bool], c: usize) -> bool {
    set.get(c).copied().unwrap_or(false)
}

fn mark(set: &mut Vec<bool>, c: usize) {
    if set.len() <= c {
        set.resize(c + 1, false);
    }
    set[c] = true;
}
