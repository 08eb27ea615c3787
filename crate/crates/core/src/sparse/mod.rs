//! Oracle-specified sparse operators.
//!
//! An operator is described by a row oracle `j -> [(column, value)]`. The
//! oracle is evaluated once at construction; rows are kept sorted by
//! column with exact zeros dropped.

mod apply;
mod decompose;
pub mod matrix_market;
mod spectral;

pub use apply::{apply_operator, swap_pair, QuantizedOperator};
pub use decompose::{edge_color_decompose, Block, BlockDiagonalPart, Decomposition};
pub use spectral::{
    frobenius_alpha, gershgorin_bounds, rescale_affine, AffineRecord, AlphaChoice, RescaleTarget,
    RescaledOperator, SpectralEstimate,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Builtin operator families and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OperatorFamily {
    Identity { dim: usize },
    Diagonal { values: Vec<f64> },
    /// Open-chain 1D Laplacian: 2 on the diagonal, -1 on the neighbours.
    Laplacian1d { dim: usize },
    /// `H = -J sum Z_i Z_{i+1} - h sum X_i` on an open chain; bit `i` of
    /// the basis index is site `i`, bit value 0 is the `Z = +1` state.
    TransverseFieldIsing { sites: u32, coupling: f64, field: f64 },
    /// Seeded random Hermitian matrix with at most `sparsity` nonzeros per row.
    RandomHermitian {
        dim: usize,
        sparsity: usize,
        seed: u64,
        #[serde(default)]
        complex: bool,
    },
    MatrixMarket { path: String },
    Custom { name: String },
}

impl OperatorFamily {
    pub fn build(&self) -> Result<SparseOperator> {
        match self {
            OperatorFamily::Identity { dim } => Ok(identity(*dim)),
            OperatorFamily::Diagonal { values } => Ok(diagonal(values)),
            OperatorFamily::Laplacian1d { dim } => Ok(laplacian_1d(*dim)),
            OperatorFamily::TransverseFieldIsing {
                sites,
                coupling,
                field,
            } => Ok(transverse_field_ising(*sites, *coupling, *field)),
            OperatorFamily::RandomHermitian {
                dim,
                sparsity,
                seed,
                complex,
            } => random_hermitian(*dim, *sparsity, *seed, *complex),
            OperatorFamily::MatrixMarket { path } => matrix_market::read_path(path),
            OperatorFamily::Custom { name } => Err(Error::Domain(format!(
                "custom operator '{name}' has no builtin constructor"
            ))),
        }
    }
}

pub type Row = Vec<(usize, Complex64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Row>,
    sparsity: usize,
    hermitian: bool,
    family: OperatorFamily,
}

impl SparseOperator {
    /// Evaluate a row oracle for every index. Duplicate columns are summed.
    pub fn from_oracle<F>(dim: usize, oracle: F, family: OperatorFamily) -> Result<Self>
    where
        F: Fn(usize) -> Row,
    {
        let mut rows = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut row = oracle(j);
            if let Some(&(col, _)) = row.iter().find(|(c, _)| *c >= dim) {
                return Err(Error::IndexOutOfRange { index: col, dim });
            }
            row.sort_by_key(|(c, _)| *c);
            let mut merged: Row = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((pc, pv)) if *pc == c => *pv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|(_, v)| *v != Complex64::default());
            rows.push(merged);
        }
        Ok(Self::from_rows(rows, family))
    }

    fn from_rows(rows: Vec<Row>, family: OperatorFamily) -> Self {
        let dim = rows.len();
        let sparsity = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut op = SparseOperator {
            dim,
            rows,
            sparsity,
            hermitian: false,
            family,
        };
        op.hermitian = op.find_non_hermitian_pair().is_none();
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximum number of nonzeros in any row.
    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn family(&self) -> &OperatorFamily {
        &self.family
    }

    pub fn row(&self, j: usize) -> &[(usize, Complex64)] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.rows[j]
            .binary_search_by_key(&l, |(c, _)| *c)
            .map(|i| self.rows[j][i].1)
            .unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub(crate) fn find_non_hermitian_pair(&self) -> Option<(usize, usize)> {
        for (j, row) in self.rows.iter().enumerate() {
            for &(l, v) in row {
                if self.entry(l, j) != v.conj() {
                    return Some((j, l));
                }
            }
        }
        None
    }

    pub fn require_hermitian(&self) -> Result<()> {
        match self.find_non_hermitian_pair() {
            None => Ok(()),
            Some((row, col)) => Err(Error::NotHermitian { row, col }),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SparseOperator {
        if self.hermitian {
            return self.clone();
        }
        let mut rows: Vec<Row> = vec![Vec::new(); self.dim];
        for (j, row) in self.rows.iter().enumerate() {
            for &(l, v) in row {
                rows[l].push((j, v.conj()));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|(c, _)| *c);
        }
        SparseOperator::from_rows(
            rows,
            OperatorFamily::Custom {
                name: "adjoint".into(),
            },
        )
    }

    /// `scale * A + shift * I`.
    pub fn affine(&self, scale: f64, shift: f64) -> SparseOperator {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let mut out: Row = row.iter().map(|&(l, v)| (l, v * scale)).collect();
                if shift != 0.0 {
                    match out.binary_search_by_key(&j, |(c, _)| *c) {
                        Ok(i) => out[i].1 += shift,
                        Err(i) => out.insert(i, (j, Complex64::new(shift, 0.0))),
                    }
                }
                out.retain(|(_, v)| *v != Complex64::default());
                out
            })
            .collect();
        SparseOperator::from_rows(rows, self.family.clone())
    }

    /// Dense matrix-vector product in double precision.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(l, v)| v * x[l]).sum())
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::default(); self.dim]; self.dim];
        for (j, row) in self.rows.iter().enumerate() {
            for &(l, v) in row {
                out[j][l] = v;
            }
        }
        out
    }

    pub fn with_family(mut self, family: OperatorFamily) -> Self {
        self.family = family;
        self
    }
}

pub fn identity(dim: usize) -> SparseOperator {
    SparseOperator::from_oracle(
        dim,
        |j| vec![(j, Complex64::new(1.0, 0.0))],
        OperatorFamily::Identity { dim },
    )
    .expect("identity rows are in range")
}

pub fn diagonal(values: &[f64]) -> SparseOperator {
    SparseOperator::from_oracle(
        values.len(),
        |j| vec![(j, Complex64::new(values[j], 0.0))],
        OperatorFamily::Diagonal {
            values: values.to_vec(),
        },
    )
    .expect("diagonal rows are in range")
}

pub fn laplacian_1d(dim: usize) -> SparseOperator {
    SparseOperator::from_oracle(
        dim,
        |j| {
            let mut row = vec![(j, Complex64::new(2.0, 0.0))];
            if j > 0 {
                row.push((j - 1, Complex64::new(-1.0, 0.0)));
            }
            if j + 1 < dim {
                row.push((j + 1, Complex64::new(-1.0, 0.0)));
            }
            row
        },
        OperatorFamily::Laplacian1d { dim },
    )
    .expect("laplacian rows are in range")
}

pub fn transverse_field_ising(sites: u32, coupling: f64, field: f64) -> SparseOperator {
    let dim = 1usize << sites;
    SparseOperator::from_oracle(
        dim,
        |j| {
            let z = |i: u32| if (j >> i) & 1 == 0 { 1.0 } else { -1.0 };
            let zz: f64 = (0..sites.saturating_sub(1)).map(|i| z(i) * z(i + 1)).sum();
            let mut row = vec![(j, Complex64::new(-coupling * zz, 0.0))];
            for i in 0..sites {
                row.push((j ^ (1 << i), Complex64::new(-field, 0.0)));
            }
            row
        },
        OperatorFamily::TransverseFieldIsing {
            sites,
            coupling,
            field,
        },
    )
    .expect("ising rows are in range")
}

/// Random Hermitian matrix: a diagonal plus random undirected edges, each
/// row holding at most `sparsity` nonzeros.
pub fn random_hermitian(dim: usize, sparsity: usize, seed: u64, complex: bool) -> Result<SparseOperator> {
    if sparsity == 0 || dim == 0 {
        return Err(Error::Domain("random operator needs dim > 0 and sparsity > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Row> = (0..dim)
        .map(|j| vec![(j, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))])
        .collect();
    let max_off = sparsity - 1;
    if max_off > 0 && dim > 1 {
        let attempts = dim * max_off * 2;
        for _ in 0..attempts {
            let j = rng.gen_range(0..dim);
            let l = rng.gen_range(0..dim);
            if j == l || rows[j].len() > max_off || rows[l].len() > max_off {
                continue;
            }
            if rows[j].iter().any(|(c, _)| *c == l) {
                continue;
            }
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            let v = Complex64::new(re, im);
            rows[j].push((l, v));
            rows[l].push((j, v.conj()));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|(c, _)| *c);
    }
    Ok(SparseOperator::from_rows(
        rows,
        OperatorFamily::RandomHermitian {
            dim,
            sparsity,
            seed,
            complex,
        },
    ))
}
