//! Dense linear algebra for desk-scale problems.
//!
//! Backed by nalgebra. Used for a-priori spectral information (eigenvalue
//! bounds of `A^dagger A`, excitation gaps) and as the reference side in
//! tests. Everything here is `O(N^3)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Largest dimension the dense helpers accept.
pub const DESK_SCALE_LIMIT: usize = 4096;

fn check_size(dim: usize) -> Result<()> {
    if dim > DESK_SCALE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DESK_SCALE_LIMIT,
        });
    }
    Ok(())
}

pub fn to_matrix(op: &SparseOperator) -> DMatrix<Complex64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    for (j, row) in op.rows().iter().enumerate() {
        for &(l, v) in row {
            m[(j, l)] = v;
        }
    }
    m
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues(op: &SparseOperator) -> Result<Vec<f64>> {
    check_size(op.dim())?;
    op.require_hermitian()?;
    let eig = to_matrix(op).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Ascending eigenpairs of a Hermitian operator; eigenvectors are columns.
pub fn hermitian_eigen(op: &SparseOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    check_size(op.dim())?;
    op.require_hermitian()?;
    let eig = to_matrix(op).symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(op.dim(), op.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// `(min, max)` eigenvalue of `A^dagger A`, i.e. squared extreme singular values.
pub fn gram_eigen_bounds(op: &SparseOperator) -> Result<(f64, f64)> {
    check_size(op.dim())?;
    let sv = to_matrix(op).singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min * min, max * max))
}

/// Direct solve by LU with partial pivoting.
pub fn lu_solve(op: &SparseOperator, b: &[Complex64]) -> Result<Vec<Complex64>> {
    check_size(op.dim())?;
    if b.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: b.len(),
        });
    }
    let rhs = DVector::from_column_slice(b);
    to_matrix(op)
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or(Error::SingularOperator {
            contraction: f64::INFINITY,
        })
}

/// `f(A) b` for Hermitian `A` by eigendecomposition.
pub fn hermitian_function_apply<F>(op: &SparseOperator, b: &[Complex64], f: F) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> f64,
{
    let (vals, vecs) = hermitian_eigen(op)?;
    let rhs = DVector::from_column_slice(b);
    let coeffs = vecs.adjoint() * rhs;
    let scaled = DVector::from_iterator(
        vals.len(),
        coeffs.iter().zip(&vals).map(|(c, &l)| c * f(l)),
    );
    Ok((vecs * scaled).iter().copied().collect())
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
