//! Dense complex matrix helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const SVD_MAX_ITERATIONS: usize = 10_000;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diagonal(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}

/// Full singular value decomposition `m = P Σ Q†`.
pub struct Svd {
    pub left: CMatrix,
    pub singular_values: Vec<f64>,
    pub right_adjoint: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::Numerical("singular value decomposition did not converge"))?;
    Ok(Svd {
        left: svd.u.expect("left vectors were requested"),
        singular_values: svd.singular_values.iter().copied().collect(),
        right_adjoint: svd.v_t.expect("right vectors were requested"),
    })
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    m.clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .map(|s| s.singular_values.iter().copied().collect())
        .ok_or(Error::Numerical("singular value decomposition did not converge"))
}

/// Operator norm for the standard inner product: the largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m)
        .expect("singular values of a finite matrix")
        .into_iter()
        .fold(0.0, f64::max)
}

pub fn min_singular_value(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Positive square root of a positive-definite Hermitian matrix.
pub fn sqrt_positive(m: &CMatrix) -> Result<CMatrix> {
    let (values, q) = hermitian_eigen(m);
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let roots: Vec<Complex64> = values.iter().map(|&v| c(libm::sqrt(v))).collect();
    Ok(hermitian_part(&(&q * diagonal(&roots) * q.adjoint())))
}

/// Upper-triangular `R` with `m = R† R`.
pub fn cholesky_upper(m: &CMatrix) -> Result<CMatrix> {
    let l = hermitian_part(m).cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    // A negative pivot shows up as an imaginary diagonal entry.
    if l.diagonal().iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(l.adjoint())
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(Error::Numerical("matrix is not invertible"))
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).norm()))
}

/// Block-diagonal matrix from square blocks.
pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_and_cholesky_factor() {
        let s = diagonal(&[c(4.0), c(1.0)]);
        let r = sqrt_positive(&s).unwrap();
        assert!(max_abs_diff(&r, &diagonal(&[c(2.0), c(1.0)])) < 1e-14);
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5), c(3.0)]);
        let u = cholesky_upper(&m).unwrap();
        assert!(max_abs_diff(&(u.adjoint() * &u), &m) < 1e-14);
        assert_eq!(u[(1, 0)], c(0.0));
        assert!(cholesky_upper(&diagonal(&[c(1.0), c(-1.0)])).is_err());
        assert!(sqrt_positive(&diagonal(&[c(1.0), c(0.0)])).is_err());
    }

    #[test]
    fn norms_and_eigenvalues() {
        let m = diagonal(&[c(-3.0), c(2.0)]);
        assert!((op_norm(&m) - 3.0).abs() < 1e-14);
        assert!((min_eigenvalue(&m) + 3.0).abs() < 1e-14);
        let b = block_diagonal(&[diagonal(&[c(1.0)]), diagonal(&[c(5.0), c(2.0)])]);
        assert_eq!(b.nrows(), 3);
        assert!((op_norm(&b) - 5.0).abs() < 1e-14);
    }
}
