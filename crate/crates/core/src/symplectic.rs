//! Symplectic spectra of covariance matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symplectic form for the `(q_1..q_n, p_1..p_n)` ordering.
pub fn form_block(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Symplectic form for the `(q_1, p_1, q_2, p_2, ...)` ordering.
pub fn form_interleaved(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Symplectic eigenvalues of a positive-definite covariance matrix, ascending.
///
/// They are the singular values of `V^{1/2} J V^{1/2}`, each appearing twice;
/// one copy of each is returned. With `ħ = 1` a physical state has all values
/// at least 1/2.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>, form: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows();
    if n % 2 != 0 || cov.ncols() != n || form.shape() != (n, n) {
        return Err(Error::Numerical(format!(
            "covariance of shape {:?} has no symplectic spectrum",
            cov.shape()
        )));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::Numerical(format!(
            "covariance is not positive definite (eigenvalue {min:e})"
        )));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let k = &root * form * &root;
    let m = k.transpose() * &k;
    let mut sq: Vec<f64> = SymmetricEigen::new((&m + m.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sq.sort_by(f64::total_cmp);
    Ok(sq.chunks(2).map(|c| c[0].max(0.0).sqrt()).collect())
}
