//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues of a Hermitian matrix, descending, with round-off negatives
/// clamped to zero.
pub fn hermitian_eigenvalues(m: CMatrix) -> Vec<f64> {
    debug_assert!(m.is_square());
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re.max(0.0)];
    }
    let mut values: Vec<f64> = m
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| v.max(0.0))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Squared singular values of `h` (eigenvalues of the smaller Gram matrix),
/// descending.
pub fn squared_singular_values(h: &CMatrix) -> Vec<f64> {
    if h.nrows() <= h.ncols() {
        hermitian_eigenvalues(h * h.adjoint())
    } else {
        hermitian_eigenvalues(h.adjoint() * h)
    }
}

/// `log2 det(I + h q h^H)` via Cholesky; `q` must be Hermitian PSD.
pub fn log2_det_identity_plus(h: &CMatrix, q: &CMatrix) -> Result<f64> {
    let n = h.nrows();
    let m = CMatrix::identity(n, n) + h * q * h.adjoint();
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("I + H Q H^H is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>() / std::f64::consts::LN_2)
}
