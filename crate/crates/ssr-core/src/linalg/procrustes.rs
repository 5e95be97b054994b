//! Orthogonal Procrustes alignment.
//!
//! Given X and H̄ of equal shape, the rotation maximizing trace(Rᵀ·X·H̄ᵀ) is
//! R = U·V where X·H̄ᵀ = U·diag(S)·V. Reflections are admissible: the caller
//! only ever consumes RᵀX, so we do not force det(R) = +1.

use crate::error::{Result, SsrError};
use crate::linalg::svd::compact_svd;
use crate::mat::Mat;

/// An r×r orthogonal matrix (RᵀR = I within 1e-10).
#[derive(Debug, Clone)]
pub struct RotationMatrix(Mat);

impl RotationMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(SsrError::validation("rotation matrix must be square"));
        }
        let dev = m.transpose().row_orthonormality_deviation();
        if dev > 1e-10 {
            return Err(SsrError::validation(format!(
                "matrix is not orthogonal: |R^T R - I| = {dev:.3e}"
            )));
        }
        Ok(RotationMatrix(m))
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn identity(r: usize) -> Self {
        RotationMatrix(Mat::identity(r))
    }
}

/// Solves max_R trace(Rᵀ X H̄ᵀ) over orthogonal R.
///
/// A rank-deficient cross-product still yields a valid rotation: the SVD
/// completes the missing singular directions deterministically.
pub fn procrustes_rotation(x: &Mat, hbar: &Mat) -> Result<RotationMatrix> {
    if x.shape() != hbar.shape() {
        return Err(SsrError::validation(format!(
            "procrustes operands must share a shape, got {:?} vs {:?}",
            x.shape(),
            hbar.shape()
        )));
    }
    let m = x.matmul_transb(hbar);
    if !m.all_finite() {
        return Err(SsrError::validation(
            "procrustes cross-product is not finite",
        ));
    }
    let f = compact_svd(&m)?;
    let r = f.u.matmul(&f.v);
    // By construction R = U·V is orthogonal up to roundoff; the constructor
    // re-checks the 1e-10 contract.
    RotationMatrix::new(r)
}
