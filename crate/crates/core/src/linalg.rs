//! Thin complex linear-algebra layer over `nalgebra`.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{BeamformError, Result};

pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub(crate) fn check_len(v: &CVector, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(BeamformError::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Adds `relative · trace(R)/n` to the diagonal of a square Hermitian matrix.
pub fn load_diagonal(r: &mut CMatrix, relative: f64) {
    let n = r.nrows();
    if n == 0 {
        return;
    }
    let mean_diag = r.diagonal().iter().map(|z| z.re).sum::<f64>() / n as f64;
    let delta = relative * mean_diag;
    for k in 0..n {
        r[(k, k)] += C64::new(delta, 0.0);
    }
}

/// Cholesky factorization of a Hermitian positive-definite matrix; the
/// returned factor solves systems against it.
pub(crate) fn hpd_factor(
    r: CMatrix,
    context: &'static str,
) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(BeamformError::Numerical(format!("non-finite entries in {context}")));
    }
    nalgebra::Cholesky::new(r).ok_or(BeamformError::Singular(context))
}

/// Frobenius norm of `TᴴT − I`.
pub fn orthonormality_error(t: &CMatrix) -> f64 {
    let gram = t.adjoint() * t;
    let eye = CMatrix::identity(gram.nrows(), gram.ncols());
    (gram - eye).norm()
}

/// Orthogonal projector onto the column span of `t` (columns need not be
/// orthonormal; assumes full column rank).
pub fn span_projector(t: &CMatrix) -> Result<CMatrix> {
    let gram = t.adjoint() * t;
    let chol = hpd_factor(gram, "span projector Gram matrix")?;
    let coeffs = chol.solve(&t.adjoint());
    Ok(t * coeffs)
}

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
