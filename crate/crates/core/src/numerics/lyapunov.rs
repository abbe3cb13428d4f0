//! Continuous Lyapunov equation `AX + XA† + Q = 0`.
//!
//! Solved through the Kronecker form `(I⊗A + Ā⊗I) vec(X) = -vec(Q)`; at the
//! mode counts this crate deals with, the n²×n² solve is far below any
//! performance concern and avoids a Schur reduction.

use ndarray_linalg::Solve;

use super::{
    adjoint, check_square, conjugate, eig, fro_norm, hermiticity_defect, identity, kron, CMatrix,
    CVector, C64, STRUCTURAL_TOL,
};
use crate::{Error, Result};

/// Solve `AX + XA† + Q = 0` for Hermitian `X`.
///
/// `A` must be Hurwitz and `Q` Hermitian; then `X = ∫₀^∞ e^{At} Q e^{A†t} dt`
/// is the unique solution.
pub fn solve_lyapunov(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    check_square(a, "Lyapunov A")?;
    check_square(q, "Lyapunov Q")?;
    let n = a.nrows();
    if q.nrows() != n {
        return Err(Error::Dimension(format!(
            "Lyapunov: A is {n}x{n} but Q is {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros((0, 0)));
    }
    let q_norm = fro_norm(q);
    if hermiticity_defect(q) > STRUCTURAL_TOL * q_norm.max(1.0) {
        return Err(Error::Precondition(
            "Lyapunov right-hand side Q is not Hermitian".into(),
        ));
    }
    let spectrum = eig(a)?;
    let max_re = spectrum.max_real();
    if max_re >= 0.0 {
        return Err(Error::Precondition(format!(
            "Lyapunov A is not Hurwitz: max Re λ = {max_re:.3e}"
        )));
    }

    // vec stacks columns: vec(AX) = (I⊗A)vec(X), vec(XA†) = (Ā⊗I)vec(X).
    let op = kron(&identity(n), a) + kron(&conjugate(a), &identity(n));
    let mut rhs = CVector::zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            rhs[j * n + i] = -q[(i, j)];
        }
    }
    let x_vec = op
        .solve(&rhs)
        .map_err(|e| Error::Numerical(format!("Lyapunov linear solve failed: {e}")))?;
    let mut x = CMatrix::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            x[(i, j)] = x_vec[j * n + i];
        }
    }
    // The exact solution is Hermitian; symmetrize away rounding.
    let x = (&x + &adjoint(&x)).mapv(|z| z * C64::from(0.5));

    let residual = fro_norm(&(a.dot(&x) + x.dot(&adjoint(a)) + q));
    let bound = 1e-10 * q_norm.max(f64::MIN_POSITIVE);
    if residual > bound {
        return Err(Error::Numerical(format!(
            "Lyapunov residual {residual:.3e} exceeds {bound:.3e} \
             (‖Q‖_F = {q_norm:.3e}); A is likely too close to the imaginary axis"
        )));
    }
    Ok(x)
}
