//! Dense complex linear algebra and integration primitives.
//!
//! Everything here works on [`CMatrix`]/[`CVector`] (dynamically sized,
//! `Complex64` entries). Matrices are tiny in this problem domain (mode and
//! channel counts of a few), so the routines favor robustness and
//! determinism over asymptotic cleverness. All equality checks are
//! tolerance-based with the tolerance an explicit argument.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

mod eig;
mod expm;
mod lyapunov;
mod ode;

pub use eig::{eig, EigenDecomposition, EIG_GROUP_TOL};
pub use expm::{expm, expm_action, EXPM_NORM_LIMIT};
pub use lyapunov::solve_lyapunov;
pub use ode::{integrate_ode, OdeTrajectory};

/// Complex double-precision scalar.
pub type C64 = Complex64;
/// Dense complex matrix, row-major.
pub type CMatrix = Array2<C64>;
/// Dense complex vector.
pub type CVector = Array1<C64>;

/// Structural comparisons (hermiticity, unitarity) default to this tolerance.
pub const STRUCTURAL_TOL: f64 = 1e-9;

/// Shorthand complex constructor.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hermitian conjugate `M†`.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// Elementwise conjugate `M♯` (no transpose).
pub fn conjugate(m: &CMatrix) -> CMatrix {
    m.mapv(|z| z.conj())
}

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a vector.
pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `⟨a, b⟩ = a†b`.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `n×n` identity.
pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}

/// Entrywise equality within `tol`, measured in Frobenius norm.
pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.dim() == b.dim() && fro_norm(&(a - b)) <= tol
}

/// `‖M - M†‖_F`; zero for Hermitian matrices.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    fro_norm(&(m - &adjoint(m)))
}

/// `‖M†M - I‖_F`; zero for unitary matrices.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.ncols();
    fro_norm(&(adjoint(m).dot(m) - identity(n)))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// True when every entry is finite.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// True when every component is finite.
pub fn vec_finite(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn check_square(m: &CMatrix, what: &str) -> crate::Result<()> {
    if m.nrows() != m.ncols() {
        return Err(crate::Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_conjugate_roundtrip() {
        let m = ndarray::array![
            [c64(1.0, 2.0), c64(0.0, -1.0)],
            [c64(3.0, 0.5), c64(-2.0, 4.0)]
        ];
        assert_eq!(adjoint(&adjoint(&m)), m);
        assert_eq!(conjugate(&conjugate(&m)), m);
        // M† = conj(Mᵀ)
        assert_eq!(adjoint(&m), conjugate(&m.t().to_owned()));
    }

    #[test]
    fn kron_dimensions_and_values() {
        let a = ndarray::array![[c64(1.0, 0.0), c64(2.0, 0.0)]];
        let b = ndarray::array![[c64(0.0, 1.0)], [c64(3.0, 0.0)]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (2, 2));
        assert_eq!(k[(0, 1)], c64(0.0, 2.0));
        assert_eq!(k[(1, 0)], c64(3.0, 0.0));
    }

    #[test]
    fn defects_on_constructed_cases() {
        let h = ndarray::array![
            [c64(1.0, 0.0), c64(0.0, 1.0)],
            [c64(0.0, -1.0), c64(2.0, 0.0)]
        ];
        assert!(hermiticity_defect(&h) < 1e-15);
        let s = ndarray::array![
            [c64(1.0, 0.0), c64(0.0, 0.0)],
            [c64(0.0, 0.0), c64(2.0, 0.0)]
        ];
        // S†S - I = diag(0, 3)
        assert!((unitarity_defect(&s) - 3.0).abs() < 1e-14);
    }
}
