//! The passive linear quantum system realization `(Ω, C, S)`.
//!
//! A system with `n` internal modes and `m` input/output channels is fixed
//! by an `n×n` Hermitian matrix `Ω` (units of angular frequency), an `m×n`
//! coupling matrix `C` (units of √(angular frequency)) and an `m×m` unitary
//! scattering matrix `S`. The drift matrix `A = -iΩ - C†C/2` then satisfies
//! `A + A† = -C†C` identically; every analysis in this crate additionally
//! requires `A` to be Hurwitz.

use crate::numerics::{
    adjoint, all_finite, c64, eig, hermiticity_defect, identity, unitarity_defect, CMatrix, C64,
    STRUCTURAL_TOL,
};
use crate::{Error, Result};

/// Eigenvalues of `A` must sit at least this far left of the imaginary axis.
///
/// Decoupled modes (a zero row of `C` against a nonzero `Ω`) produce purely
/// oscillatory dynamics and must be rejected loudly rather than silently
/// producing zeros on the imaginary axis.
pub const HURWITZ_MARGIN: f64 = 1e-12;

/// A passive linear quantum system, immutable after construction.
///
/// `C` is stored as `m×n`: row = channel, column = mode. Construction
/// checks dimensions and finiteness only; structural properties (Ω Hermitian,
/// S unitary, A Hurwitz) are checked by [`PassiveSystem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveSystem {
    omega: CMatrix,
    coupling: CMatrix,
    scattering: CMatrix,
}

/// Outcome of the structural checks on a [`PassiveSystem`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// `‖Ω - Ω†‖_F`.
    pub hermiticity_defect: f64,
    /// `‖S†S - I‖_F`.
    pub unitarity_defect: f64,
    /// `-max Re λ(A)`; positive for Hurwitz drift.
    pub hurwitz_margin_found: f64,
    pub passed: bool,
    pub messages: Vec<String>,
}

impl PassiveSystem {
    pub fn new(omega: CMatrix, coupling: CMatrix, scattering: CMatrix) -> Result<Self> {
        let n = omega.nrows();
        if omega.ncols() != n {
            return Err(Error::Dimension(format!(
                "omega must be square, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        let m = coupling.nrows();
        if coupling.ncols() != n {
            return Err(Error::Dimension(format!(
                "coupling must be m x n = {m}x{n}, got {}x{}",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if scattering.dim() != (m, m) {
            return Err(Error::Dimension(format!(
                "scattering must be {m}x{m}, got {}x{}",
                scattering.nrows(),
                scattering.ncols()
            )));
        }
        if !all_finite(&omega) || !all_finite(&coupling) || !all_finite(&scattering) {
            return Err(Error::Precondition(
                "system matrices contain non-finite entries".into(),
            ));
        }
        Ok(Self {
            omega,
            coupling,
            scattering,
        })
    }

    /// Number of internal modes `n`.
    pub fn modes(&self) -> usize {
        self.omega.nrows()
    }

    /// Number of input/output channels `m`.
    pub fn channels(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn scattering(&self) -> &CMatrix {
        &self.scattering
    }

    /// Drift matrix `A = -iΩ - C†C/2`.
    pub fn drift_matrix(&self) -> CMatrix {
        let minus_i = c64(0.0, -1.0);
        let ctc = adjoint(&self.coupling).dot(&self.coupling);
        self.omega.mapv(|z| z * minus_i) - ctc.mapv(|z| z * C64::from(0.5))
    }

    /// Structural checks: Ω Hermitian, S unitary, A Hurwitz.
    ///
    /// Never fails; problems become report entries. A nearly defective drift
    /// spectrum is flagged as a message without failing the report.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let herm = hermiticity_defect(&self.omega);
        let unit = unitarity_defect(&self.scattering);
        let mut messages = Vec::new();
        if herm > tol {
            messages.push(format!(
                "omega is not Hermitian: ‖Ω-Ω†‖_F = {herm:.3e} > {tol:.1e}"
            ));
        }
        if unit > tol {
            messages.push(format!(
                "scattering is not unitary: ‖S†S-I‖_F = {unit:.3e} > {tol:.1e}"
            ));
        }
        let margin = match eig(&self.drift_matrix()) {
            Ok(decomp) => {
                if decomp.nearly_defective {
                    messages.push(
                        "drift matrix spectrum is nearly defective; degenerate eigenvector \
                         directions may be ill-determined"
                            .into(),
                    );
                }
                if self.modes() == 0 {
                    f64::INFINITY
                } else {
                    -decomp.max_real()
                }
            }
            Err(e) => {
                messages.push(format!("drift eigendecomposition failed: {e}"));
                f64::NEG_INFINITY
            }
        };
        if margin <= HURWITZ_MARGIN {
            messages.push(format!(
                "drift matrix is not Hurwitz: margin {margin:.3e} ≤ {HURWITZ_MARGIN:.1e}"
            ));
        }
        let passed = herm <= tol && unit <= tol && margin > HURWITZ_MARGIN;
        ValidationReport {
            hermiticity_defect: herm,
            unitarity_defect: unit,
            hurwitz_margin_found: margin,
            passed,
            messages,
        }
    }

    /// Validate with the default structural tolerance, turning failure into
    /// a precondition error. Used by operations that require a valid system.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate(STRUCTURAL_TOL);
        if report.passed {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "system failed validation: {}",
                report.messages.join("; ")
            )))
        }
    }

    /// Block-diagonal composition of two systems: `n = n₁+n₂`, `m = m₁+m₂`.
    pub fn direct_sum(&self, other: &PassiveSystem) -> Result<PassiveSystem> {
        let omega = block_diag(&self.omega, &other.omega);
        let scattering = block_diag(&self.scattering, &other.scattering);
        let (m1, n1) = self.coupling.dim();
        let (m2, n2) = other.coupling.dim();
        let mut coupling = CMatrix::zeros((m1 + m2, n1 + n2));
        coupling
            .slice_mut(ndarray::s![..m1, ..n1])
            .assign(&self.coupling);
        coupling
            .slice_mut(ndarray::s![m1.., n1..])
            .assign(&other.coupling);
        PassiveSystem::new(omega, coupling, scattering)
    }

    /// Place a static scattering matrix on the inputs: `S ← S·S_static`,
    /// leaving `Ω` and `C` (hence `A` and the zero locations) unchanged. The
    /// transfer function becomes `G(s)·S_static`.
    pub fn prepend_scattering(&self, s_static: &CMatrix) -> Result<PassiveSystem> {
        let m = self.channels();
        if s_static.dim() != (m, m) {
            return Err(Error::Dimension(format!(
                "static scattering must be {m}x{m}, got {}x{}",
                s_static.nrows(),
                s_static.ncols()
            )));
        }
        let defect = unitarity_defect(s_static);
        if defect > STRUCTURAL_TOL {
            return Err(Error::Precondition(format!(
                "static scattering is not unitary: ‖S†S-I‖_F = {defect:.3e}"
            )));
        }
        PassiveSystem::new(
            self.omega.clone(),
            self.coupling.clone(),
            self.scattering.dot(s_static),
        )
    }
}

/// The two-channel beam-splitter matrix `[[α, β], [β, -α]]` with
/// transmissivity `α` and reflectivity `β`, `α² + β² = 1`.
pub fn beam_splitter(alpha: f64, beta: f64) -> Result<CMatrix> {
    let defect = (alpha * alpha + beta * beta - 1.0).abs();
    if defect > STRUCTURAL_TOL {
        return Err(Error::Precondition(format!(
            "beam splitter requires α² + β² = 1, got defect {defect:.3e}"
        )));
    }
    Ok(ndarray::array![
        [c64(alpha, 0.0), c64(beta, 0.0)],
        [c64(beta, 0.0), c64(-alpha, 0.0)]
    ])
}

fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMatrix::zeros((ar + br, ac + bc));
    out.slice_mut(ndarray::s![..ar, ..ac]).assign(a);
    out.slice_mut(ndarray::s![ar.., ac..]).assign(b);
    out
}

/// Single-mode, single-channel cavity with decay rate `|c|²` and detuning
/// `ω`. The workhorse building block for the worked examples.
pub fn single_mode_cavity(omega: f64, c: C64) -> Result<PassiveSystem> {
    PassiveSystem::new(
        ndarray::array![[c64(omega, 0.0)]],
        ndarray::array![[c]],
        identity(1),
    )
}
