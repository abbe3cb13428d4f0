//! Transfer-function evaluation and transmission/blocking zeros.
//!
//! The transfer function of a passive system is
//! `G(s) = [I - C(sI-A)⁻¹C†]S`. A transmission zero is a point `z` where
//! `G(z)u = 0` for some direction `u`; a blocking zero has `G(z) = 0`
//! entirely. For this class every zero is an eigenvalue of `-A†`, every
//! eigenvalue of `-A†` is a zero with direction `u = S†Cv`, and a Hurwitz
//! drift guarantees at least one zero with `Re z > 0`. Zeros are therefore
//! enumerated through the eigendecomposition; evaluating `G` at each zero
//! serves only as a residual check.

use ndarray::s;
use ndarray_linalg::Solve;

use crate::model::PassiveSystem;
use crate::numerics::{adjoint, eig, fro_norm, identity, vec_norm, CMatrix, CVector, C64};
use crate::{Error, Result};

/// `‖G(z)u‖` (and, for blocking zeros, `‖G(z)‖_F`) must fall below this
/// fraction of `‖S‖_F` for the zero to count.
pub const BLOCKING_TOL: f64 = 1e-8;

/// One transmission zero of the transfer function.
///
/// Two parameterizations of the same zero direction are kept. The raw pair
/// `(u_raw, v_raw)` follows the eigenvector convention: `v_raw` is the
/// unit-norm eigenvector of `-A†` and `u_raw = S†C v_raw` is left unscaled.
/// The canonical pair `(u, v)` rescales both by the same factor so that `u`
/// has unit norm with its dominant component real nonnegative while the
/// identity `u = S†C v` still holds exactly as computed.
#[derive(Debug, Clone)]
pub struct ZeroRecord {
    /// The zero location; `Re z > 0` for validated systems.
    pub z: C64,
    /// Canonical zero direction, unit norm.
    pub u: CVector,
    /// Eigenvector of `-A†` scaled so `S†C v = u`.
    pub v: CVector,
    /// Unscaled zero direction `S†C v_raw`.
    pub u_raw: CVector,
    /// Unit-norm eigenvector of `-A†`.
    pub v_raw: CVector,
    /// `‖G(z)u‖₂`.
    pub residual: f64,
    /// Whether `G(z)` vanishes as a whole matrix.
    pub is_blocking: bool,
    /// Set when other records share this zero location. The eigenspace then
    /// has dimension > 1 and the reported directions are one orthonormal
    /// choice of basis, not canonical.
    pub degenerate: bool,
}

fn pole_tolerance(sys: &PassiveSystem) -> f64 {
    1e-9 * (1.0 + fro_norm(&sys.drift_matrix()))
}

fn resolvent_times(sys: &PassiveSystem, s_point: C64, rhs: &CMatrix) -> Result<CMatrix> {
    let a = sys.drift_matrix();
    let n = sys.modes();
    let spectrum = eig(&a)?;
    let tol = pole_tolerance(sys);
    for &pole in spectrum.values.iter() {
        let distance = (s_point - pole).norm();
        if distance <= tol {
            return Err(Error::PoleProximity {
                s: s_point,
                pole,
                distance,
                tol,
            });
        }
    }
    let shifted = identity(n).mapv(|z| z * s_point) - &a;
    let mut out = CMatrix::zeros(rhs.dim());
    for j in 0..rhs.ncols() {
        let col = shifted
            .solve(&rhs.slice(s![.., j]).to_owned())
            .map_err(|e| {
                Error::Numerical(format!("resolvent solve failed at s = {s_point}: {e}"))
            })?;
        out.slice_mut(s![.., j]).assign(&col);
    }
    Ok(out)
}

/// Evaluate `G(s) = [I - C(sI-A)⁻¹C†]S` by linear solve (no explicit
/// inverse). Errors when `s` sits within the pole tolerance of an
/// eigenvalue of `A`.
pub fn transfer_at(sys: &PassiveSystem, s_point: C64) -> Result<CMatrix> {
    let c = sys.coupling();
    let x = resolvent_times(sys, s_point, &adjoint(c))?;
    let m = sys.channels();
    Ok((identity(m) - c.dot(&x)).dot(sys.scattering()))
}

/// The matrix `V = (zI-A)⁻¹ C† S`. At a blocking zero `CV = S`; at a
/// transmission zero with direction `u`, `CVu = Su` and `v = Vu`.
pub fn v_matrix(sys: &PassiveSystem, z: C64) -> Result<CMatrix> {
    let rhs = adjoint(sys.coupling()).dot(sys.scattering());
    resolvent_times(sys, z, &rhs)
}

/// All transmission zeros, one record per eigenpair of `-A†` (multiplicity
/// included), sorted like the eigendecomposition. Never empty for a
/// validated system.
pub fn transmission_zeros(sys: &PassiveSystem) -> Result<Vec<ZeroRecord>> {
    sys.ensure_valid()?;
    let a = sys.drift_matrix();
    let minus_a_dag = adjoint(&a).mapv(|z| -z);
    let decomp = eig(&minus_a_dag)?;
    let s_norm = fro_norm(sys.scattering());
    let front = adjoint(sys.scattering()).dot(sys.coupling());

    let mut records = Vec::with_capacity(decomp.len());
    for i in 0..decomp.len() {
        let z = decomp.values[i];
        let v_raw = decomp.vector(i);
        let u_raw = front.dot(&v_raw);
        let scale = vec_norm(&u_raw);
        if scale < 1e-14 {
            return Err(Error::Numerical(format!(
                "zero direction S†Cv vanished at z = {z}; the mode is decoupled from the field"
            )));
        }
        // Rotate the dominant component of u to the nonnegative real axis
        // and normalize, applying the same factor to v so u = S†Cv survives.
        let mut dominant = 0usize;
        let mut best = 0.0f64;
        for (k, comp) in u_raw.iter().enumerate() {
            if comp.norm() > best * (1.0 + 1e-12) {
                best = comp.norm();
                dominant = k;
            }
        }
        let phase = u_raw[dominant] / best;
        let rescale = phase.conj() / scale;
        let u = u_raw.mapv(|c| c * rescale);
        let v = v_raw.mapv(|c| c * rescale);

        let g = transfer_at(sys, z)?;
        let residual = vec_norm(&g.dot(&u));
        if residual > BLOCKING_TOL * s_norm {
            return Err(Error::Numerical(format!(
                "zero residual ‖G(z)u‖ = {residual:.3e} at z = {z} exceeds {:.3e}",
                BLOCKING_TOL * s_norm
            )));
        }
        let is_blocking = fro_norm(&g) <= BLOCKING_TOL * s_norm;

        records.push(ZeroRecord {
            z,
            u,
            v,
            u_raw,
            v_raw,
            residual,
            is_blocking,
            degenerate: false,
        });
    }
    for i in 0..records.len() {
        let shared = records.iter().enumerate().any(|(j, other)| {
            j != i && (other.z - records[i].z).norm() <= crate::numerics::EIG_GROUP_TOL
        });
        records[i].degenerate = shared;
    }
    Ok(records)
}

/// The subset of [`transmission_zeros`] where `G(z)` vanishes entirely.
/// May be empty.
pub fn blocking_zeros(sys: &PassiveSystem) -> Result<Vec<ZeroRecord>> {
    Ok(transmission_zeros(sys)?
        .into_iter()
        .filter(|r| r.is_blocking)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{beam_splitter, single_mode_cavity, PassiveSystem};
    use crate::numerics::{c64, identity, inner};
    use ndarray::array;

    fn example_pair(c1: f64, c2: f64, alpha: f64, beta: f64) -> PassiveSystem {
        let s1 = single_mode_cavity(0.0, c64(c1, 0.0)).unwrap();
        let s2 = single_mode_cavity(0.0, c64(c2, 0.0)).unwrap();
        s1.direct_sum(&s2)
            .unwrap()
            .prepend_scattering(&beam_splitter(alpha, beta).unwrap())
            .unwrap()
    }

    fn ring_resonator(g1: f64, g2: f64, alpha: f64, beta: f64) -> PassiveSystem {
        PassiveSystem::new(
            array![[c64(0.0, 0.0)]],
            array![[c64(g1.sqrt(), 0.0)], [c64(g2.sqrt(), 0.0)]],
            identity(2),
        )
        .unwrap()
        .prepend_scattering(&beam_splitter(alpha, beta).unwrap())
        .unwrap()
    }

    #[test]
    fn siso_transfer_matches_rational_form() {
        // G(s) = (s - A₁ - |C₁|²)/(s - A₁) for a single cavity.
        let c1 = 1.3;
        let sys = single_mode_cavity(0.4, c64(c1, 0.0)).unwrap();
        let a = sys.drift_matrix()[(0, 0)];
        for s_point in [c64(1.0, 0.0), c64(0.3, -2.0), c64(-0.1, 5.0)] {
            let g = transfer_at(&sys, s_point).unwrap();
            let expected = (s_point - a - c1 * c1) / (s_point - a);
            assert!((g[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn transfer_tends_to_scattering_at_large_s() {
        let sys = example_pair(1.0, 2.0f64.sqrt(), 0.6, 0.8);
        let scale = fro_norm(&sys.drift_matrix());
        let g = transfer_at(&sys, c64(1e6 * scale, 0.0)).unwrap();
        assert!(fro_norm(&(g - sys.scattering())) <= 1e-4);
    }

    #[test]
    fn transfer_rejects_pole_proximity() {
        let sys = single_mode_cavity(0.0, c64(1.0, 0.0)).unwrap();
        let pole = sys.drift_matrix()[(0, 0)];
        match transfer_at(&sys, pole) {
            Err(Error::PoleProximity { pole: p, .. }) => {
                assert!((p - pole).norm() < 1e-14);
            }
            other => panic!("expected pole proximity, got {other:?}"),
        }
    }

    #[test]
    fn ring_transfer_matches_displayed_formula() {
        let (g1, g2, alpha, beta) = (1.0, 2.0, 0.6, 0.8);
        let sys = ring_resonator(g1, g2, alpha, beta);
        let bs = beam_splitter(alpha, beta).unwrap();
        for k in 0..10 {
            let s_point = c64(0.3 + 0.17 * k as f64, -1.0 + 0.29 * k as f64);
            let g = transfer_at(&sys, s_point).unwrap();
            let denom = s_point + (g1 + g2) / 2.0;
            let core = array![
                [
                    (s_point + (g2 - g1) / 2.0) / denom,
                    c64(-(g1 * g2).sqrt(), 0.0) / denom
                ],
                [
                    c64(-(g1 * g2).sqrt(), 0.0) / denom,
                    (s_point + (g1 - g2) / 2.0) / denom
                ]
            ];
            let expected = core.dot(&bs);
            assert!(fro_norm(&(g - expected)) < 1e-12);
        }
    }

    #[test]
    fn two_distinct_cavities_zero_records() {
        // z_j = A_j + |C_j|² with u₁ ∝ (α, β), u₂ ∝ (β, -α), v₁ ∝ (1/C₁, 0).
        let (c1, c2, alpha, beta) = (1.0, 2.0f64.sqrt(), 0.6, 0.8);
        let sys = example_pair(c1, c2, alpha, beta);
        let records = transmission_zeros(&sys).unwrap();
        assert_eq!(records.len(), 2);

        // Sorted by descending real part: z = 1.0 then z = 0.5.
        assert!((records[0].z - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((records[1].z - c64(0.5, 0.0)).norm() < 1e-12);

        let u1 = &records[1].u;
        assert!((u1[0] - c64(alpha, 0.0)).norm() < 1e-10);
        assert!((u1[1] - c64(beta, 0.0)).norm() < 1e-10);
        let u2 = &records[0].u;
        assert!((u2[0] - c64(beta, 0.0)).norm() < 1e-10);
        assert!((u2[1] - c64(-alpha, 0.0)).norm() < 1e-10);

        let v1 = &records[1].v;
        assert!((v1[0] - c64(1.0 / c1, 0.0)).norm() < 1e-10);
        assert!(v1[1].norm() < 1e-12);

        // u = S†Cv as computed.
        for r in &records {
            let front = adjoint(sys.scattering()).dot(sys.coupling());
            assert!(vec_norm(&(front.dot(&r.v) - &r.u)) < 1e-12);
        }
        // Neither zero blocks: the off-block transfer stays finite.
        assert!(records.iter().all(|r| !r.is_blocking));
        assert!(records.iter().all(|r| !r.degenerate));
    }

    #[test]
    fn identical_cavities_give_blocking_zero() {
        let sys = example_pair(1.0, 1.0, 0.6, 0.8);
        let records = transmission_zeros(&sys).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| (r.z - c64(0.5, 0.0)).norm() < 1e-10));
        assert!(records.iter().all(|r| r.is_blocking));
        assert!(records.iter().all(|r| r.degenerate));
        let blocking = blocking_zeros(&sys).unwrap();
        assert_eq!(blocking.len(), 2);
        // Degenerate eigenspace comes back orthonormal.
        assert!(inner(&records[0].v_raw, &records[1].v_raw).norm() < 1e-10);
    }

    #[test]
    fn ring_resonator_has_no_blocking_zero() {
        let sys = ring_resonator(1.0, 2.0, 0.6, 0.8);
        let records = transmission_zeros(&sys).unwrap();
        assert_eq!(records.len(), 1);
        assert!((records[0].z - c64(1.5, 0.0)).norm() < 1e-12);
        assert!(!records[0].is_blocking);
        assert!(blocking_zeros(&sys).unwrap().is_empty());

        // u_raw is the beam-splitter image of (√γ₁, √γ₂).
        let expected = array![
            c64(0.6 * 1.0 + 0.8 * 2.0f64.sqrt(), 0.0),
            c64(0.8 * 1.0 - 0.6 * 2.0f64.sqrt(), 0.0)
        ];
        let r = &records[0];
        let align = inner(&r.u_raw, &expected).norm() / (vec_norm(&r.u_raw) * vec_norm(&expected));
        assert!((align - 1.0).abs() < 1e-12);
    }

    #[test]
    fn siso_blocking_equals_transmission() {
        let sys = single_mode_cavity(0.2, c64(1.1, 0.0)).unwrap();
        let trans = transmission_zeros(&sys).unwrap();
        let block = blocking_zeros(&sys).unwrap();
        assert_eq!(trans.len(), 1);
        assert_eq!(block.len(), 1);
        assert!(trans[0].is_blocking);
    }

    #[test]
    fn v_matrix_identities() {
        // Identical subsystems: V = (1/C₁)·S_bs, and CV = S at the blocking zero.
        let (c1, alpha, beta) = (1.4, 0.6, 0.8);
        let sys = example_pair(c1, c1, alpha, beta);
        let records = transmission_zeros(&sys).unwrap();
        let z = records[0].z;
        let v = v_matrix(&sys, z).unwrap();
        let bs = beam_splitter(alpha, beta).unwrap();
        assert!(fro_norm(&(v.clone() - bs.mapv(|w| w / c64(c1, 0.0)))) < 1e-10);
        assert!(fro_norm(&(sys.coupling().dot(&v) - sys.scattering())) < 1e-10);
    }

    #[test]
    fn v_matrix_maps_u_to_v() {
        let sys = example_pair(1.0, 2.0f64.sqrt(), 0.6, 0.8);
        for r in transmission_zeros(&sys).unwrap() {
            let v = v_matrix(&sys, r.z).unwrap();
            assert!(vec_norm(&(v.dot(&r.u) - &r.v)) < 1e-10);
        }
    }

    #[test]
    fn v_matrix_reconstruction_residual() {
        let sys = example_pair(1.0, 2.0f64.sqrt(), 0.6, 0.8);
        let z = c64(0.9, 1.7);
        let v = v_matrix(&sys, z).unwrap();
        let a = sys.drift_matrix();
        let lhs = (identity(2).mapv(|w| w * z) - &a).dot(&v);
        let rhs = adjoint(sys.coupling()).dot(sys.scattering());
        assert!(fro_norm(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn invalid_system_is_rejected() {
        let sys = PassiveSystem::new(
            array![[c64(1.0, 0.0)]],
            array![[c64(0.0, 0.0)]],
            identity(1),
        )
        .unwrap();
        assert!(matches!(
            transmission_zeros(&sys),
            Err(Error::Precondition(_))
        ));
    }
}
