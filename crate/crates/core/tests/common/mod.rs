//! Shared helpers for the integration and acceptance suites: seeded random
//! ensembles of valid passive systems and small assertion utilities.
#![allow(dead_code)]

use ndarray::s;
use photonxfer::model::PassiveSystem;
use photonxfer::numerics::{adjoint, c64, expm, CMatrix, CVector, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c64(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_shape_fn((rows, cols), |_| random_complex(rng, scale))
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_shape_fn(n, |_| random_complex(rng, 1.0));
        let norm = photonxfer::numerics::vec_norm(&v);
        if norm > 1e-3 {
            return v.mapv(|z| z / C64::from(norm));
        }
    }
}

/// Random unitary as `e^{iH}` with `H` Hermitian.
pub fn random_unitary(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    let r = random_matrix(rng, m, m, 1.0);
    let h = (&r + &adjoint(&r)).mapv(|z| z * C64::from(0.5));
    expm(&h.mapv(|z| z * c64(0.0, 1.0))).expect("e^{iH} of a small matrix")
}

/// Rejection-sample a valid system with a Hurwitz margin of at least
/// `margin_min` and drift eigenvalues bounded by `max_abs`. The bounds keep
/// truncation windows and step counts under control in long-running
/// ensembles.
///
/// With fewer channels than modes the damping matrix `C†C` is rank
/// deficient and the slowest mode decays only through Hamiltonian mixing,
/// so the margin requirement is relaxed proportionally.
pub fn random_system_with(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    margin_min: f64,
    max_abs: f64,
) -> PassiveSystem {
    let margin_min = margin_min * (2.0 * m as f64 / n as f64).min(1.0);
    let coupling_scale = 1.3 / (m as f64).sqrt();
    for _ in 0..100_000 {
        let r = random_matrix(rng, n, n, 0.4);
        let omega = (&r + &adjoint(&r)).mapv(|z| z * C64::from(0.5));
        let coupling = random_matrix(rng, m, n, coupling_scale);
        let scattering = random_unitary(rng, m);
        let Ok(sys) = PassiveSystem::new(omega, coupling, scattering) else {
            continue;
        };
        let report = sys.validate(1e-9);
        if !report.passed || report.hurwitz_margin_found < margin_min {
            continue;
        }
        let spectrum = photonxfer::numerics::eig(&sys.drift_matrix()).expect("drift eig");
        // Stiffness over margin bounds the step count of a propagation on
        // the truncated window; keep the ensembles affordable.
        if spectrum.max_abs() > max_abs || spectrum.max_abs() / report.hurwitz_margin_found > 18.0 {
            continue;
        }
        return sys;
    }
    panic!("failed to sample a system with n = {n}, m = {m}, margin ≥ {margin_min}");
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PassiveSystem {
    random_system_with(rng, n, m, 0.15, 2.5)
}

/// Random dimensions within the acceptance envelope (n ≤ 5, m ≤ 3).
pub fn random_dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (rng.random_range(1..=5), rng.random_range(1..=3))
}

pub fn angle_between(a: &CVector, b: &CVector) -> f64 {
    let na = photonxfer::numerics::vec_norm(a);
    let nb = photonxfer::numerics::vec_norm(b);
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let cos = (photonxfer::numerics::inner(a, b).norm() / (na * nb)).min(1.0);
    cos.acos()
}

/// Column `j` of a matrix as an owned vector.
pub fn column(m: &CMatrix, j: usize) -> CVector {
    m.slice(s![.., j]).to_owned()
}
