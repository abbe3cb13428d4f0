//! Matrix exponential by Padé-13 scaling and squaring.

use ndarray::s;
use ndarray_linalg::Solve;

use super::{all_finite, check_square, fro_norm, identity, vec_finite, CMatrix, CVector, C64};
use crate::{Error, Result};

/// `expm` refuses arguments with `‖M‖_F` beyond this; callers should shrink
/// the time window instead.
pub const EXPM_NORM_LIMIT: f64 = 1e4;

/// Degree-13 Padé coefficients for exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which the unscaled Padé-13 approximant is accurate
/// to double precision (Higham 2005).
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        let col_sum: f64 = m.column(j).iter().map(|z| z.norm()).sum();
        worst = worst.max(col_sum);
    }
    worst
}

/// `e^M` for a square complex matrix.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    check_square(m, "expm input")?;
    if !all_finite(m) {
        return Err(Error::Precondition(
            "expm input contains non-finite entries".into(),
        ));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros((0, 0)));
    }
    let norm = fro_norm(m);
    if norm > EXPM_NORM_LIMIT {
        return Err(Error::Range(format!(
            "‖M‖_F = {norm:.3e} exceeds {EXPM_NORM_LIMIT:.1e}; truncate the time window \
             (split the exponent) instead of evaluating e^M directly"
        )));
    }

    let squarings = {
        let n1 = one_norm(m);
        if n1 <= THETA13 {
            0
        } else {
            (n1 / THETA13).log2().ceil() as u32
        }
    };
    let a = m.mapv(|z| z / C64::from(2f64.powi(squarings as i32)));

    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let eye = identity(n);

    let b = |k: usize| C64::from(PADE13[k]);
    let u_inner = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|z| z * b(7))
            + a4.mapv(|z| z * b(5))
            + a2.mapv(|z| z * b(3))
            + eye.mapv(|z| z * b(1))),
    );
    let v_inner = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + eye.mapv(|z| z * b(0));

    // r = (V - U)^{-1} (V + U), solved column by column.
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = CMatrix::zeros((n, n));
    for j in 0..n {
        let col = lhs
            .solve(&rhs.slice(s![.., j]).to_owned())
            .map_err(|e| Error::Numerical(format!("expm Padé solve failed: {e}")))?;
        r.slice_mut(s![.., j]).assign(&col);
    }

    for _ in 0..squarings {
        r = r.dot(&r);
    }
    if !all_finite(&r) {
        return Err(Error::Range(format!(
            "e^M overflowed for ‖M‖_F = {norm:.3e}; truncate the time window"
        )));
    }
    Ok(r)
}

/// `e^{Mt} v` to relative accuracy ~1e-10 for `‖Mt‖_F ≤ 50`.
pub fn expm_action(m: &CMatrix, t: f64, v: &CVector) -> Result<CVector> {
    check_square(m, "expm_action matrix")?;
    if m.ncols() != v.len() {
        return Err(Error::Dimension(format!(
            "expm_action: matrix is {}x{} but vector has length {}",
            m.nrows(),
            m.ncols(),
            v.len()
        )));
    }
    if !t.is_finite() || !vec_finite(v) {
        return Err(Error::Precondition(
            "expm_action arguments must be finite".into(),
        ));
    }
    let e = expm(&m.mapv(|z| z * C64::from(t)))?;
    Ok(e.dot(v))
}
