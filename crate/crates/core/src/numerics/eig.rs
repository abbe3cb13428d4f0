//! Eigendecomposition of general complex matrices.
//!
//! Backed by LAPACK's `zgeev` (through `ndarray-linalg`), then
//! post-processed for determinism: eigenvalues are sorted by (real part
//! descending, imaginary part ascending), each eigenvector is unit-norm with
//! its largest-magnitude component rotated to the nonnegative real axis, and
//! eigenvalues closer than [`EIG_GROUP_TOL`] are treated as one group whose
//! vectors are re-orthonormalized by modified Gram–Schmidt.

use ndarray::s;
use ndarray_linalg::Eig as LapackEig;

use super::{all_finite, check_square, fro_norm, inner, vec_norm, CMatrix, CVector};
use crate::{Error, Result};

/// Eigenvalues within this absolute distance form one degenerate group.
pub const EIG_GROUP_TOL: f64 = 1e-8;

/// Vectors in a degenerate group whose Gram–Schmidt remainder falls below
/// this fraction of unity mark the group as (numerically) defective.
const DEFECT_FLOOR: f64 = 1e-6;

/// Full set of eigenpairs of a square complex matrix.
///
/// `values[i]` pairs with column `i` of `vectors`. Vectors have unit 2-norm.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: CVector,
    pub vectors: CMatrix,
    /// Set when a degenerate eigenvalue group could not be orthonormalized,
    /// i.e. the matrix is defective to working precision.
    pub nearly_defective: bool,
}

impl EigenDecomposition {
    /// Number of eigenpairs.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvector `i` as an owned vector.
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.slice(s![.., i]).to_owned()
    }

    /// Largest real part over all eigenvalues; `-inf` for the empty spectrum.
    pub fn max_real(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest eigenvalue magnitude; zero for the empty spectrum.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Worst residual `‖Mv - λv‖₂` over all pairs.
    pub fn max_residual(&self, m: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            let v = self.vector(i);
            let r = m.dot(&v) - v.mapv(|c| c * self.values[i]);
            worst = worst.max(vec_norm(&r));
        }
        worst
    }
}

/// Rotate `v` so its largest-magnitude component (lowest index on ties) is
/// real and nonnegative. No-op for the zero vector.
pub(crate) fn canonical_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        v.mapv_inplace(|z| z * phase.conj());
    }
}

/// Eigendecomposition of a square complex matrix with finite entries.
///
/// Eigenvalues come back sorted (Re descending, Im ascending) so downstream
/// zero enumeration is deterministic.
pub fn eig(m: &CMatrix) -> Result<EigenDecomposition> {
    check_square(m, "eig input")?;
    if !all_finite(m) {
        return Err(Error::Precondition(
            "eig input contains non-finite entries".into(),
        ));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: CVector::zeros(0),
            vectors: CMatrix::zeros((0, 0)),
            nearly_defective: false,
        });
    }

    let (values, vectors) = m.eig().map_err(|e| {
        Error::Numerical(format!(
            "eigensolver did not converge for matrix with ‖M‖_F = {:.3e}: {e}",
            fro_norm(m)
        ))
    })?;

    // Deterministic ordering and phase.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .re
            .partial_cmp(&values[a].re)
            .unwrap()
            .then(values[a].im.partial_cmp(&values[b].im).unwrap())
    });

    let mut sorted_values = CVector::zeros(n);
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_values[dst] = values[src];
        let mut col = vectors.slice(s![.., src]).to_owned();
        let norm = vec_norm(&col);
        if norm == 0.0 {
            return Err(Error::Numerical(format!(
                "eigensolver returned a zero eigenvector for λ = {}",
                values[src]
            )));
        }
        col.mapv_inplace(|z| z / norm);
        canonical_phase(&mut col);
        cols.push(col);
    }

    // Re-orthonormalize within degenerate groups.
    let mut nearly_defective = false;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (sorted_values[end] - sorted_values[start]).norm() <= EIG_GROUP_TOL {
            end += 1;
        }
        for i in (start + 1)..end {
            let mut rem = cols[i].clone();
            for prev in cols.iter().take(i).skip(start) {
                let proj = inner(prev, &rem);
                rem = rem - prev.mapv(|z| z * proj);
            }
            let rem_norm = vec_norm(&rem);
            if rem_norm < DEFECT_FLOOR {
                // Group spans fewer directions than its multiplicity; keep
                // the original vector rather than dividing by noise.
                nearly_defective = true;
            } else {
                rem.mapv_inplace(|z| z / rem_norm);
                canonical_phase(&mut rem);
                cols[i] = rem;
            }
        }
        start = end;
    }

    let mut vmat = CMatrix::zeros((n, n));
    for (i, col) in cols.iter().enumerate() {
        vmat.slice_mut(s![.., i]).assign(col);
    }

    Ok(EigenDecomposition {
        values: sorted_values,
        vectors: vmat,
        nearly_defective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;
    use ndarray::array;

    #[test]
    fn diagonal_matrix_pairs() {
        let m = array![
            [c64(1.0, 2.0), c64(0.0, 0.0)],
            [c64(0.0, 0.0), c64(-3.0, 0.0)]
        ];
        let d = eig(&m).unwrap();
        // Sorted: 1+2i first (larger real part).
        assert!((d.values[0] - c64(1.0, 2.0)).norm() < 1e-14);
        assert!((d.values[1] - c64(-3.0, 0.0)).norm() < 1e-14);
        assert!((d.vector(0)[0].re - 1.0).abs() < 1e-14);
        assert!((d.vector(1)[1].re - 1.0).abs() < 1e-14);
        assert!(!d.nearly_defective);
    }

    #[test]
    fn rotation_generator_spectrum() {
        let m = array![
            [c64(0.0, 0.0), c64(1.0, 0.0)],
            [c64(-1.0, 0.0), c64(0.0, 0.0)]
        ];
        let d = eig(&m).unwrap();
        // ±i, and (Re desc, Im asc) ordering puts -i first.
        assert!((d.values[0] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((d.values[1] - c64(0.0, 1.0)).norm() < 1e-12);
        assert!(d.max_residual(&m) <= 1e-10 * fro_norm(&m));
    }

    #[test]
    fn exact_degeneracy_keeps_orthonormal_basis() {
        let m = array![
            [c64(0.5, 0.0), c64(0.0, 0.0)],
            [c64(0.0, 0.0), c64(0.5, 0.0)]
        ];
        let d = eig(&m).unwrap();
        assert!(!d.nearly_defective);
        let dot = inner(&d.vector(0), &d.vector(1));
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn jordan_block_flags_defective() {
        let m = array![
            [c64(1.0, 0.0), c64(1.0, 0.0)],
            [c64(0.0, 0.0), c64(1.0, 0.0)]
        ];
        let d = eig(&m).unwrap();
        assert!(d.nearly_defective);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        let m = CMatrix::zeros((2, 3));
        assert!(matches!(eig(&m), Err(Error::Dimension(_))));
        let m = array![[c64(f64::NAN, 0.0)]];
        assert!(matches!(eig(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_matrix_gives_empty_spectrum() {
        let m = CMatrix::zeros((0, 0));
        let d = eig(&m).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.max_real(), f64::NEG_INFINITY);
    }
}
