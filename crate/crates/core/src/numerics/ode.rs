//! Fixed-step classical RK4 over complex state vectors.

use super::{vec_finite, CVector, C64};
use crate::{Error, Result};

/// Time-sampled solution of an initial value problem.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
}

impl OdeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` with fixed step `dt`.
///
/// Samples land on `t0, t0+dt, …`; a final shorter step lands exactly on
/// `t1`. Classical RK4, global error `O(dt⁴)` for smooth `f`.
pub fn integrate_ode<F>(mut f: F, y0: &CVector, t0: f64, t1: f64, dt: f64) -> Result<OdeTrajectory>
where
    F: FnMut(f64, &CVector) -> CVector,
{
    if !(t0 < t1) {
        return Err(Error::Precondition(format!(
            "integration window must have t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Precondition(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !vec_finite(y0) {
        return Err(Error::Precondition("initial state is non-finite".into()));
    }

    let span = t1 - t0;
    let full_steps = (span / dt).floor() as usize;
    // Skip a trailing sliver that is pure rounding noise.
    let remainder = span - full_steps as f64 * dt;
    let has_partial = remainder > dt * 1e-9;

    let total = full_steps + usize::from(has_partial);
    let mut times = Vec::with_capacity(total + 1);
    let mut states = Vec::with_capacity(total + 1);
    times.push(t0);
    states.push(y0.clone());

    let mut y = y0.clone();
    for k in 0..total {
        let t = t0 + k as f64 * dt;
        let h = if k < full_steps { dt } else { remainder };
        let t_next = if k + 1 == total { t1 } else { t + h };

        let half = C64::from(h / 2.0);
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &(&y + &k1.mapv(|z| z * half)));
        let k3 = f(t + h / 2.0, &(&y + &k2.mapv(|z| z * half)));
        let k4 = f(t_next, &(&y + &k3.mapv(|z| z * C64::from(h))));
        let incr = (k1 + k2.mapv(|z| z * C64::from(2.0)) + k3.mapv(|z| z * C64::from(2.0)) + k4)
            .mapv(|z| z * C64::from(h / 6.0));
        y = &y + &incr;

        if !vec_finite(&y) {
            return Err(Error::Divergence { t: t_next });
        }
        times.push(t_next);
        states.push(y.clone());
    }

    Ok(OdeTrajectory { times, states })
}
