//! Input pulse synthesis.
//!
//! Every plan here is supported on `t ≤ 0` and drives the system so that at
//! `t = 0` the single excitation sits entirely in the internal modes. Three
//! constructions are available:
//!
//! - row combinations of the pulse matrix `Ξ(t) = -e^{-A♯t}C⊤S♯Θ(-t)`,
//!   which absorb into an arbitrary target coefficient vector;
//! - rising-exponential superpositions `-Σ xₖ uₖ e^{zₖt}` over transmission
//!   zeros, whose target is the matching eigenvector combination `Σ xₖ vₖ`;
//! - single-channel normalized rising exponentials `ζ(t) = -√(z+z*)e^{zt}`,
//!   available when a blocking zero exists or a zero direction aligns with a
//!   channel basis vector.
//!
//! Each construction keeps its natural, unnormalized scale so the zero
//! structure stays visible in the amplitudes; plans carry the raw shape
//! together with its L² norm, and [`PulsePlan::normalized`] rescales to
//! unit norm for physical runs.

use ndarray::s;
use ndarray_linalg::SVD;

use crate::model::PassiveSystem;
use crate::numerics::{
    adjoint, conjugate, eig, expm, expm_action, inner, solve_lyapunov, vec_norm, CMatrix, CVector,
    C64,
};
use crate::zeros::{transmission_zeros, v_matrix, ZeroRecord};
use crate::{Error, Result};

/// Default truncation parameter: pulses are sampled on `[T₀, 0]` with
/// `T₀ = ln(ε)/min Re z`, leaving truncated mass below `ε²`.
pub const EPS_TRUNC: f64 = 1e-10;

/// A zero direction counts as channel-aligned when `‖u - e_k‖` falls below
/// this after phase canonicalization.
pub const BASIS_ALIGN_TOL: f64 = 1e-8;

/// How a pulse plan was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseConstruction {
    /// `Ξ(t)ᵀx` row combination (arbitrary target).
    XiRowCombination,
    /// Rising-exponential superposition over transmission zeros.
    ZeroMode,
    /// Single-channel ζ through a blocking zero.
    SeparableBlocking,
    /// Single-channel ζ through a channel-aligned zero direction.
    SeparableBasis,
    /// Deliberately wrong time-reversed pulse (negative control).
    ReversedControl,
}

impl PulseConstruction {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::XiRowCombination => "xi-row-combination",
            Self::ZeroMode => "zero-mode",
            Self::SeparableBlocking => "separable-blocking",
            Self::SeparableBasis => "separable-basis",
            Self::ReversedControl => "time-reversed-control",
        }
    }
}

/// Evaluable pulse shape: one complex amplitude per channel, per time.
#[derive(Debug, Clone)]
pub enum PulseShape {
    /// `Σₖ bₖ e^{zₖt}` on `t ≤ 0`.
    ModeSum {
        rates: Vec<C64>,
        amplitudes: Vec<CVector>,
    },
    /// `-S†C e^{-A†t} x` on `t ≤ 0`, i.e. `Ξ(t)ᵀx`.
    XiCombination {
        adjoint_drift: CMatrix,
        front: CMatrix,
        coefficients: CVector,
    },
    /// `b e^{z(t₀-t)}` on `[t₀, 0]`: the time reverse of a rising
    /// exponential inside its truncation window.
    ReversedWindow {
        rate: C64,
        amplitude: CVector,
        window_start: f64,
    },
}

impl PulseShape {
    pub fn channels(&self) -> usize {
        match self {
            Self::ModeSum { amplitudes, .. } => amplitudes.first().map_or(0, |a| a.len()),
            Self::XiCombination { front, .. } => front.nrows(),
            Self::ReversedWindow { amplitude, .. } => amplitude.len(),
        }
    }

    /// Amplitude vector at time `t`; zero for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<CVector> {
        let m = self.channels();
        if t > 0.0 {
            return Ok(CVector::zeros(m));
        }
        match self {
            Self::ModeSum { rates, amplitudes } => {
                let mut out = CVector::zeros(m);
                for (z, b) in rates.iter().zip(amplitudes) {
                    let w = (z * t).exp();
                    out = out + b.mapv(|c| c * w);
                }
                Ok(out)
            }
            Self::XiCombination {
                adjoint_drift,
                front,
                coefficients,
            } => {
                let chi = expm_action(adjoint_drift, -t, coefficients)?;
                Ok(front.dot(&chi).mapv(|c| -c))
            }
            Self::ReversedWindow {
                rate,
                amplitude,
                window_start,
            } => {
                if t < *window_start {
                    return Ok(CVector::zeros(m));
                }
                let w = (rate * (window_start - t)).exp();
                Ok(amplitude.mapv(|c| c * w))
            }
        }
    }

    /// Amplitudes on the uniform grid `t₀, t₀+step, …` (`count` points).
    ///
    /// Grid points that overshoot 0 by rounding noise (under `step·1e-6`)
    /// are snapped back onto the support boundary. The Ξ route marches
    /// `e^{-A†t}x` by a precomputed per-step factor instead of building a
    /// fresh exponential per sample; the march runs from the latest sample
    /// backwards so each step applies the contraction `e^{A†·step}` and
    /// rounding noise decays along with the signal.
    pub fn sample_uniform(&self, t0: f64, step: f64, count: usize) -> Result<Vec<CVector>> {
        if !(step > 0.0) {
            return Err(Error::Precondition(format!(
                "sample step must be positive, got {step}"
            )));
        }
        let grid = |i: usize| snap_to_boundary(t0 + i as f64 * step, step);
        match self {
            Self::XiCombination {
                adjoint_drift,
                front,
                coefficients,
            } => {
                if count == 0 {
                    return Ok(Vec::new());
                }
                let t_last = grid(count - 1);
                let mut chi = expm_action(adjoint_drift, -t_last, coefficients)?;
                let retreat = expm(&adjoint_drift.mapv(|z| z * C64::from(step)))?;
                let mut out = vec![CVector::zeros(front.nrows()); count];
                for i in (0..count).rev() {
                    if grid(i) <= 0.0 {
                        out[i] = front.dot(&chi).mapv(|c| -c);
                    }
                    if i > 0 {
                        chi = retreat.dot(&chi);
                    }
                }
                Ok(out)
            }
            _ => (0..count).map(|i| self.eval(grid(i))).collect(),
        }
    }

    /// Same shape scaled by a real factor.
    pub fn scaled(&self, factor: f64) -> PulseShape {
        let f = C64::from(factor);
        match self {
            Self::ModeSum { rates, amplitudes } => Self::ModeSum {
                rates: rates.clone(),
                amplitudes: amplitudes.iter().map(|b| b.mapv(|c| c * f)).collect(),
            },
            Self::XiCombination {
                adjoint_drift,
                front,
                coefficients,
            } => Self::XiCombination {
                adjoint_drift: adjoint_drift.clone(),
                front: front.clone(),
                coefficients: coefficients.mapv(|c| c * f),
            },
            Self::ReversedWindow {
                rate,
                amplitude,
                window_start,
            } => Self::ReversedWindow {
                rate: *rate,
                amplitude: amplitude.mapv(|c| c * f),
                window_start: *window_start,
            },
        }
    }
}

/// A synthesized input pulse with its predicted absorption target.
#[derive(Debug, Clone)]
pub struct PulsePlan {
    pub construction: PulseConstruction,
    pub shape: PulseShape,
    /// `√∫‖shape(t)‖²dt` of the raw (unscaled) shape.
    pub l2_norm: f64,
    /// Unit-norm predicted final system coefficient vector.
    pub predicted_target: CVector,
    /// Predicted final coefficients before normalization, keeping the raw
    /// scale and sign of the construction.
    pub predicted_target_raw: CVector,
    /// Truncation window start `T₀ < 0`.
    pub window_start: f64,
    /// Truncation parameter the window was derived from.
    pub trunc_eps: f64,
}

impl PulsePlan {
    pub fn channels(&self) -> usize {
        self.shape.channels()
    }

    /// The same plan rescaled to unit L² norm.
    pub fn normalized(&self) -> Result<PulsePlan> {
        if !(self.l2_norm > 0.0) || !self.l2_norm.is_finite() {
            return Err(Error::Precondition(format!(
                "cannot normalize a plan with L² norm {}",
                self.l2_norm
            )));
        }
        let mut plan = self.clone();
        plan.shape = self.shape.scaled(1.0 / self.l2_norm);
        plan.l2_norm = 1.0;
        Ok(plan)
    }

    /// The same plan with its truncation window recomputed for a different
    /// mass cutoff `eps` (the window scales with `ln eps`).
    pub fn with_trunc_eps(&self, eps: f64) -> Result<PulsePlan> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Precondition(format!(
                "truncation parameter must lie in (0, 1), got {eps}"
            )));
        }
        let mut plan = self.clone();
        plan.window_start = self.window_start * eps.ln() / self.trunc_eps.ln();
        plan.trunc_eps = eps;
        if let PulseShape::ReversedWindow { window_start, .. } = &mut plan.shape {
            *window_start = plan.window_start;
        }
        Ok(plan)
    }
}

fn normalize(v: &CVector) -> Result<CVector> {
    let norm = vec_norm(v);
    if norm < 1e-12 {
        return Err(Error::Numerical(
            "target coefficient vector is numerically zero".into(),
        ));
    }
    Ok(v.mapv(|c| c / norm))
}

/// `∫‖Σ bₖ e^{zₖt}‖²dt` over `t ≤ 0` in closed form:
/// the (j,k) cross term integrates to `bⱼ†bₖ / (zⱼ* + zₖ)`.
fn mode_sum_l2(rates: &[C64], amplitudes: &[CVector]) -> f64 {
    let mut acc = C64::from(0.0);
    for (zj, bj) in rates.iter().zip(amplitudes) {
        for (zk, bk) in rates.iter().zip(amplitudes) {
            acc += inner(bj, bk) / (zj.conj() + zk);
        }
    }
    acc.re.max(0.0).sqrt()
}

fn truncation_window(min_rate: f64, eps: f64) -> f64 {
    eps.ln() / min_rate
}

/// Snap a grid time that overshoots the support boundary 0 by rounding
/// noise back onto it.
pub(crate) fn snap_to_boundary(t: f64, step: f64) -> f64 {
    if t > 0.0 && t < step * 1e-6 {
        0.0
    } else {
        t
    }
}

/// The pulse matrix `Ξ(t) = -e^{-A♯t} C⊤ S♯ Θ(-t)` (`n×m`).
///
/// Rows index system modes, columns index input channels; entries decay as
/// `t → -∞` at the slowest drift rate. Requires a validated system; errors
/// only when `|t|` is so large the exponential cannot be evaluated.
pub fn xi_at(sys: &PassiveSystem, t: f64) -> Result<CMatrix> {
    let n = sys.modes();
    let m = sys.channels();
    if t > 0.0 {
        return Ok(CMatrix::zeros((n, m)));
    }
    let a_conj = conjugate(&sys.drift_matrix());
    let tail = sys
        .coupling()
        .t()
        .to_owned()
        .dot(&conjugate(sys.scattering()));
    let e = expm(&a_conj.mapv(|z| z * C64::from(-t)))?;
    Ok(e.dot(&tail).mapv(|z| -z))
}

/// Plan absorbing into the arbitrary unit coefficient vector `x`: channel
/// `j` carries `ξ'ⱼ = Σᵢ xᵢ ξ_{i,j}`, i.e. the shape is `Ξ(t)ᵀx`.
///
/// The L² norm comes from the Lyapunov certificate of the Gram identity
/// `∫Ξ Ξ† dt = I` and is 1 up to solver accuracy.
pub fn pulse_for_target(sys: &PassiveSystem, x: &CVector) -> Result<PulsePlan> {
    sys.ensure_valid()?;
    let n = sys.modes();
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "target vector has length {}, system has {n} modes",
            x.len()
        )));
    }
    let norm = vec_norm(x);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "target coefficients must have unit norm, got ‖x‖ = {norm}"
        )));
    }
    let a = sys.drift_matrix();
    let gram = solve_lyapunov(&a, &adjoint(sys.coupling()).dot(sys.coupling()))?;
    let l2 = inner(x, &gram.dot(x)).re.max(0.0).sqrt();

    let spectrum = eig(&a)?;
    let min_rate = spectrum
        .values
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    let window_start = truncation_window(min_rate, EPS_TRUNC);

    Ok(PulsePlan {
        construction: PulseConstruction::XiRowCombination,
        shape: PulseShape::XiCombination {
            adjoint_drift: adjoint(&a),
            front: adjoint(sys.scattering()).dot(sys.coupling()),
            coefficients: x.clone(),
        },
        l2_norm: l2,
        predicted_target: x.clone(),
        predicted_target_raw: x.clone(),
        window_start,
        trunc_eps: EPS_TRUNC,
    })
}

/// Plan `-Σₖ xₖ uₖ e^{zₖt}` over the given zero records.
///
/// With `use_raw_u` the raw pair `(u_raw, v_raw)` is used, reproducing the
/// unscaled pulses the worked examples display; otherwise the canonical
/// unit-norm `u` with its matching `v`. Either way the predicted target is
/// the corresponding `Σₖ xₖ vₖ`, normalized.
pub fn zero_mode_pulse(zeros: &[ZeroRecord], x: &[C64], use_raw_u: bool) -> Result<PulsePlan> {
    if zeros.is_empty() {
        return Err(Error::Precondition("no zero records supplied".into()));
    }
    if zeros.len() != x.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} zero records",
            x.len(),
            zeros.len()
        )));
    }
    if x.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Precondition(
            "at least one coefficient must be nonzero".into(),
        ));
    }
    let m = zeros[0].u.len();
    if zeros.iter().any(|r| r.u.len() != m) {
        return Err(Error::Dimension(
            "zero records disagree on channel count".into(),
        ));
    }

    let mut rates = Vec::with_capacity(zeros.len());
    let mut amplitudes = Vec::with_capacity(zeros.len());
    let mut target_raw = CVector::zeros(zeros[0].v.len());
    for (record, &xk) in zeros.iter().zip(x) {
        let (u, v) = if use_raw_u {
            (&record.u_raw, &record.v_raw)
        } else {
            (&record.u, &record.v)
        };
        rates.push(record.z);
        amplitudes.push(u.mapv(|c| -(c * xk)));
        target_raw = target_raw + v.mapv(|c| c * xk);
    }
    let l2 = mode_sum_l2(&rates, &amplitudes);
    let min_rate = rates.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(min_rate > 0.0) {
        return Err(Error::Precondition(format!(
            "zero with Re z = {min_rate:.3e} gives a non-normalizable pulse"
        )));
    }

    Ok(PulsePlan {
        construction: PulseConstruction::ZeroMode,
        shape: PulseShape::ModeSum { rates, amplitudes },
        l2_norm: l2,
        predicted_target: normalize(&target_raw)?,
        predicted_target_raw: target_raw,
        window_start: truncation_window(min_rate, EPS_TRUNC),
        trunc_eps: EPS_TRUNC,
    })
}

/// The normalized rising exponential `ζ(t) = -√(z+z*) e^{zt}` on `t ≤ 0`,
/// with `∫|ζ|²dt = 1`. Requires `Re z > 0`.
#[derive(Debug, Clone, Copy)]
pub struct RisingExponential {
    z: C64,
}

impl RisingExponential {
    pub fn rate(&self) -> C64 {
        self.z
    }

    /// `-√(2 Re z)`, the amplitude at `t = 0`.
    pub fn amplitude(&self) -> C64 {
        C64::from(-(2.0 * self.z.re).sqrt())
    }

    pub fn eval(&self, t: f64) -> C64 {
        if t > 0.0 {
            C64::from(0.0)
        } else {
            self.amplitude() * (self.z * t).exp()
        }
    }
}

/// Build `ζ(t) = -√(z+z*)e^{zt}`; errors when `Re z ≤ 0` (not normalizable).
pub fn normalized_rising_exponential(z: C64) -> Result<RisingExponential> {
    if !(z.re > 0.0) {
        return Err(Error::Precondition(format!(
            "rising exponential needs Re z > 0, got z = {z}"
        )));
    }
    Ok(RisingExponential { z })
}

/// Outcome of the separable-input decision procedure.
#[derive(Debug, Clone)]
pub enum SeparableOutcome {
    /// A single-channel plan exists; the construction tag says whether the
    /// blocking-zero or the basis-aligned route produced it.
    Separable {
        plan: PulsePlan,
        zero: ZeroRecord,
        channel: usize,
    },
    /// No separable plan; the supplied entangled zero-mode plan transfers
    /// instead.
    EntangledRequired {
        justification: String,
        alternative: PulsePlan,
        zero: ZeroRecord,
    },
}

fn zeta_plan(
    sys: &PassiveSystem,
    record: &ZeroRecord,
    channel: usize,
    construction: PulseConstruction,
) -> Result<PulsePlan> {
    let m = sys.channels();
    let zeta = normalized_rising_exponential(record.z)?;
    let mut amplitude = CVector::zeros(m);
    amplitude[channel] = zeta.amplitude();

    // ψ(0) = √(z+z*)·V e_k for input ζ on channel k.
    let v = v_matrix(sys, record.z)?;
    let col = v.slice(s![.., channel]).to_owned();
    let target_raw = col.mapv(|c| c * C64::from((2.0 * record.z.re).sqrt()));

    let rates = vec![record.z];
    let amplitudes = vec![amplitude];
    let l2 = mode_sum_l2(&rates, &amplitudes);
    Ok(PulsePlan {
        construction,
        shape: PulseShape::ModeSum { rates, amplitudes },
        l2_norm: l2,
        predicted_target: normalize(&target_raw)?,
        predicted_target_raw: target_raw,
        window_start: truncation_window(record.z.re, EPS_TRUNC),
        trunc_eps: EPS_TRUNC,
    })
}

/// Decide whether a separable (single-channel) input achieves perfect
/// transfer, and build the plan when it does.
///
/// Preference order: a blocking zero admits ζ on any channel (default 0,
/// overridable); otherwise a zero whose canonical direction aligns with a
/// channel basis vector forces that channel. When neither applies the
/// outcome carries the entangled zero-mode alternative for the leading zero.
pub fn separable_transfer_plan(
    sys: &PassiveSystem,
    channel: Option<usize>,
) -> Result<SeparableOutcome> {
    let records = transmission_zeros(sys)?;
    let m = sys.channels();
    if let Some(k) = channel {
        if k >= m {
            return Err(Error::Dimension(format!(
                "channel {k} out of range for {m} channels"
            )));
        }
    }

    if let Some(record) = records.iter().find(|r| r.is_blocking) {
        let k = channel.unwrap_or(0);
        let plan = zeta_plan(sys, record, k, PulseConstruction::SeparableBlocking)?;
        return Ok(SeparableOutcome::Separable {
            plan,
            zero: record.clone(),
            channel: k,
        });
    }

    for record in &records {
        let mut aligned = None;
        for k in 0..m {
            let mut e_k = CVector::zeros(m);
            e_k[k] = C64::from(1.0);
            if vec_norm(&(&record.u - &e_k)) <= BASIS_ALIGN_TOL {
                aligned = Some(k);
                break;
            }
        }
        let Some(k) = aligned else { continue };
        if let Some(requested) = channel {
            if requested != k {
                continue;
            }
        }
        let plan = zeta_plan(sys, record, k, PulseConstruction::SeparableBasis)?;
        return Ok(SeparableOutcome::Separable {
            plan,
            zero: record.clone(),
            channel: k,
        });
    }

    let lead = records[0].clone();
    let alternative = zero_mode_pulse(&records[0..1], &[C64::from(1.0)], true)?;
    let justification = format!(
        "no blocking zero and no channel-aligned zero direction; perfect transfer requires \
         the entangled input -u e^{{zt}} with z = {} and u = {:?}",
        lead.z,
        lead.u_raw.to_vec()
    );
    Ok(SeparableOutcome::EntangledRequired {
        justification,
        alternative,
        zero: lead,
    })
}

/// Negative control: the time reverse of a single-mode plan inside its own
/// window. A decaying exponential arrives "backwards" and mostly reflects,
/// so fidelity and leakage verdicts must fail.
pub fn time_reversed_control(plan: &PulsePlan) -> Result<PulsePlan> {
    let PulseShape::ModeSum { rates, amplitudes } = &plan.shape else {
        return Err(Error::Precondition(
            "time-reversed control needs a single rising-exponential plan".into(),
        ));
    };
    if rates.len() != 1 {
        return Err(Error::Precondition(
            "time-reversed control needs exactly one mode".into(),
        ));
    }
    let z = rates[0];
    let t0 = plan.window_start;
    // ∫‖b‖² e^{2Re z (t0-t)} dt over [t0, 0] = ‖b‖²(1 - e^{2Re z t0})/(2Re z)
    let b_norm_sq = vec_norm(&amplitudes[0]).powi(2);
    let l2 = (b_norm_sq * (1.0 - (2.0 * z.re * t0).exp()) / (2.0 * z.re)).sqrt();
    Ok(PulsePlan {
        construction: PulseConstruction::ReversedControl,
        shape: PulseShape::ReversedWindow {
            rate: z,
            amplitude: amplitudes[0].clone(),
            window_start: t0,
        },
        l2_norm: l2,
        predicted_target: plan.predicted_target.clone(),
        predicted_target_raw: plan.predicted_target_raw.clone(),
        window_start: t0,
        trunc_eps: plan.trunc_eps,
    })
}

/// Numerical rank of the channels×samples matrix of pulse amplitudes on the
/// plan's window. Rank 1 means a common temporal profile across channels;
/// rank ≥ 2 means the input photon is genuinely time–channel entangled.
pub fn entanglement_rank(plan: &PulsePlan, samples: usize) -> Result<usize> {
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let m = plan.channels();
    let step = -plan.window_start / (samples - 1) as f64;
    let values = plan
        .shape
        .sample_uniform(plan.window_start, step, samples)?;
    let mut mat = CMatrix::zeros((m, samples));
    for (j, v) in values.iter().enumerate() {
        mat.slice_mut(s![.., j]).assign(v);
    }
    let (_, sv, _) = mat
        .svd(false, false)
        .map_err(|e| Error::Numerical(format!("SVD failed: {e}")))?;
    let top = sv.iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-9 * top).count())
}
