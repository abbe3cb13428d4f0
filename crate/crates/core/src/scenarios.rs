//! Canned constructors and regression runs for the worked examples.
//!
//! Example 1: two distinct single-mode cavities behind a beam splitter,
//! absorbing into an arbitrary superposition (entangled input). Example 2:
//! the same system analyzed through its two transmission zeros. Example 3:
//! identical cavities, where the zero becomes blocking and a single-channel
//! input distributes entanglement. Example 4: a single-mode ring resonator
//! coupled to two waveguides, separable only when `β√γ₁ = α√γ₂`.
//!
//! Scalar subsystems are parameterized by their drift value `A_j` directly;
//! the Hamiltonian entry is recovered as `Ω_j = i(A_j + |C_j|²/2)`, which is
//! Hermitian exactly when `Re A_j = -|C_j|²/2`. Parameters violating that
//! constraint are rejected.

use crate::model::{beam_splitter, PassiveSystem};
use crate::numerics::{c64, identity, inner, vec_norm, CVector, C64};
use crate::pulses::{
    separable_transfer_plan, zero_mode_pulse, PulseConstruction, PulsePlan, SeparableOutcome,
};
use crate::simulate::{verify_transfer, Thresholds, TransferReport};
use crate::zeros::{transmission_zeros, ZeroRecord};
use crate::{Error, Result};

/// Which worked example to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleName {
    Example1,
    Example2,
    Example3,
    Example4,
}

impl ExampleName {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Example3 => "example3",
            Self::Example4 => "example4",
        }
    }
}

impl std::str::FromStr for ExampleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" | "1" => Ok(Self::Example1),
            "example2" | "2" => Ok(Self::Example2),
            "example3" | "3" => Ok(Self::Example3),
            "example4" | "4" => Ok(Self::Example4),
            other => Err(Error::Input(format!(
                "unknown example '{other}' (expected example1..example4)"
            ))),
        }
    }
}

/// Parameters for one scenario run.
///
/// Examples 1–3 use the two-cavity fields (`a1, a2, c1, c2`); example 4
/// uses the waveguide couplings (`gamma1, gamma2`). The beam splitter and
/// the target coefficients apply to all.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: ExampleName,
    pub a1: C64,
    pub a2: C64,
    pub c1: C64,
    pub c2: C64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Coefficients for the zero-mode plans of examples 1 and 2.
    pub x: Vec<C64>,
}

impl ScenarioSpec {
    fn two_cavity_defaults(name: ExampleName) -> Self {
        let r = 1.0 / 2.0f64.sqrt();
        Self {
            name,
            a1: c64(-0.5, 0.0),
            a2: c64(-1.0, 0.0),
            c1: c64(1.0, 0.0),
            c2: c64(2.0f64.sqrt(), 0.0),
            alpha: 0.6,
            beta: 0.8,
            gamma1: 1.0,
            gamma2: 1.0,
            x: vec![c64(r, 0.0), c64(r, 0.0)],
        }
    }

    /// Two distinct cavities, arbitrary-superposition transfer.
    pub fn example1() -> Self {
        Self::two_cavity_defaults(ExampleName::Example1)
    }

    /// Two distinct cavities, zero-mode transfer.
    pub fn example2() -> Self {
        Self::two_cavity_defaults(ExampleName::Example2)
    }

    /// Identical cavities: blocking zero, single-channel input.
    pub fn example3() -> Self {
        let mut spec = Self::two_cavity_defaults(ExampleName::Example3);
        spec.a2 = spec.a1;
        spec.c2 = spec.c1;
        spec
    }

    /// Ring resonator with two waveguides; the default parameters satisfy
    /// `β√γ₁ = α√γ₂`, the separable case.
    pub fn example4() -> Self {
        let r = 1.0 / 2.0f64.sqrt();
        let mut spec = Self::two_cavity_defaults(ExampleName::Example4);
        spec.alpha = r;
        spec.beta = r;
        spec.gamma1 = 1.0;
        spec.gamma2 = 1.0;
        spec
    }
}

/// Build a single-mode system from its drift scalar and coupling.
///
/// `Ω = i(A + |C|²/2)` must come out real (Hermitian 1×1), which pins
/// `Re A = -|C|²/2`.
fn single_mode_from_drift(a: C64, c: C64) -> Result<PassiveSystem> {
    let residual = a.re + c.norm_sqr() / 2.0;
    if residual.abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "drift scalar A = {a} violates Re A = -|C|²/2 = {} (defect {residual:.3e}); \
             no Hermitian Ω reproduces it",
            -c.norm_sqr() / 2.0
        )));
    }
    PassiveSystem::new(
        ndarray::array![[c64(-a.im, 0.0)]],
        ndarray::array![[c]],
        identity(1),
    )
}

/// Scalar-subsystem zero location `z = A + |C|²` (equal to `-A*` when the
/// drift constraint holds).
fn scalar_zero(a: C64, c: C64) -> C64 {
    a + C64::from(c.norm_sqr())
}

/// Construct the scenario's [`PassiveSystem`], enforcing each example's
/// parameter constraints.
pub fn build(spec: &ScenarioSpec) -> Result<PassiveSystem> {
    let bs = beam_splitter(spec.alpha, spec.beta)?;
    let sys = match spec.name {
        ExampleName::Example1 | ExampleName::Example2 | ExampleName::Example3 => {
            if spec.name == ExampleName::Example2 {
                let gap = (scalar_zero(spec.a1, spec.c1) - scalar_zero(spec.a2, spec.c2)).norm();
                if gap <= 1e-8 {
                    return Err(Error::Precondition(format!(
                        "example2 requires distinct zeros, got |z1 - z2| = {gap:.3e}"
                    )));
                }
            }
            if spec.name == ExampleName::Example3 && (spec.a1 != spec.a2 || spec.c1 != spec.c2) {
                return Err(Error::Precondition(
                    "example3 requires identical subsystems (A1 = A2, C1 = C2)".into(),
                ));
            }
            let s1 = single_mode_from_drift(spec.a1, spec.c1)?;
            let s2 = single_mode_from_drift(spec.a2, spec.c2)?;
            s1.direct_sum(&s2)?.prepend_scattering(&bs)?
        }
        ExampleName::Example4 => {
            if !(spec.gamma1 > 0.0) || !(spec.gamma2 > 0.0) {
                return Err(Error::Precondition(format!(
                    "example4 requires positive waveguide couplings, got γ1 = {}, γ2 = {}",
                    spec.gamma1, spec.gamma2
                )));
            }
            PassiveSystem::new(
                ndarray::array![[c64(0.0, 0.0)]],
                ndarray::array![
                    [c64(spec.gamma1.sqrt(), 0.0)],
                    [c64(spec.gamma2.sqrt(), 0.0)]
                ],
                identity(2),
            )?
            .prepend_scattering(&bs)?
        }
    };
    sys.ensure_valid()?;
    Ok(sys)
}

/// One row of the expected-vs-computed zero table.
#[derive(Debug, Clone)]
pub struct ZeroComparison {
    pub expected_z: C64,
    pub computed_z: C64,
    pub z_error: f64,
    /// `|⟨û_exp, û⟩|` (1 = aligned); `None` when the eigenspace is
    /// degenerate and no individual direction is distinguished.
    pub u_alignment: Option<f64>,
    pub v_alignment: Option<f64>,
}

/// Full outcome of a scenario regression.
#[derive(Debug, Clone)]
pub struct RegressionOutcome {
    pub scenario: ExampleName,
    pub zero_table: Vec<ZeroComparison>,
    pub blocking_expected: bool,
    pub blocking_found: bool,
    pub construction: PulseConstruction,
    pub entangled_input_required: bool,
    pub report: TransferReport,
    pub messages: Vec<String>,
}

fn direction_alignment(expected: &CVector, actual: &CVector) -> f64 {
    let denom = vec_norm(expected) * vec_norm(actual);
    if denom == 0.0 {
        return 0.0;
    }
    inner(expected, actual).norm() / denom
}

fn expected_zero_rows(spec: &ScenarioSpec, records: &[ZeroRecord]) -> Vec<ZeroComparison> {
    // (z, u direction, v direction) triples from the closed forms.
    let expected: Vec<(C64, Option<CVector>, Option<CVector>)> = match spec.name {
        ExampleName::Example1 | ExampleName::Example2 | ExampleName::Example3 => {
            let degenerate = spec.name == ExampleName::Example3;
            let u1 = ndarray::array![c64(spec.alpha, 0.0), c64(spec.beta, 0.0)];
            let u2 = ndarray::array![c64(spec.beta, 0.0), c64(-spec.alpha, 0.0)];
            let v1 = ndarray::array![c64(1.0, 0.0), c64(0.0, 0.0)];
            let v2 = ndarray::array![c64(0.0, 0.0), c64(1.0, 0.0)];
            let dirs = |u: CVector, v: CVector| {
                if degenerate {
                    (None, None)
                } else {
                    (Some(u), Some(v))
                }
            };
            let (du1, dv1) = dirs(u1, v1);
            let (du2, dv2) = dirs(u2, v2);
            vec![
                (scalar_zero(spec.a1, spec.c1), du1, dv1),
                (scalar_zero(spec.a2, spec.c2), du2, dv2),
            ]
        }
        ExampleName::Example4 => {
            let u = ndarray::array![
                c64(
                    spec.alpha * spec.gamma1.sqrt() + spec.beta * spec.gamma2.sqrt(),
                    0.0
                ),
                c64(
                    spec.beta * spec.gamma1.sqrt() - spec.alpha * spec.gamma2.sqrt(),
                    0.0
                )
            ];
            vec![(
                c64((spec.gamma1 + spec.gamma2) / 2.0, 0.0),
                Some(u),
                Some(ndarray::array![c64(1.0, 0.0)]),
            )]
        }
    };

    // Greedy nearest-z matching; the tables are tiny.
    let mut used = vec![false; records.len()];
    let mut rows = Vec::new();
    for (z_exp, u_exp, v_exp) in expected {
        let mut pick = None;
        let mut best = f64::INFINITY;
        for (i, r) in records.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (r.z - z_exp).norm();
            if d < best {
                best = d;
                pick = Some(i);
            }
        }
        let Some(i) = pick else { continue };
        used[i] = true;
        let r = &records[i];
        rows.push(ZeroComparison {
            expected_z: z_exp,
            computed_z: r.z,
            z_error: best,
            u_alignment: u_exp.as_ref().map(|u| direction_alignment(u, &r.u)),
            v_alignment: v_exp.as_ref().map(|v| direction_alignment(v, &r.v)),
        });
    }
    rows
}

/// Build the scenario, compute zeros, synthesize the example's plan
/// (zero-mode for examples 1–2, separable for 3–4 with entangled fallback),
/// propagate it, and compare against the closed-form expectations.
pub fn run_regression(
    spec: &ScenarioSpec,
    dt: Option<f64>,
    thresholds: Thresholds,
) -> Result<RegressionOutcome> {
    Ok(run_regression_with_trajectory(spec, dt, thresholds)?.0)
}

/// [`run_regression`] keeping the sampled trajectory for dumps.
pub fn run_regression_with_trajectory(
    spec: &ScenarioSpec,
    dt: Option<f64>,
    thresholds: Thresholds,
) -> Result<(RegressionOutcome, crate::simulate::ExcitationTrajectory)> {
    let sys = build(spec)?;
    let records = transmission_zeros(&sys)?;
    let zero_table = expected_zero_rows(spec, &records);
    let blocking_found = records.iter().any(|r| r.is_blocking);
    let blocking_expected = spec.name == ExampleName::Example3;

    let mut messages = Vec::new();
    let mut entangled_input_required = false;

    let plan: PulsePlan = match spec.name {
        ExampleName::Example1 | ExampleName::Example2 => {
            if spec.x.len() != records.len() {
                return Err(Error::Dimension(format!(
                    "{} coefficients for {} zeros",
                    spec.x.len(),
                    records.len()
                )));
            }
            entangled_input_required = true;
            zero_mode_pulse(&records, &spec.x, true)?
        }
        ExampleName::Example3 | ExampleName::Example4 => {
            match separable_transfer_plan(&sys, None)? {
                SeparableOutcome::Separable { plan, channel, .. } => {
                    messages.push(format!("separable input on channel {channel}"));
                    plan
                }
                SeparableOutcome::EntangledRequired {
                    justification,
                    alternative,
                    ..
                } => {
                    entangled_input_required = true;
                    messages.push(format!("entangled input required: {justification}"));
                    alternative
                }
            }
        }
    };

    let (trajectory, report) = verify_transfer(&sys, &plan, dt, thresholds)?;
    Ok((
        RegressionOutcome {
            scenario: spec.name,
            zero_table,
            blocking_expected,
            blocking_found,
            construction: plan.construction,
            entangled_input_required,
            report,
            messages,
        },
        trajectory,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example3_build_has_blocking_zero_at_half() {
        let sys = build(&ScenarioSpec::example3()).unwrap();
        let records = transmission_zeros(&sys).unwrap();
        assert!(records.iter().all(|r| (r.z - c64(0.5, 0.0)).norm() < 1e-12));
        assert!(records.iter().all(|r| r.is_blocking));
    }

    #[test]
    fn example4_default_is_separable_with_aligned_u() {
        let sys = build(&ScenarioSpec::example4()).unwrap();
        let records = transmission_zeros(&sys).unwrap();
        assert_eq!(records.len(), 1);
        assert!((records[0].z - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((records[0].u[0] - c64(1.0, 0.0)).norm() < 1e-9);
        assert!(records[0].u[1].norm() < 1e-9);
    }

    #[test]
    fn example2_rejects_coinciding_zeros() {
        let mut spec = ScenarioSpec::example2();
        spec.a2 = spec.a1;
        spec.c2 = spec.c1;
        assert!(matches!(build(&spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn example3_rejects_distinct_subsystems() {
        let mut spec = ScenarioSpec::example3();
        spec.c2 = c64(1.001, 0.0);
        assert!(matches!(build(&spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn inconsistent_drift_scalar_is_rejected() {
        let mut spec = ScenarioSpec::example2();
        spec.a1 = c64(-0.7, 0.0); // needs Re A = -0.5 for C = 1
        assert!(matches!(build(&spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn example3_regression_distributes_entanglement() {
        let outcome =
            run_regression(&ScenarioSpec::example3(), None, Thresholds::default()).unwrap();
        assert!(outcome.blocking_found);
        assert!(!outcome.entangled_input_required);
        assert_eq!(outcome.construction, PulseConstruction::SeparableBlocking);
        assert!(outcome.report.passed, "report: {:?}", outcome.report);
        let achieved = &outcome.report.achieved_target;
        assert!((achieved[0] - c64(0.6, 0.0)).norm() < 1e-5);
        assert!((achieved[1] - c64(0.8, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn example2_regression_matches_eigenvector_combination() {
        let outcome =
            run_regression(&ScenarioSpec::example2(), None, Thresholds::default()).unwrap();
        assert!(outcome.report.passed, "report: {:?}", outcome.report);
        for row in &outcome.zero_table {
            assert!(row.z_error < 1e-9);
            assert!(row.u_alignment.unwrap() > 1.0 - 1e-9);
            assert!(row.v_alignment.unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn example4_generic_flags_entangled_requirement() {
        let mut spec = ScenarioSpec::example4();
        spec.alpha = 0.6;
        spec.beta = 0.8;
        spec.gamma1 = 1.0;
        spec.gamma2 = 2.0;
        let outcome = run_regression(&spec, None, Thresholds::default()).unwrap();
        assert!(!outcome.blocking_found);
        assert!(outcome.entangled_input_required);
        assert_eq!(outcome.construction, PulseConstruction::ZeroMode);
        assert!(outcome.report.passed, "report: {:?}", outcome.report);
    }

    #[test]
    fn example1_regression_transfers_arbitrary_superposition() {
        let mut spec = ScenarioSpec::example1();
        spec.x = vec![c64(0.6, 0.0), c64(0.0, 0.8)];
        let outcome = run_regression(&spec, None, Thresholds::default()).unwrap();
        assert!(outcome.entangled_input_required);
        assert_eq!(outcome.construction, PulseConstruction::ZeroMode);
        assert!(outcome.report.passed, "report: {:?}", outcome.report);
    }

    #[test]
    fn separable_routes_meet_the_tight_fidelity_bar() {
        // The single-channel runs have no ensemble variance; hold them to
        // 1e-6 rather than the verdict default.
        for spec in [ScenarioSpec::example3(), ScenarioSpec::example4()] {
            let outcome = run_regression(&spec, None, Thresholds::default()).unwrap();
            assert!(
                outcome.report.fidelity >= 1.0 - 1e-6,
                "{}: fidelity {}",
                spec.name.as_str(),
                outcome.report.fidelity
            );
        }
    }

    #[test]
    fn example3_blocking_stable_under_joint_perturbation() {
        // Nudging both subsystems together keeps the blocking zero.
        let mut spec = ScenarioSpec::example3();
        let c = c64(1.001, 0.0);
        spec.c1 = c;
        spec.c2 = c;
        spec.a1 = c64(-c.norm_sqr() / 2.0, 0.0);
        spec.a2 = spec.a1;
        let sys = build(&spec).unwrap();
        assert!(transmission_zeros(&sys)
            .unwrap()
            .iter()
            .all(|r| r.is_blocking));
    }
}
