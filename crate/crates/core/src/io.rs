//! JSON and CSV encodings for the CLI surface.
//!
//! Complex numbers are always two-element `[re, im]` arrays and matrices
//! are row-major nested arrays. Reports are emitted with a fixed field
//! order and floats printed with 17 significant digits, so identical inputs
//! produce byte-identical artifacts.

use serde::{Deserialize, Serialize};

use crate::model::{PassiveSystem, ValidationReport};
use crate::numerics::{c64, CMatrix, CVector, C64};
use crate::pulses::{PulsePlan, PulseShape};
use crate::scenarios::RegressionOutcome;
use crate::simulate::{ExcitationTrajectory, TransferReport};
use crate::zeros::ZeroRecord;
use crate::{Error, Result};

/// Schema tag expected in system description files.
pub const SYSTEM_SCHEMA: &str = "photonxfer-system/1";

// ---------------------------------------------------------------------------
// 17-significant-digit JSON output

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "non-finite float cannot be encoded as JSON",
            ));
        }
        // 1 + 16 digits of mantissa: enough to round-trip any f64.
        write!(writer, "{value:.16e}")
    }
}

/// Serialize with deterministic float formatting.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Input(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Input(format!("serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// complex/matrix encoding helpers

fn cx(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn vector_dto(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(cx).collect()
}

fn matrix_dto(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(cx).collect())
        .collect()
}

fn matrix_from_dto(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Input(format!("{what}: ragged matrix rows")));
    }
    let mut m = CMatrix::zeros((nrows, ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, pair) in row.iter().enumerate() {
            m[(i, j)] = c64(pair[0], pair[1]);
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// system description file

#[derive(Serialize, Deserialize)]
struct SystemDto {
    schema: String,
    n: usize,
    m: usize,
    omega: Vec<Vec<[f64; 2]>>,
    coupling: Vec<Vec<[f64; 2]>>,
    scattering: Vec<Vec<[f64; 2]>>,
}

pub fn system_to_json(sys: &PassiveSystem) -> Result<String> {
    to_json(&SystemDto {
        schema: SYSTEM_SCHEMA.to_string(),
        n: sys.modes(),
        m: sys.channels(),
        omega: matrix_dto(sys.omega()),
        coupling: matrix_dto(sys.coupling()),
        scattering: matrix_dto(sys.scattering()),
    })
}

pub fn system_from_json(text: &str) -> Result<PassiveSystem> {
    let dto: SystemDto = serde_json::from_str(text).map_err(|e| {
        Error::Input(format!(
            "system file: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    if dto.schema != SYSTEM_SCHEMA {
        return Err(Error::Input(format!(
            "system file: schema '{}' is not '{SYSTEM_SCHEMA}'",
            dto.schema
        )));
    }
    let omega = matrix_from_dto(&dto.omega, "omega")?;
    let coupling = matrix_from_dto(&dto.coupling, "coupling")?;
    let scattering = matrix_from_dto(&dto.scattering, "scattering")?;
    if omega.nrows() != dto.n || coupling.nrows() != dto.m {
        return Err(Error::Input(format!(
            "system file: declared n = {}, m = {} but omega is {}x{} and coupling {}x{}",
            dto.n,
            dto.m,
            omega.nrows(),
            omega.ncols(),
            coupling.nrows(),
            coupling.ncols()
        )));
    }
    PassiveSystem::new(omega, coupling, scattering)
}

// ---------------------------------------------------------------------------
// reports

#[derive(Serialize)]
struct ValidationDto {
    hermiticity_defect: f64,
    unitarity_defect: f64,
    hurwitz_margin_found: f64,
    passed: bool,
    messages: Vec<String>,
}

pub fn validation_to_json(report: &ValidationReport) -> Result<String> {
    to_json(&ValidationDto {
        hermiticity_defect: report.hermiticity_defect,
        unitarity_defect: report.unitarity_defect,
        hurwitz_margin_found: report.hurwitz_margin_found,
        passed: report.passed,
        messages: report.messages.clone(),
    })
}

#[derive(Serialize)]
struct ZeroDto {
    z: [f64; 2],
    u: Vec<[f64; 2]>,
    v: Vec<[f64; 2]>,
    u_raw: Vec<[f64; 2]>,
    residual: f64,
    is_blocking: bool,
    degenerate: bool,
}

pub fn zeros_to_json(records: &[ZeroRecord]) -> Result<String> {
    let dtos: Vec<ZeroDto> = records
        .iter()
        .map(|r| ZeroDto {
            z: cx(&r.z),
            u: vector_dto(&r.u),
            v: vector_dto(&r.v),
            u_raw: vector_dto(&r.u_raw),
            residual: r.residual,
            is_blocking: r.is_blocking,
            degenerate: r.degenerate,
        })
        .collect();
    to_json(&dtos)
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum ShapeDto {
    ModeSum {
        rates: Vec<[f64; 2]>,
        amplitudes: Vec<Vec<[f64; 2]>>,
    },
    XiCombination {
        adjoint_drift: Vec<Vec<[f64; 2]>>,
        front: Vec<Vec<[f64; 2]>>,
        coefficients: Vec<[f64; 2]>,
    },
    ReversedWindow {
        rate: [f64; 2],
        amplitude: Vec<[f64; 2]>,
        window_start: f64,
    },
}

#[derive(Serialize)]
struct PlanDto {
    construction: String,
    channels: usize,
    l2_norm: f64,
    window_start: f64,
    trunc_eps: f64,
    predicted_target: Vec<[f64; 2]>,
    predicted_target_raw: Vec<[f64; 2]>,
    shape: ShapeDto,
}

pub fn plan_to_json(plan: &PulsePlan) -> Result<String> {
    let shape = match &plan.shape {
        PulseShape::ModeSum { rates, amplitudes } => ShapeDto::ModeSum {
            rates: rates.iter().map(cx).collect(),
            amplitudes: amplitudes.iter().map(vector_dto).collect(),
        },
        PulseShape::XiCombination {
            adjoint_drift,
            front,
            coefficients,
        } => ShapeDto::XiCombination {
            adjoint_drift: matrix_dto(adjoint_drift),
            front: matrix_dto(front),
            coefficients: vector_dto(coefficients),
        },
        PulseShape::ReversedWindow {
            rate,
            amplitude,
            window_start,
        } => ShapeDto::ReversedWindow {
            rate: cx(rate),
            amplitude: vector_dto(amplitude),
            window_start: *window_start,
        },
    };
    to_json(&PlanDto {
        construction: plan.construction.tag().to_string(),
        channels: plan.channels(),
        l2_norm: plan.l2_norm,
        window_start: plan.window_start,
        trunc_eps: plan.trunc_eps,
        predicted_target: vector_dto(&plan.predicted_target),
        predicted_target_raw: vector_dto(&plan.predicted_target_raw),
        shape,
    })
}

#[derive(Serialize)]
struct TransferDto {
    fidelity: f64,
    leakage: f64,
    conservation_defect: f64,
    input_norm_sq: f64,
    output_norm_sq: f64,
    final_norm_sq: f64,
    predicted_target: Vec<[f64; 2]>,
    achieved_target: Vec<[f64; 2]>,
    fid_tol: f64,
    leak_tol: f64,
    cons_tol: f64,
    verdict: String,
    messages: Vec<String>,
}

fn transfer_dto(report: &TransferReport) -> TransferDto {
    TransferDto {
        fidelity: report.fidelity,
        leakage: report.leakage,
        conservation_defect: report.conservation_defect,
        input_norm_sq: report.input_norm_sq,
        output_norm_sq: report.output_norm_sq,
        final_norm_sq: report.final_norm_sq,
        predicted_target: vector_dto(&report.predicted_target),
        achieved_target: vector_dto(&report.achieved_target),
        fid_tol: report.thresholds.fid_tol,
        leak_tol: report.thresholds.leak_tol,
        cons_tol: report.thresholds.cons_tol,
        verdict: if report.passed { "pass" } else { "fail" }.to_string(),
        messages: report.messages.clone(),
    }
}

pub fn report_to_json(report: &TransferReport) -> Result<String> {
    to_json(&transfer_dto(report))
}

#[derive(Serialize)]
struct ZeroRowDto {
    expected_z: [f64; 2],
    computed_z: [f64; 2],
    z_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    u_alignment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v_alignment: Option<f64>,
}

#[derive(Serialize)]
struct RegressionDto {
    scenario: String,
    zero_table: Vec<ZeroRowDto>,
    blocking_expected: bool,
    blocking_found: bool,
    construction: String,
    entangled_input_required: bool,
    report: TransferDto,
    messages: Vec<String>,
}

pub fn regression_to_json(outcome: &RegressionOutcome) -> Result<String> {
    to_json(&RegressionDto {
        scenario: outcome.scenario.as_str().to_string(),
        zero_table: outcome
            .zero_table
            .iter()
            .map(|row| ZeroRowDto {
                expected_z: cx(&row.expected_z),
                computed_z: cx(&row.computed_z),
                z_error: row.z_error,
                u_alignment: row.u_alignment,
                v_alignment: row.v_alignment,
            })
            .collect(),
        blocking_expected: outcome.blocking_expected,
        blocking_found: outcome.blocking_found,
        construction: outcome.construction.tag().to_string(),
        entangled_input_required: outcome.entangled_input_required,
        report: transfer_dto(&outcome.report),
        messages: outcome.messages.clone(),
    })
}

#[derive(Serialize)]
struct SurveyDto {
    scenario: String,
    system: SystemDto,
    zeros: Box<serde_json::value::RawValue>,
}

/// Scenario survey without a propagation: the built system plus its zeros.
pub fn survey_to_json(
    scenario: &str,
    sys: &PassiveSystem,
    records: &[ZeroRecord],
) -> Result<String> {
    let zeros = serde_json::value::RawValue::from_string(zeros_to_json(records)?)
        .map_err(|e| Error::Input(format!("serialization failed: {e}")))?;
    to_json(&SurveyDto {
        scenario: scenario.to_string(),
        system: SystemDto {
            schema: SYSTEM_SCHEMA.to_string(),
            n: sys.modes(),
            m: sys.channels(),
            omega: matrix_dto(sys.omega()),
            coupling: matrix_dto(sys.coupling()),
            scattering: matrix_dto(sys.scattering()),
        },
        zeros,
    })
}

// ---------------------------------------------------------------------------
// CSV time series

fn push_float(out: &mut String, value: f64) {
    use std::fmt::Write;
    let _ = write!(out, ",{value:.16e}");
}

/// Columns: `t`, then `Re/Im` of each system amplitude, then `Re/Im` of each
/// output amplitude.
pub fn trajectory_to_csv(traj: &ExcitationTrajectory) -> String {
    let n = traj.psi.first().map_or(0, |p| p.len());
    let m = traj.eta.first().map_or(0, |e| e.len());
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",re_psi{i},im_psi{i}"));
    }
    for j in 0..m {
        out.push_str(&format!(",re_eta{j},im_eta{j}"));
    }
    out.push('\n');
    for (k, &t) in traj.times.iter().enumerate() {
        out.push_str(&format!("{t:.16e}"));
        for z in traj.psi[k].iter() {
            push_float(&mut out, z.re);
            push_float(&mut out, z.im);
        }
        for z in traj.eta[k].iter() {
            push_float(&mut out, z.re);
            push_float(&mut out, z.im);
        }
        out.push('\n');
    }
    out
}

/// Dense sampling of a plan's shape on its window: `t` plus `Re/Im` per
/// channel.
pub fn plan_samples_to_csv(plan: &PulsePlan, samples: usize) -> Result<String> {
    let samples = samples.max(2);
    let m = plan.channels();
    let step = -plan.window_start / (samples - 1) as f64;
    let values = plan
        .shape
        .sample_uniform(plan.window_start, step, samples)?;
    let mut out = String::from("t");
    for j in 0..m {
        out.push_str(&format!(",re_phi{j},im_phi{j}"));
    }
    out.push('\n');
    for (k, v) in values.iter().enumerate() {
        let t = plan.window_start + k as f64 * step;
        out.push_str(&format!("{t:.16e}"));
        for z in v.iter() {
            push_float(&mut out, z.re);
            push_float(&mut out, z.im);
        }
        out.push('\n');
    }
    Ok(out)
}
