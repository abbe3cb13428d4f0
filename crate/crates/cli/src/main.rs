//! Batch CLI for passive linear quantum system analysis.
//!
//! Subcommands: `validate`, `zeros`, `pulse`, `simulate`, and `demo`. Data
//! artifacts go to stdout or `--out` as JSON (CSV for time series);
//! diagnostics go to stderr. Exit codes: 0 success or verdict pass, 1
//! verdict fail, 2 input or validation error. Set `PHOTONXFER_LOG` to
//! `error|warn|info|debug` for logging.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use photonxfer::io;
use photonxfer::model::PassiveSystem;
use photonxfer::pulses::{
    pulse_for_target, separable_transfer_plan, zero_mode_pulse, PulsePlan, SeparableOutcome,
};
use photonxfer::scenarios::{self, ExampleName, ScenarioSpec};
use photonxfer::simulate::{verify_transfer, Thresholds};
use photonxfer::zeros::transmission_zeros;

#[derive(Parser)]
#[command(
    name = "photonxfer",
    version,
    about = "Transfer-function zeros, pulse shaping, and \
perfect single-photon transfer for MIMO passive linear quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PlanOpts {
    /// Pulse construction: "target" (absorb into a coefficient vector),
    /// "zero-mode" (rising exponentials over all transmission zeros) or
    /// "separable" (single-channel input when the zero structure allows)
    #[arg(long, default_value = "separable")]
    construction: String,

    /// Complex coefficients as "re,im;re,im;...": the target vector for
    /// "target", the per-zero weights for "zero-mode"
    #[arg(long)]
    coeffs: Option<String>,

    /// Input channel for the separable route
    #[arg(long)]
    channel: Option<usize>,

    /// Use the raw (unnormalized) zero directions in zero-mode plans
    #[arg(long)]
    raw_u: bool,

    /// Truncation parameter ε: the pulse window is cut where the remaining
    /// mass falls below ε²
    #[arg(long)]
    trunc_eps: Option<f64>,
}

#[derive(Args)]
struct VerdictOpts {
    /// Integration step (defaults to a hundredth of the stability bound)
    #[arg(long)]
    dt: Option<f64>,

    /// Fidelity tolerance: pass needs fidelity ≥ 1 - fid-tol
    #[arg(long, default_value_t = 1e-5)]
    fid_tol: f64,

    /// Leakage tolerance: pass needs leakage ≤ leak-tol
    #[arg(long, default_value_t = 1e-5)]
    leak_tol: f64,

    /// Conservation tolerance on |input - final - output|
    #[arg(long, default_value_t = 1e-6)]
    cons_tol: f64,

    /// Write the sampled trajectory as CSV
    #[arg(long)]
    dump_trajectory: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural properties of a system description file
    Validate {
        /// System description (JSON, schema photonxfer-system/1)
        #[arg(long)]
        system: PathBuf,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List transmission zeros (blocking zeros flagged) of a system
    Zeros {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize an input pulse plan
    Pulse {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        plan: PlanOpts,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a dense shape sampling as CSV
        #[arg(long)]
        dump_shape: Option<PathBuf>,
        /// Number of samples for --dump-shape
        #[arg(long, default_value_t = 512)]
        shape_samples: usize,
    },
    /// Propagate a pulse plan through the system and report the transfer
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        plan: PlanOpts,
        #[command(flatten)]
        verdict: VerdictOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a worked example (example1..example4); omit the name to run all
    Demo {
        /// example1 | example2 | example3 | example4
        name: Option<String>,
        /// Beam splitter transmissivity
        #[arg(long)]
        alpha: Option<f64>,
        /// Beam splitter reflectivity
        #[arg(long)]
        beta: Option<f64>,
        /// First waveguide coupling (example4)
        #[arg(long)]
        gamma1: Option<f64>,
        /// Second waveguide coupling (example4)
        #[arg(long)]
        gamma2: Option<f64>,
        /// Target coefficients "re,im;re,im" for examples 1 and 2
        #[arg(long)]
        coeffs: Option<String>,
        /// Propagate the synthesized plan and report fidelity
        #[arg(long)]
        simulate: bool,
        /// Worker threads when running several examples
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        verdict: VerdictOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter_or("PHOTONXFER_LOG", "warn")
            .write_style("PHOTONXFER_LOG_STYLE"),
    )
    .init();

    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Validate { system, out } => {
            let sys = load_system(&system)?;
            let report = sys.validate(photonxfer::numerics::STRUCTURAL_TOL);
            emit(out.as_deref(), &io::validation_to_json(&report)?)?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                log::warn!("validation failed: {}", report.messages.join("; "));
                Ok(ExitCode::from(2))
            }
        }
        Command::Zeros { system, out } => {
            let sys = load_system(&system)?;
            let records = transmission_zeros(&sys)?;
            log::info!(
                "{} transmission zeros, {} blocking",
                records.len(),
                records.iter().filter(|r| r.is_blocking).count()
            );
            emit(out.as_deref(), &io::zeros_to_json(&records)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pulse {
            system,
            plan,
            out,
            dump_shape,
            shape_samples,
        } => {
            let sys = load_system(&system)?;
            let built = build_plan(&sys, &plan)?;
            emit(out.as_deref(), &io::plan_to_json(&built)?)?;
            if let Some(path) = dump_shape {
                write_atomic(&path, &io::plan_samples_to_csv(&built, shape_samples)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            system,
            plan,
            verdict,
            out,
        } => {
            let sys = load_system(&system)?;
            let built = build_plan(&sys, &plan)?;
            let thresholds = Thresholds {
                fid_tol: verdict.fid_tol,
                leak_tol: verdict.leak_tol,
                cons_tol: verdict.cons_tol,
            };
            let (traj, report) = verify_transfer(&sys, &built, verdict.dt, thresholds)?;
            if let Some(path) = &verdict.dump_trajectory {
                write_atomic(path, &io::trajectory_to_csv(&traj))?;
            }
            log::info!(
                "fidelity {:.9}, leakage {:.3e}, verdict {}",
                report.fidelity,
                report.leakage,
                if report.passed { "pass" } else { "fail" }
            );
            emit(out.as_deref(), &io::report_to_json(&report)?)?;
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Demo {
            name,
            alpha,
            beta,
            gamma1,
            gamma2,
            coeffs,
            simulate,
            workers,
            verdict,
            out,
        } => {
            let names: Vec<ExampleName> = match &name {
                Some(n) => vec![n.parse::<ExampleName>()?],
                None => vec![
                    ExampleName::Example1,
                    ExampleName::Example2,
                    ExampleName::Example3,
                    ExampleName::Example4,
                ],
            };
            let mut specs = Vec::new();
            for n in names {
                let mut spec = match n {
                    ExampleName::Example1 => ScenarioSpec::example1(),
                    ExampleName::Example2 => ScenarioSpec::example2(),
                    ExampleName::Example3 => ScenarioSpec::example3(),
                    ExampleName::Example4 => ScenarioSpec::example4(),
                };
                if let Some(a) = alpha {
                    spec.alpha = a;
                }
                if let Some(b) = beta {
                    spec.beta = b;
                }
                if let Some(g) = gamma1 {
                    spec.gamma1 = g;
                }
                if let Some(g) = gamma2 {
                    spec.gamma2 = g;
                }
                if let Some(c) = &coeffs {
                    spec.x = parse_coeffs(c)?;
                }
                specs.push(spec);
            }

            let thresholds = Thresholds {
                fid_tol: verdict.fid_tol,
                leak_tol: verdict.leak_tol,
                cons_tol: verdict.cons_tol,
            };
            let dump = match (&verdict.dump_trajectory, specs.len(), simulate) {
                (Some(path), 1, true) => Some(path.as_path()),
                (Some(path), _, _) => {
                    log::warn!(
                        "--dump-trajectory {} needs a single example with --simulate; skipping",
                        path.display()
                    );
                    None
                }
                (None, _, _) => None,
            };
            let outputs = run_demos(&specs, simulate, verdict.dt, thresholds, workers, dump)?;

            let mut all_passed = true;
            let mut pieces = Vec::new();
            for (spec, output) in specs.iter().zip(outputs) {
                match output {
                    DemoOutput::Survey(json) => pieces.push(json),
                    DemoOutput::Regression { json, passed } => {
                        log::info!(
                            "{}: verdict {}",
                            spec.name.as_str(),
                            if passed { "pass" } else { "fail" }
                        );
                        all_passed &= passed;
                        pieces.push(json);
                    }
                }
            }
            let body = if name.is_some() {
                pieces.pop().unwrap_or_default()
            } else {
                format!("[{}]", pieces.join(","))
            };
            emit(out.as_deref(), &body)?;

            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

enum DemoOutput {
    Survey(String),
    Regression { json: String, passed: bool },
}

fn run_demo_one(
    spec: &ScenarioSpec,
    simulate: bool,
    dt: Option<f64>,
    thresholds: Thresholds,
    dump_trajectory: Option<&Path>,
) -> anyhow::Result<DemoOutput> {
    if simulate {
        let (outcome, trajectory) =
            scenarios::run_regression_with_trajectory(spec, dt, thresholds)?;
        if let Some(path) = dump_trajectory {
            write_atomic(path, &io::trajectory_to_csv(&trajectory))?;
        }
        let passed = outcome.report.passed;
        Ok(DemoOutput::Regression {
            json: io::regression_to_json(&outcome)?,
            passed,
        })
    } else {
        let sys = scenarios::build(spec)?;
        let records = transmission_zeros(&sys)?;
        Ok(DemoOutput::Survey(io::survey_to_json(
            spec.name.as_str(),
            &sys,
            &records,
        )?))
    }
}

fn run_demos(
    specs: &[ScenarioSpec],
    simulate: bool,
    dt: Option<f64>,
    thresholds: Thresholds,
    workers: usize,
    dump_trajectory: Option<&Path>,
) -> anyhow::Result<Vec<DemoOutput>> {
    let workers = workers.max(1).min(specs.len().max(1));
    if workers == 1 || specs.len() == 1 {
        return specs
            .iter()
            .map(|s| run_demo_one(s, simulate, dt, thresholds, dump_trajectory))
            .collect();
    }

    // Fan the examples out across a small worker pool; results keep their
    // input order.
    let mut slots: Vec<Option<anyhow::Result<DemoOutput>>> =
        (0..specs.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= specs.len() {
                    break;
                }
                let result = run_demo_one(&specs[i], simulate, dt, thresholds, None);
                slots_mutex.lock().unwrap()[i] = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every demo slot filled"))
        .collect()
}

/// "re,im;re,im;…" → complex coefficient vector.
fn parse_coeffs(text: &str) -> anyhow::Result<Vec<C64>> {
    let mut out = Vec::new();
    for (i, chunk) in text.split(';').enumerate() {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            bail!("coefficient {i}: expected \"re,im\", got \"{chunk}\"");
        }
        let re: f64 = parts[0]
            .parse()
            .with_context(|| format!("coefficient {i}: bad real part \"{}\"", parts[0]))?;
        let im: f64 = parts[1]
            .parse()
            .with_context(|| format!("coefficient {i}: bad imaginary part \"{}\"", parts[1]))?;
        out.push(C64::new(re, im));
    }
    if out.is_empty() {
        bail!("empty coefficient list");
    }
    Ok(out)
}

fn build_plan(sys: &PassiveSystem, opts: &PlanOpts) -> anyhow::Result<PulsePlan> {
    let plan = match opts.construction.as_str() {
        "target" => {
            let coeffs = opts
                .coeffs
                .as_deref()
                .ok_or_else(|| anyhow!("--construction target requires --coeffs"))?;
            let raw = parse_coeffs(coeffs)?;
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm <= 0.0 {
                bail!("target coefficients are all zero");
            }
            if (norm - 1.0).abs() > 1e-9 {
                log::info!("normalizing target coefficients (‖x‖ was {norm})");
            }
            let x = photonxfer::numerics::CVector::from_iter(raw.into_iter().map(|z| z / norm));
            pulse_for_target(sys, &x)?
        }
        "zero-mode" => {
            let coeffs = opts
                .coeffs
                .as_deref()
                .ok_or_else(|| anyhow!("--construction zero-mode requires --coeffs"))?;
            let x = parse_coeffs(coeffs)?;
            let records = transmission_zeros(sys)?;
            zero_mode_pulse(&records, &x, opts.raw_u)?
        }
        "separable" => match separable_transfer_plan(sys, opts.channel)? {
            SeparableOutcome::Separable { plan, channel, .. } => {
                log::info!("separable input on channel {channel}");
                plan
            }
            SeparableOutcome::EntangledRequired {
                justification,
                alternative,
                ..
            } => {
                log::warn!("{justification}");
                log::warn!("falling back to the entangled zero-mode plan");
                alternative
            }
        },
        other => bail!("unknown construction \"{other}\" (target | zero-mode | separable)"),
    };
    Ok(match opts.trunc_eps {
        Some(eps) => plan.with_trunc_eps(eps)?,
        None => plan,
    })
}

fn load_system(path: &Path) -> anyhow::Result<PassiveSystem> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::system_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Write to `--out` atomically (write-then-rename), or print to stdout.
/// A consumer that stops reading (broken pipe) ends the process quietly.
fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match out {
        Some(path) => write_atomic(path, &format!("{body}\n")),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{body}").and_then(|()| stdout.flush()) {
                Ok(()) => Ok(()),
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                    std::process::exit(0);
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn write_atomic(path: &Path, body: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, body).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}
