//! Analysis of MIMO passive linear quantum systems.
//!
//! A passive linear quantum system is described by the triple `(Ω, C, S)`:
//! an `n×n` Hermitian Hamiltonian matrix, an `m×n` system–field coupling
//! matrix, and an `m×m` unitary scattering matrix, with drift matrix
//! `A = -iΩ - C†C/2`. This crate computes the transmission and blocking
//! zeros of the transfer function `G(s) = [I - C(sI-A)⁻¹C†]S`, synthesizes
//! the rising-exponential input pulses that are perfectly absorbed by the
//! system, and verifies the transfer with an independent single-excitation
//! ODE simulator.
//!
//! Modules:
//! - [`numerics`]: dense complex linear algebra and integration primitives
//! - [`model`]: the [`model::PassiveSystem`] realization and composition
//! - [`zeros`]: transfer-function evaluation and zero computation
//! - [`pulses`]: input pulse synthesis ([`pulses::PulsePlan`])
//! - [`simulate`]: the ODE verification oracle and transfer reports
//! - [`scenarios`]: canned two-cavity and ring-resonator regression setups
//! - [`io`]: JSON/CSV encodings used by the CLI
//!
//! Distributing one photon over two identical cavities behind a beam
//! splitter, end to end:
//!
//! ```
//! use photonxfer::model::{beam_splitter, single_mode_cavity};
//! use photonxfer::numerics::c64;
//! use photonxfer::pulses::{separable_transfer_plan, SeparableOutcome};
//! use photonxfer::simulate::{verify_transfer, Thresholds};
//! use photonxfer::zeros::transmission_zeros;
//!
//! let cavity = single_mode_cavity(0.0, c64(1.0, 0.0))?;
//! let system = cavity
//!     .direct_sum(&cavity)?
//!     .prepend_scattering(&beam_splitter(0.6, 0.8)?)?;
//!
//! // Identical subsystems make the lone zero blocking, so one channel
//! // suffices.
//! assert!(transmission_zeros(&system)?.iter().all(|r| r.is_blocking));
//! let SeparableOutcome::Separable { plan, .. } = separable_transfer_plan(&system, None)?
//! else {
//!     unreachable!("blocking zero admits a separable plan");
//! };
//!
//! let (_, report) = verify_transfer(&system, &plan, None, Thresholds::default())?;
//! assert!(report.passed);
//! assert!((report.achieved_target[0] - c64(0.6, 0.0)).norm() < 1e-5);
//! assert!((report.achieved_target[1] - c64(0.8, 0.0)).norm() < 1e-5);
//! # Ok::<(), photonxfer::Error>(())
//! ```

pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod pulses;
pub mod scenarios;
pub mod simulate;
pub mod zeros;

pub use error::{Error, Result};
pub use model::{beam_splitter, PassiveSystem, ValidationReport};
pub use numerics::{CMatrix, CVector, C64};
pub use pulses::{PulsePlan, SeparableOutcome};
pub use simulate::{ExcitationTrajectory, Thresholds, TransferReport};
pub use zeros::ZeroRecord;
