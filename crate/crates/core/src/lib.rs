//! Simulation of quantum cloning and deleting machines with l1-norm
//! coherence accounting.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: kets, density matrices, tensor products, partial traces and
//!   two-qubit Pauli decompositions.
//! - [`coherence`]: l1-norm coherence, local/global/residual reports.
//! - [`machines`]: cloner and deleter definitions with closed-form evaluators
//!   for the output-state coefficient tables.
//! - [`oracle`]: brute-force isometry simulation used to check every closed
//!   form.
//! - [`pipelines`]: clone-then-delete and delete-then-clone processes.
//! - [`analysis`]: parameter sweeps, consumption thresholds, fidelity extrema
//!   and CSV output.
//! - [`cli`]: the `qclone` command-line front end.

pub mod analysis;
pub mod cli;
pub mod coherence;
pub mod error;
pub mod machines;
pub mod oracle;
pub mod pipelines;
pub mod qstate;

pub use error::{Error, Result};
pub use num_complex::Complex64;
