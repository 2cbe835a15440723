// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation and error-budget analysis for linear optical quantum computation
//! with time-frequency Gottesman-Kitaev-Preskill (TFGKP) qubits.
//!
//! A TFGKP qudit is a single photon whose spectrum is a frequency comb. The
//! computational (frequency) basis states are combs offset by `j/d` of the
//! line spacing `omega_r`; the conjugate (time) basis states are temporal combs
//! with period `tau_r = 2 pi d / omega_r`.
//!
//! The crate is organized bottom-up:
//!
//! - [`func`]: probability amplitude functions, Dirac combs and the
//!   translation/modulation/Fourier calculus they obey.
//! - [`states`]: physical TFGKP states, propagation and dispersion.
//! - [`elements`]: beam splitters, optical interleavers, delays, phase gates.
//! - [`detection`]: finite-resolution time and frequency detectors.
//! - [`error_budget`]: closed-form and quadrature error probabilities,
//!   threshold inequalities and the hardware-requirement calculator.
//! - [`fock`]: exact few-photon simulation of the entangling circuits.
//! - [`cli`]: the command-line front end used by the `tfgkp` binary.
//!
//! Units: time in picoseconds, angular frequency in rad/ps. Ordinary
//! frequencies (GHz/THz) only appear at the CLI and file boundary.

// negated comparisons are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detection;
pub mod elements;
pub mod error;
pub mod error_budget;
pub mod fock;
pub mod func;
pub mod quad;
pub mod states;

pub(crate) use error::invalid;
pub use error::{Error, Result};

/// Crate version embedded in every artifact written by the CLI.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
