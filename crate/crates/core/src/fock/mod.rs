// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Photon-number simulation of heralded gates on time-frequency qudits.

pub mod circuit;
pub mod scalar;
pub mod state;

pub use circuit::*;
pub use scalar::{Amplitude, ExactComplex, QSqrt2};
pub use state::{sector_overlap, FockState, ModeLayout, Occupation};
