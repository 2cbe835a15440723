// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("axis kind mismatch: {left:?} vs {right:?}")]
    AxisMismatch { left: crate::func::AxisKind, right: crate::func::AxisKind },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("shape is not normalizable: {0}")]
    NotNormalizable(String),

    #[error("operation has no closed form in this representation: {0}")]
    Unsupported(String),

    #[error("element is not unitary: defect {defect:e}")]
    NonUnitary { defect: f64 },

    #[error("value cannot be represented exactly: {0}")]
    NotExact(String),

    #[error("strict mode violation: {0}")]
    Strict(String),

    #[error("malformed circuit: {0}")]
    Circuit(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
