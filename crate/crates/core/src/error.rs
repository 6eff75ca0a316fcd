// SPDX-License-Identifier: Apache-2.0

use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between a raw dump and a key.
#[derive(Debug, Error)]
pub enum Error {
    /// Two bit vectors that must line up do not.
    #[error("length mismatch: {left} bits vs {right} bits")]
    LengthMismatch { left: usize, right: usize },

    /// An input has the wrong fixed size.
    #[error("{what} must be {expected} bits, got {actual}")]
    InvalidLength {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A precondition on the arguments was violated.
    #[error("{0}")]
    Usage(String),

    /// A hex dump could not be parsed.
    #[error("line {line}: {message}")]
    DumpParse { line: usize, message: String },

    /// A mask, helper, registry or calibration file is malformed.
    #[error("invalid {kind} file: {message}")]
    Format { kind: &'static str, message: String },

    /// Not enough positions survive the threshold to fill the mask.
    #[error(
        "insufficient stable bits: need {needed}, found {found} across {} window(s) (per window: {per_window:?})",
        per_window.len()
    )]
    InsufficientStableBits {
        needed: usize,
        found: usize,
        per_window: Vec<usize>,
    },

    /// The syndrome does not point at any bit of the shortened code.
    #[error("uncorrectable word (syndrome {syndrome:#04x})")]
    Uncorrectable { syndrome: u16 },

    /// The response is too far from the enrolled one; the SRAM has to be
    /// power-cycled and read again.
    #[error("key reproduction failed: response has more errors than the code corrects")]
    ReproduceFailure,

    /// Helper data was generated for a different mask.
    #[error("mask fingerprint mismatch: helper expects {expected}, mask is {actual}")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("unknown device {0:?}")]
    UnknownDevice(String),

    #[error("device {0:?} is already enrolled")]
    DuplicateDevice(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn format(kind: &'static str, msg: impl ToString) -> Self {
        Error::Format {
            kind,
            message: msg.to_string(),
        }
    }

    /// Process exit status used by the command-line front end.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 0    | success |
    /// | 1    | I/O or malformed file |
    /// | 2    | usage error (bad arguments, unknown device, fingerprint mismatch) |
    /// | 3    | key reproduction failed; power-cycle and retry |
    /// | 4    | enrollment found too few stable bits |
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) | Error::DumpParse { .. } | Error::Format { .. } => 1,
            Error::ReproduceFailure | Error::Uncorrectable { .. } => 3,
            Error::InsufficientStableBits { .. } => 4,
            Error::LengthMismatch { .. }
            | Error::InvalidLength { .. }
            | Error::Usage(_)
            | Error::FingerprintMismatch { .. }
            | Error::UnknownDevice(_)
            | Error::DuplicateDevice(_) => 2,
        }
    }
}
