//! Error type shared by all modules.

use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by decoding, learning, and metric routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// Two shapes that must agree do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A value that must be finite is NaN or infinite.
    NonFinite { what: &'static str },
    /// A parameter is outside its documented range.
    InvalidParameter { what: &'static str },
    /// Segment list violates contiguity, coverage, or duration rules.
    InvalidSegmentation { what: &'static str },
    /// Adjacent segments carry the same label where strictness is required.
    NotStrict,
    /// Two sequences that must have equal length do not.
    LengthMismatch { left: usize, right: usize },
    /// No segmentation satisfies the constraints (e.g. forbidden transitions
    /// everywhere while the duration cap forces more than one segment).
    Infeasible,
    /// Exhaustive enumeration refused: the sequence is too long.
    SequenceTooLong { frames: usize, limit: usize },
    /// The requested potential configuration is not supported.
    Unsupported { what: &'static str },
    /// An input that must be non-empty is empty.
    Empty { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch for {what}: expected {expected}, found {found}"),
            Error::NonFinite { what } => write!(f, "{what} must be finite"),
            Error::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
            Error::InvalidSegmentation { what } => write!(f, "invalid segmentation: {what}"),
            Error::NotStrict => write!(f, "segmentation has adjacent segments with equal labels"),
            Error::LengthMismatch { left, right } => {
                write!(f, "sequence lengths differ: {left} vs {right}")
            }
            Error::Infeasible => write!(f, "no feasible segmentation under the given constraints"),
            Error::SequenceTooLong { frames, limit } => {
                write!(f, "refusing exhaustive enumeration of {frames} frames (limit {limit})")
            }
            Error::Unsupported { what } => write!(f, "unsupported configuration: {what}"),
            Error::Empty { what } => write!(f, "{what} must be non-empty"),
        }
    }
}

impl core::error::Error for Error {}
