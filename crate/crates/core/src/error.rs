use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model or template field violates one of its invariants.
    Invariant { field: &'static str, rule: String },
    /// Two inputs that must agree in size do not.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// A set the operation needs is empty (mask foreground, face list, ...).
    Empty(&'static str),
    /// A parameter is outside its admissible range.
    InvalidArgument(String),
    /// The linear system is singular or the matrix is not positive definite.
    Singular(String),
    /// Nothing could be rasterized.
    Rasterization(String),
    /// Two UV triangles of one island overlap.
    UvOverlap { island: &'static str, faces: (usize, usize) },
}

impl Error {
    pub(crate) fn invariant(field: &'static str, rule: impl Into<String>) -> Self {
        Error::Invariant { field, rule: rule.into() }
    }

    pub(crate) fn dims(what: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { what, expected, found }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invariant { field, rule } => write!(f, "invariant violated in `{field}`: {rule}"),
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, found {found}")
            }
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Singular(msg) => write!(f, "singular system: {msg}"),
            Error::Rasterization(msg) => write!(f, "rasterization failed: {msg}"),
            Error::UvOverlap { island, faces } => {
                write!(f, "UV triangles {} and {} overlap in the {island} island", faces.0, faces.1)
            }
        }
    }
}

impl core::error::Error for Error {}
