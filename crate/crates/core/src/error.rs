use thiserror::Error;

/// Errors raised by the library. The CLI maps [`Error::exit_code`] onto its
/// process status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid digit system: {0}")]
    InvalidSystem(String),

    #[error("digit {digit} is not in the digit set {digits:?}")]
    InvalidDigit { digit: i64, digits: Vec<i64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{what} exceeds the cap ({requested} > {cap})")]
    CapExceeded { what: &'static str, requested: u128, cap: u128 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(u32, u32),

    #[error("vectors belong to different digit systems")]
    SystemMismatch,

    #[error("cannot coarsen a vector from resolution {from} to {to}")]
    CoarseningNotSupported { from: i32, to: i32 },

    #[error("filter is not normalized: R(1) != 1 ({0})")]
    NotNormalized(String),

    #[error("the pair is not dual (unitarity defect {0:e})")]
    NotDual(f64),

    #[error("moment {0} is not available in the table")]
    MissingMoment(i64),

    #[error("(m0,N)-cycles found; the invariant measure is not unique: {0}")]
    CyclesPresent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } | Error::Overflow(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
