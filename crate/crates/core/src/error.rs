use alloc::string::String;
use core::fmt;

/// Errors raised by the workbench.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two operands disagree on bit length.
    LengthMismatch { expected: usize, found: usize },
    /// A numeric argument is outside its allowed range.
    OutOfRange { what: &'static str, value: usize, min: usize, max: usize },
    /// An argument violates a structural requirement.
    Invalid(&'static str),
    /// Text could not be parsed.
    Parse(String),
    /// Requested register exceeds the simulator memory guard.
    MemoryGuard { qubits: usize, max: usize },
    /// A token was used for a second signature.
    TokenConsumed,
    /// Evaluation of a punctured key at a punctured point.
    Punctured,
    /// A parameter constraint failed outside toy mode.
    Constraint(String),
    /// A strategy touched something outside the game interface.
    InterfaceViolation(&'static str),
    /// Matrix is not Hermitian.
    NotHermitian,
    /// Matrix is not a projector.
    NotProjector,
    /// Mixture weights are not a probability distribution.
    BadProbabilities,
    /// Enumeration would be too large.
    TooLarge { what: &'static str, size: usize, max: usize },
    /// Program output disagrees with its per-register evaluation.
    InconsistentProgram,
    /// Serialized trigger program does not fit its field.
    Overflow { needed: usize, available: usize },
    /// Name does not match any registered item.
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected} bits, found {found}")
            }
            Error::OutOfRange { what, value, min, max } => {
                write!(f, "{what} = {value} outside [{min}, {max}]")
            }
            Error::Invalid(msg) => write!(f, "invalid argument: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::MemoryGuard { qubits, max } => {
                write!(f, "{qubits} qubits exceeds the simulator limit of {max}")
            }
            Error::TokenConsumed => f.write_str("token already consumed"),
            Error::Punctured => f.write_str("input is punctured"),
            Error::Constraint(msg) => write!(f, "parameter constraint violated: {msg}"),
            Error::InterfaceViolation(msg) => write!(f, "interface violation: {msg}"),
            Error::NotHermitian => f.write_str("matrix is not Hermitian"),
            Error::NotProjector => f.write_str("matrix is not a projector"),
            Error::BadProbabilities => f.write_str("weights do not form a probability distribution"),
            Error::TooLarge { what, size, max } => write!(f, "{what} size {size} exceeds {max}"),
            Error::InconsistentProgram => {
                f.write_str("program output inconsistent with per-register evaluation")
            }
            Error::Overflow { needed, available } => {
                write!(f, "needs {needed} bits but only {available} available")
            }
            Error::Unknown { what, name } => write!(f, "unknown {what}: {name}"),
        }
    }
}

impl core::error::Error for Error {}
