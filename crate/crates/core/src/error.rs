use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The modulus is not an odd prime that fits the native arithmetic.
    InvalidModulus(u64),
    /// Two operands carry different moduli.
    ModulusMismatch { left: u64, right: u64 },
    /// A coefficient table has the wrong shape.
    ShapeMismatch { expected: usize, got: usize },
    /// `a[i][j] == a[j][i]` for an index pair where both entries exist.
    SymmetricCoefficients { i: usize, j: usize },
    /// The degree condition `h > t(t-1)` is violated.
    ThresholdViolated { t: usize, h: usize },
    /// Participant identities must be distinct.
    DuplicateId(u64),
    /// Participant identities must be nonzero.
    ZeroId,
    /// A party index outside the configured chain.
    PartyOutOfRange { index: usize, m: usize },
    /// A pairwise key was requested between a participant and itself.
    SelfKey(u64),
    /// Qudit dimensions disagree.
    DimensionMismatch { left: usize, right: usize },
    /// The qudit is not where the operation needs it.
    NotHolder { expected: usize },
    /// The operation does not fit the current protocol phase.
    InvalidPhase(&'static str),
    /// An exhaustive search would exceed its budget.
    SearchTooLarge { size: u128, limit: u128 },
    /// A malformed attack configuration.
    InvalidAttack(&'static str),
    /// The configured chain is empty or larger than the dealt set.
    InvalidChain { m: usize, n: usize },
    /// No closed form is known for this combination.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModulus(d) => write!(f, "modulus {d} is not an odd prime below 2^32"),
            Error::ModulusMismatch { left, right } => {
                write!(f, "modulus mismatch: {left} vs {right}")
            }
            Error::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} coefficients, got {got}")
            }
            Error::SymmetricCoefficients { i, j } => {
                write!(f, "coefficients a[{i}][{j}] and a[{j}][{i}] are equal")
            }
            Error::ThresholdViolated { t, h } => write!(
                f,
                "threshold condition h > t(t-1) fails: h = {h}, t(t-1) = {}",
                t * t.saturating_sub(1)
            ),
            Error::DuplicateId(x) => write!(f, "participant id {x} appears more than once"),
            Error::ZeroId => write!(f, "participant id 0 is reserved"),
            Error::PartyOutOfRange { index, m } => {
                write!(f, "party index {index} outside 1..={m}")
            }
            Error::SelfKey(x) => write!(f, "participant {x} cannot share a key with itself"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotHolder { expected } => {
                write!(f, "party {expected} does not hold the qudit")
            }
            Error::InvalidPhase(what) => write!(f, "invalid protocol phase: {what}"),
            Error::SearchTooLarge { size, limit } => {
                write!(f, "search space of {size} tables exceeds limit {limit}")
            }
            Error::InvalidAttack(what) => write!(f, "invalid attack: {what}"),
            Error::InvalidChain { m, n } => {
                write!(f, "chain of {m} participants is invalid for {n} dealt shares")
            }
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
