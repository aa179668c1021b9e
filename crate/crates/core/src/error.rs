use thiserror::Error;

use crate::dsl::ParseError;
use crate::reference::WireId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("system size must be at least one noise-bit, got {0}")]
    InvalidBits(u32),
    #[error("wire {wire} is outside a {bits}-bit reference system")]
    InvalidWire { wire: WireId, bits: u32 },
    #[error("invalid flip probability: {0}")]
    InvalidFlipProb(String),

    #[error("a sum needs at least one term")]
    EmptySum,
    #[error("a product needs at least one factor")]
    EmptyProduct,
    #[error("sum coefficients must be nonzero")]
    ZeroCoefficient,

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("operation needs a full pattern, got a partial one over {assigned} of {bits} bits")]
    PartialPattern { assigned: usize, bits: u32 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("oracle expansion over {bits} bits exceeds the configured limit of {limit}")]
    OracleLimitExceeded { bits: u32, limit: u32 },
    #[error("monomial {0} does not assign every bit; not a product-string superposition")]
    IncompleteMonomial(String),
    #[error("expansion coefficient overflowed 64 bits")]
    CoefficientOverflow,

    #[error("no live clock in [{from}, {to}]")]
    MaxWaitExceeded { from: u64, to: u64 },
    #[error("superposition is zero at clock {clock}")]
    DeadClock { clock: u64 },
    #[error("probe trace matches no legal two-bit class: {0}")]
    IllegalClass(String),
    #[error("protocol needs a {expected}-bit system, got {found}")]
    SystemSizeMismatch { expected: u32, found: u32 },

    #[error("duplicate name {0} in phonebook")]
    DuplicateName(String),
    #[error("phonebook entry {0} does not fit the declared widths")]
    EntryWidth(String),
    #[error("phonebook has {entries} entries but only {capacity} names fit")]
    TooManyEntries { entries: usize, capacity: u128 },
    #[error("name {0} is not in the phonebook")]
    NameAbsent(String),
    #[error("number {0} is not in the phonebook")]
    NumberAbsent(String),
    #[error("inverse lookup needs a one-to-one phonebook")]
    NotBijective,
    #[error("digit {digit}: {zeroing} of the two probe groundings zeroed the survivor")]
    ProbeInconsistent { digit: u32, zeroing: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("signal has zero variance over the sampled window")]
    ZeroVariance,
}
