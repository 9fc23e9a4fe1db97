use thiserror::Error;

/// Errors reported by the sequence and valuation operations.
///
/// Every variant marks a violated precondition except [`Error::InexactDivision`],
/// which signals an internal inconsistency (the divisibility it reports is a
/// proven identity, so hitting it means an implementation bug).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has infinite 2-adic valuation")]
    ZeroValuation,

    #[error("binomial lower index {n} exceeds upper index {m}")]
    BinomialDomain { m: u64, n: u64 },

    #[error("sequence order k = {0} must be at least 2")]
    OrderTooSmall(usize),

    #[error("basis index j = {j} out of range for order k = {k}")]
    BasisIndex { k: usize, j: usize },

    #[error("expected exactly {expected} initial values, got {got}")]
    InitLength { expected: usize, got: usize },

    #[error("window [{start}, {end}] does not cover index {index}")]
    WindowRange { start: i64, end: i64, index: i64 },

    #[error("index n = {n} outside the domain of {op}")]
    IndexDomain { op: &'static str, n: i64 },

    #[error("range [{from}, {to}] is empty or reversed")]
    EmptyRange { from: i64, to: i64 },

    #[error("(a = {a}, r = {r}) outside the definitional range of {op}")]
    DecompRange { op: &'static str, a: u64, r: i64 },

    #[error("non-exact division by {divisor} (internal inconsistency)")]
    InexactDivision { divisor: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
