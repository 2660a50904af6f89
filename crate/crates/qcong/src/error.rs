use thiserror::Error;

/// Errors raised by series arithmetic and the modular-form machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("constant term is not a unit; series cannot be inverted")]
    NonUnitConstantTerm,

    #[error("series carries a fractional q-power offset {offset24}/24")]
    FractionalOffset { offset24: i64 },

    #[error("q-power offset {offset24}/24 is negative; not a power series")]
    NegativeOffset { offset24: i64 },

    #[error("truncation {have} is too short; need at least {need} coefficients")]
    InsufficientTruncation { need: usize, have: usize },

    #[error("cusp denominator {c} does not divide the level {n}")]
    CuspNotDivisor { c: u64, n: u64 },

    #[error("scale {scale} does not divide the level {n}")]
    LevelTooSmall { scale: u64, n: u64 },

    #[error("Sturm bound requires positive weight, got weight2 = {0}")]
    NonPositiveWeight(i64),

    #[error("E_{k} is not {ell}-integral: {ell} divides the denominator of 2k/B_k")]
    EisensteinNotIntegral { k: u64, ell: u64 },

    #[error("E_{k} has non-integral coefficients; request a modulus instead")]
    EisensteinNotExact { k: u64 },

    #[error("operation requires a prime at least {min}, got {ell}")]
    PrimeTooSmall { ell: u64, min: u64 },

    #[error("prime {ell} divides {what}")]
    PrimeDividesInvariant { ell: u64, what: String },

    #[error("series is identically zero")]
    ZeroSeries,

    #[error("no weight in the candidate chain admits the series: {0}")]
    FiltrationFailed(String),

    #[error("partitions share the part {0}; numerator and denominator scales must be disjoint")]
    OverlappingParts(u64),

    #[error("partition parts must be positive")]
    NonPositivePart,

    #[error("no t <= {cap} makes the companion form holomorphic at the cusps")]
    MinimalTCapExceeded { cap: u32 },

    #[error(
        "no theta witness within truncation {trunc}; expansion too short or implementation bug"
    )]
    NoThetaWitness { trunc: usize },

    #[error("U_{m} needs at least {m} coefficients, series has {have}")]
    UOperatorTooShort { m: u64, have: usize },

    #[error("cannot parse eta-quotient expression: {0}")]
    ParseEta(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
