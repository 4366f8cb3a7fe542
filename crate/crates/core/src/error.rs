use alloc::string::String;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("enclosure exhausted: the target could not be refined enough")]
    EnclosureExhausted,
    #[error("rational target: the point coincides with the approximation")]
    RationalTarget,
    #[error("not coprime: gcd(base, modulus) > 1")]
    NotCoprime,
    #[error("factorization limit exceeded for {0}")]
    FactorizationLimit(String),
    #[error("comparison undecided after refining to {0} bits")]
    Undecided(u32),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("address index {index} out of range for {maps} maps")]
    IndexOutOfRange { index: usize, maps: usize },
    #[error("point is not in the attractor")]
    NotInAttractor,
    #[error("IFS is not unimodular")]
    NotUnimodular,
    #[error("branch selection ambiguous after {0} levels")]
    Ambiguous(usize),
    #[error("map {0} is not a contraction in the sup norm")]
    NotContraction(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("insufficient points: need more than {0}")]
    InsufficientPoints(usize),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("word does not have primitive period")]
    NonPrimitivePeriod,
    #[error("not a divisor of b^N - 1")]
    NotADivisor,
    #[error("input is a member of the set")]
    MemberInput,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("address too short: need {need} symbols, have {have}")]
    AddressTooShort { need: usize, have: usize },
    #[error("bound violation: {0}")]
    BoundViolation(String),
    #[error("insufficient data for a fit")]
    InsufficientData,
    #[error("exhausted: every candidate within budget is a member")]
    Exhausted,
    #[error("decay schedule is not strictly decreasing")]
    ScheduleNotDecreasing,
    #[error("depth too small: fewer than 3 convergents classified")]
    DepthTooSmall,
    #[error("exact hit: m*xi = n")]
    ExactHit,
    #[error("search exhausted")]
    SearchExhausted,
}

pub type Result<T> = core::result::Result<T, Error>;
