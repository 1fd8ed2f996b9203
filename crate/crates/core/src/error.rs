use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter-out-of-range: b[{index}] = {value} violates {condition}")]
    ParameterOutOfRange {
        index: usize,
        value: f64,
        condition: &'static str,
    },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("affine map with zero scale")]
    SingularAffineMap,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("invalid interval ({lo}, {hi}) on fiber {fiber}")]
    InvalidInterval { lo: f64, hi: f64, fiber: usize },
    #[error("orbit-escape at step {step} on fiber {fiber}: x = {x}")]
    OrbitEscape { step: usize, fiber: usize, x: f64 },
    #[error("orbit length {requested} exceeds cap {cap}")]
    OrbitCapExceeded { requested: usize, cap: usize },
    #[error("no-orientation-reversing-fixed-point: scanned {cells} cells, {roots} fixed points, none with f' < 0")]
    NoOrientationReversingFixedPoint { cells: usize, roots: usize },
    #[error("entry-not-found within horizon {horizon}")]
    EntryNotFound { horizon: usize },
    #[error("pullback-degenerate at step {step}")]
    PullbackDegenerate { step: usize },
    #[error("precision-exhausted: {0}")]
    PrecisionExhausted(&'static str),
    #[error("need at least {need} levels, have {have}")]
    InsufficientLevels { have: usize, need: usize },
    #[error("no-successor-within-horizon {horizon}")]
    NoSuccessor { horizon: usize },
    #[error("nu-not-found-within-horizon {horizon}")]
    NuNotFound { horizon: usize },
    #[error("not-renormalizable up to period {max_period}")]
    NotRenormalizable { max_period: usize },
    #[error("validation-failure: {0}")]
    ValidationFailure(String),
    #[error("order-ambiguity between orbit intervals {first} and {second}")]
    OrderAmbiguity { first: usize, second: usize },
    #[error("invalid combinatorics: {0}")]
    InvalidCombinatorics(&'static str),
    #[error("parse: invalid canonical combinatorics")]
    Parse,
    #[error("N-mismatch: {left} vs {right}")]
    NMismatch { left: usize, right: usize },
    #[error("combinatorial-explosion: m = {m} exceeds cap {cap}")]
    CombinatorialExplosion { m: usize, cap: usize },
    #[error("not-found-in-box")]
    NotFoundInBox,
    #[error("verification-mismatch: expected {expected}, found {found}")]
    VerificationMismatch { expected: String, found: String },
    #[error("word-mismatch at level {level}")]
    WordMismatch { level: usize },
    #[error("disconnected-julia: critical orbit {critical} escapes")]
    DisconnectedJulia { critical: usize },
    #[error("domains-not-found (best candidate: {0})")]
    DomainsNotFound(String),
    #[error("boundary-continuation-failure")]
    BoundaryContinuation,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
}
