use thiserror::Error;

/// Errors raised by the denoising library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    InvalidAlphabet(usize),
    #[error("symbol {symbol} at position {position} is outside an alphabet of size {alphabet}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },
    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),
    #[error("channel matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("channel set is empty")]
    EmptySet,
    #[error("list of source/channel pairs is empty")]
    EmptyList,
    #[error("sequence of length {n} is too short for window order {k} (need n > 2k)")]
    SequenceTooShort { n: usize, k: usize },
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear program failed: {0}")]
    SolverFailure(String),
    #[error("observed sequence has zero likelihood under the source/channel pair")]
    ZeroLikelihood,
    #[error("state space of {0} configurations is too large for exhaustive enumeration")]
    StateSpaceTooLarge(u128),
    #[error("transition matrix is not irreducible")]
    NotIrreducible,
    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
