use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid iterated function system: {0}")]
    InvalidIfs(String),

    #[error("point {x} lies outside the attractor")]
    OutsideAttractor { x: f64 },

    #[error("expected {expected} items, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("expected an integer, got {0}")]
    NonIntegerInput(f64),

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("first row of the matrix is not constant 1/sqrt(N)")]
    FirstRowNotConstant,

    #[error("candidate set is not a spectrum (unitarity defect {defect:e})")]
    NotASpectrum { defect: f64 },

    #[error("filters do not form a QMF basis (deviation {deviation:e})")]
    NotQmfBasis { deviation: f64 },

    #[error("filter {0} is not an exponential")]
    NotExponential(usize),

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("transfer grid does not cover t = {t}")]
    GridTooCoarse { t: f64 },

    #[error("functions are defined over different systems")]
    MixedSystems,

    #[error("signal length {got} is not a power of N (expected N^n, N = {base})")]
    LengthMismatch { got: usize, base: usize },

    #[error("{0}")]
    InvalidArgument(String),
}
