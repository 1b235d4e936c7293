use thiserror::Error;

pub type Result<T> = std::result::Result<T, CalibrationError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("problem has no samples")]
    EmptyProblem,
    #[error("sample weight must be positive, got {0}")]
    InvalidWeight(f64),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("binary label must be 0 or 1, got {0}")]
    InvalidLabel(f64),
    #[error("block minimizers decrease at block {index}: {previous} > {next}")]
    NotMonotone {
        index: usize,
        previous: f64,
        next: f64,
    },
    #[error("sample score {score} arrived after score {last}")]
    OutOfOrder { score: f64, last: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bracket has no width: upper {upper} <= lower {lower}")]
    NoWidth { upper: f64, lower: f64 },
    #[error("derivative oracle returned NaN at z = {z} for samples {first}..={last}")]
    OracleFailure { first: usize, last: usize, z: f64 },
    #[error("bounds still infinite after {iters} rounds")]
    Unbounded { iters: usize },
    #[error("{n} samples exceed the brute-force limit of {max}")]
    TooLarge { n: usize, max: usize },
}
