use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch for {what}: expected {expected:?}, got {actual:?}")]
    Shape {
        what: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("partial DFT phase matrix needs L <= N (got L = {l}, N = {n})")]
    PartialDftTooTall { l: usize, n: usize },

    #[error("noise precision must be positive or +inf, got {0}")]
    InvalidNoisePrecision(f64),

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("non-finite value in {quantity} at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        quantity: &'static str,
    },

    #[error("reference channel has zero Frobenius norm")]
    ZeroNormTruth,

    #[error("least-squares system is underdetermined (L = {l} < N = {n}) and ridge is zero")]
    Underdetermined { l: usize, n: usize },
}
