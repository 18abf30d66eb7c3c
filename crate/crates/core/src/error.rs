use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A strict exponent inequality does not hold.
    #[error("inequality violated: {0}")]
    Inequality(String),

    #[error("profiles live on different grids")]
    GridMismatch,

    #[error("data vanish identically; the ratio is undefined")]
    ZeroData,

    /// The radial weight `r^(-alpha q)` is not integrable at the origin against `r^(n-1) dr`.
    #[error("weight |x|^(-{alpha}) is not locally L^{q} integrable in dimension {n}")]
    WeightNotIntegrable { alpha: f64, q: f64, n: u32 },

    /// The time integral of a free-evolution norm diverges at infinity.
    #[error("space-time integral diverges as |t| -> infinity (decay exponent {0})")]
    DivergentTimeIntegral(f64),

    /// The grid cannot resolve both the near and far time regions for these data.
    #[error("grid under-resolves the data: {0}")]
    Resolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
