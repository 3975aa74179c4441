use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: L = {l}, lambda = {lambda} ({reason})")]
    InvalidGeometry { l: usize, lambda: usize, reason: String },

    #[error("column index {n} out of range 0..={n_max}")]
    ColumnOutOfRange { n: usize, n_max: usize },

    #[error("enumeration would produce {required} states, exceeding the cap of {cap}")]
    StateCapExceeded { required: u128, cap: u128 },

    #[error("column {n} is empty")]
    EmptyColumn { n: usize },

    #[error("distribution is not normalized: sum = {sum}")]
    NotNormalized { sum: f64 },

    #[error("geometry mismatch: (L={l_a}, lambda={lambda_a}) vs (L={l_b}, lambda={lambda_b})")]
    GeometryMismatch { l_a: usize, lambda_a: usize, l_b: usize, lambda_b: usize },

    #[error("time grid must be nonnegative and ascending")]
    BadTimeGrid,

    #[error("averaging window [{lo}, {hi}] not covered by the trace span [{span_lo}, {span_hi}]")]
    WindowOutOfSpan { lo: f64, hi: f64, span_lo: f64, span_hi: f64 },

    #[error("norm drift {drift:e} exceeds tolerance {tol:e} at t = {t}; reduce the step size")]
    NormDrift { drift: f64, tol: f64, t: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
