use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BorelError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("monomial with exponent {0} has no Borel transform")]
    NonTransformable(String),
    #[error("mixed variable tags in series operation")]
    MixedTags,
    #[error("ramification mismatch: {0} vs {1}")]
    Ramification(u32, u32),
    #[error("non-integrable origin exponent {0}")]
    NonIntegrable(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("empty grid")]
    EmptyGrid,
    #[error("non-finite value at p = {p}, t = {t}")]
    Diverged { p: f64, t: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cone condition not verified")]
    ConeNotVerified,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("non-quasilinear input: {0}")]
    NonQuasilinear(String),
    #[error("setting rejected: {0}")]
    SettingRejected(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("growth certificate missing: {0}")]
    NoGrowthCertificate(String),
    #[error("ill-conditioned system (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, BorelError>;
