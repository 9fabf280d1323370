use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Lévy measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),

    #[error("ensemble needs at least one path")]
    EmptyEnsemble,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid transform parameter alpha={0}, need 0 < alpha < 1")]
    InvalidAlpha(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
