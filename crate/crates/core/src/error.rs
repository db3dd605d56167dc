use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    Dimension {
        context: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration diverged at t = {time}")]
    IntegrationDiverged { time: f64 },

    #[error("evaluation failed at t = {time}: {reason}")]
    Evaluation { time: f64, reason: String },

    #[error("{what} needs derivative order {required}, only {available} declared and finite-difference fallback is disabled")]
    Smoothness {
        what: String,
        required: usize,
        available: usize,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("covariance lost positive definiteness at t = {time} (min eigenvalue {min_eig:e})")]
    CovarianceCollapse { time: f64, min_eig: f64 },

    #[error("observer estimate diverged at t = {time}")]
    Divergence { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
