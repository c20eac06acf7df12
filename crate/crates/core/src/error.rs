use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} ({requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("singular source: transmit impedance plus source impedance vanishes")]
    SingularSource,

    #[error("singular coupling system (condition estimate {condition:e})")]
    SingularCoupling { condition: f64 },

    #[error("noise covariance is not positive definite")]
    SingularNoise,

    #[error("model inconsistency: {what} (measured {measured:e}, tolerance {tolerance:e})")]
    ModelInconsistency {
        what: &'static str,
        measured: f64,
        tolerance: f64,
    },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(&'static str),

    #[error("integration did not converge: last estimate {estimate:e}, relative gap {gap:e} after {panels} panels")]
    Integration {
        estimate: f64,
        gap: f64,
        panels: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>, requirement: &'static str) -> Self {
        Error::Domain {
            what,
            value: value.into(),
            requirement,
        }
    }

    /// True for errors that originate in configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
