use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The effective coupling is at or below the linearization threshold.
    #[error("linearization invalid: kappa = {kappa} must exceed 1 (fluctuations grow exponentially for kappa <= 1)")]
    LinearizationInvalid { kappa: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The undepleted closed forms only cover the oscillatory regime C > 2η.
    #[error("unsupported regime: coupling {coupling} must exceed 2*eta = {}", 2.0 * eta)]
    UnsupportedRegime { coupling: f64, eta: f64 },

    #[error("integration failure at zeta = {zeta}: {what} (defect {defect:e})")]
    IntegrationFailure {
        zeta: f64,
        what: &'static str,
        defect: f64,
    },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// Malformed configuration text or scenario definition.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IntegrationFailure { .. } | Error::NumericalDegeneracy(_) => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True for errors caused by the caller's input.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::LinearizationInvalid { .. } | Error::Domain(_) | Error::Config(_) => true,
            Error::Context { source, .. } => source.is_usage(),
            _ => false,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
