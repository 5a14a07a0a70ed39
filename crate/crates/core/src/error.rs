use thiserror::Error;

/// Errors raised by distribution construction, numerical integration and
/// the information measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The requested point lies outside the region where the measure is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Conditioning event has probability below the refusal threshold.
    #[error("conditioning probability {probability:e} at t = {t} is below {threshold:e}")]
    NullConditioning {
        t: f64,
        probability: f64,
        threshold: f64,
    },

    #[error(
        "quadrature did not converge: value {value}, error estimate {error_estimate:e} after {subdivisions} subdivisions"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand returned {value} at x = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64, value: f64 },

    #[error("monotonic transform rejected: {0}")]
    InconsistentTransform(String),

    #[error("probability vector sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("cannot parse distribution spec: {0}")]
    Parse(String),

    #[error("not enough samples: {got} < {required}")]
    TooFewSamples { got: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
