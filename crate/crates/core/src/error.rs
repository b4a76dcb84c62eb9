use crate::market::OutputTriple;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A demand or cost function returned a non-finite value.
    #[error("evaluation of {what} at {at} produced a non-finite value")]
    Evaluation { what: String, at: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numerics(String),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root search did not converge within {iterations} iterations")]
    MaxIterExceeded { iterations: usize },

    #[error("invalid Hardy-Rogers constants: k1 + 2k2 + 2k3 = {sum} must be < 1 with all k >= 0")]
    InvalidConstants { sum: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Failure inside a Picard run, tagged with the iterate being mapped.
    #[error("iteration {iteration} at {point}: {source}")]
    AtIterate {
        iteration: usize,
        point: OutputTriple,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn check_finite(what: &str, at: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            what: what.to_string(),
            at,
        })
    }
}
