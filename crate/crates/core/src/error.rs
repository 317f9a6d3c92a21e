use thiserror::Error;

/// Errors produced by the simulation and diagnostics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain of {map}")]
    Domain { map: String, x: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot parse {what} from {text:?}: {reason}")]
    Parse {
        what: &'static str,
        text: String,
        reason: String,
    },

    #[error("power iteration did not converge after {iterations} iterations (last L1 residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
