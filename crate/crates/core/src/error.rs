use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid window [{lo}, {hi}] for horizon {horizon}")]
    InvalidWindow { lo: f64, hi: f64, horizon: f64 },

    #[error("malformed closed set text: {0}")]
    Parse(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("degenerate tilt: normalizer {0:e} below 1e-12")]
    DegenerateTilt(f64),

    #[error("degenerate slope fit: r^2 = {0}")]
    DegenerateFit(f64),

    #[error("unknown check id: {0}")]
    UnknownCheck(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
