use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no empty bin within truncation of {n_bins} bins")]
    NoEmptyBin { n_bins: usize },
    #[error("quadrature did not converge: value {value:e}, error estimate {abs_error:e}")]
    Quadrature { value: f64, abs_error: f64 },
    #[error("too few samples: got {got}, need at least {needed}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("degenerate cell structure: {0}")]
    DegenerateCells(String),
    #[error("sample mean is zero")]
    ZeroMean,
    #[error("quadrature {quadrature:e} and mc-oracle {mc_oracle:e} disagree beyond {tolerance:e}")]
    MethodDisagreement {
        quadrature: f64,
        mc_oracle: f64,
        tolerance: f64,
    },
    #[error("csv output: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
