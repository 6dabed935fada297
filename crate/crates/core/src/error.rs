use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid tuning input (split fraction, window sizes, bandwidth, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The data cannot support the requested computation.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed input file. `row` and `col` are 1-based.
    #[error("format error at row {row}, column {col}: {msg}")]
    Format { row: usize, col: usize, msg: String },

    /// A long-run variance estimate of zero; `index` is 0-based.
    #[error("degenerate normalizer (omega^2 = 0) for predictor {index} ({name})")]
    DegenerateNormalizer { index: usize, name: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Invalid simulation or theory parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn param_err(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
