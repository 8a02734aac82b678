use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {field} {reason}")]
    InvalidGeometry { field: &'static str, reason: String },

    #[error("invalid material `{name}`: {field} {reason}")]
    InvalidMaterial {
        name: String,
        field: &'static str,
        reason: String,
    },

    #[error("duplicate material `{0}`")]
    DuplicateMaterial(String),

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error(transparent)]
    Fit(#[from] FitError),

    #[error("synthesis infeasible: {binding} binding ({detail})")]
    Synthesis { binding: String, detail: String },

    #[error("empty search space: {0}")]
    EmptySearchSpace(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("at f = {f_hz} Hz: {source}")]
    AtFrequency {
        f_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {key}: {reason}")]
    Config { key: String, reason: String },

    #[error("{what} not found: {path}")]
    NotFound { what: String, path: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn geometry(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidGeometry {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Raised when a set of observations admits no physical parameter set.
#[derive(Debug, Error)]
#[error("inconsistent fit observations: {reason} (residuals: {residuals:?})")]
pub struct FitError {
    pub reason: String,
    /// Named relative residuals computed before the fit was rejected.
    pub residuals: Vec<(String, f64)>,
}
