use thiserror::Error;

/// Errors raised by data ingestion, model construction and result handling.
///
/// Per-DMU solver failures (infeasible or unbounded subproblems) are *not*
/// errors: they are reported as `None` scores with a status on the affected
/// record so that batch evaluations keep going.
#[derive(Debug, Error)]
pub enum DeaError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed linear program: {0}")]
    MalformedProgram(String),

    #[error("numerical failure: {0}")]
    Numerics(String),

    #[error("result facet '{facet}' is not available for model '{model}'")]
    FacetUnavailable { facet: String, model: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DeaError>;
