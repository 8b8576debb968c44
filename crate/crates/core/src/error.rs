use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eig:.3e} below tolerance {tol:.3e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("frequency model is not conjugate closed: no partner for frequency {freq} (weight {weight})")]
    UnpairedFrequency { freq: f64, weight: f64 },

    #[error("ruler over d={d} is incomplete: distance {missing} is not realized")]
    IncompleteRuler { d: usize, missing: usize },

    #[error("index {index} outside 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("observation pattern not supported by this estimator: {0}")]
    Pattern(String),

    #[error("candidate net too large: {required} candidates exceed cap {cap}")]
    NetTooLarge { required: u128, cap: u128 },

    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
