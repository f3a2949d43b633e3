use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown category '{label}' for covariate '{covariate}'")]
    UnknownCategory { covariate: String, label: String },
    #[error("missing label for covariate '{0}'")]
    MissingCovariate(String),
    #[error("parameters are infeasible for the data (an observation lies beyond the implied endpoint)")]
    Infeasible,
    #[error("design column '{0}' is identically zero among the exceedances")]
    RankDeficient(String),
    #[error("negative Hessian is not positive definite; check the threshold and the model specification")]
    NotPositiveDefinite,
    #[error("no finite endpoint: shape parameter {0} is not negative")]
    NoFiniteEndpoint(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("need at least {needed} bootstrap replicates, have {have}")]
    TooFewReplicates { needed: usize, have: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
