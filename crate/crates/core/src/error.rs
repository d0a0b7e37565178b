use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Hypothesis` and `Stage` are expected outcomes at desk scale, where the
/// asymptotic slack behind a lemma may simply not be there. `Invariant` means a
/// recount disagreed with what a construction promised, which is a bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hypothesis unmet [{name}]: {detail}")]
    Hypothesis { name: String, detail: String },
    #[error("stage {stage} has no completion: {detail}")]
    Stage { stage: String, detail: String },
    #[error("invariant violated [{name}]: {detail}")]
    Invariant { name: String, detail: String },
    #[error("size limit: {what} is {got}, cap is {cap}")]
    SizeLimit { what: String, got: usize, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn hypothesis(name: &str, detail: impl Into<String>) -> Self {
        Error::Hypothesis { name: name.to_string(), detail: detail.into() }
    }

    pub fn stage(stage: &str, detail: impl Into<String>) -> Self {
        Error::Stage { stage: stage.to_string(), detail: detail.into() }
    }

    pub fn invariant(name: &str, detail: impl Into<String>) -> Self {
        Error::Invariant { name: name.to_string(), detail: detail.into() }
    }

    pub fn size(what: &str, got: usize, cap: usize) -> Self {
        Error::SizeLimit { what: what.to_string(), got, cap }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
