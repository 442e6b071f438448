//! Error type shared by the library.

use crate::syntax::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Semantic(String),
    #[error("budget of {limit} candidates exceeded during {stage}")]
    BudgetExceeded { stage: &'static str, limit: usize },
    #[error("resource limit reached: {0}")]
    ResourceLimit(String),
    #[error("query is not tree-shaped")]
    NotTreeShaped,
}

pub type Result<T> = std::result::Result<T, Error>;
