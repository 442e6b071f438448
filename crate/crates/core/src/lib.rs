//! Conjunctive query entailment and answering over SHIQ knowledge bases.
//!
//! Queries are rewritten into tree queries and ground queries whose
//! negations extend the knowledge base; entailment then reduces to
//! inconsistency of those extensions, which is decided by translating them
//! into ALCQIb and running a tableau.

pub mod dl;
pub mod entail;
pub mod error;
pub mod oracle;
pub mod query;
pub mod rewrite;
pub mod rollup;
pub mod syntax;
pub mod tableau;
pub mod translate;

pub use error::{Error, Result};
