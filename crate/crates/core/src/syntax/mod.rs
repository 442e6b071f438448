//! Text formats: an s-expression grammar for knowledge bases and queries.

mod parse;
mod print;
mod sexpr;

pub use parse::{check_query_individuals, parse_concept, parse_kb, parse_query, ParsedQuery};
pub use print::{
    print_answer_query, print_assertion, print_atom, print_concept, print_kb, print_query,
    print_role, print_term, print_ucq, SlotSyntax,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}:{column}: {message}")]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}
