//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod criteria;
pub mod gen;

use std::collections::BTreeSet;

use shiq_core::dl::{Kb, Role};
use shiq_core::query::{Atom, Query, Term, Ucq};
use shiq_core::syntax::{parse_kb, parse_query, ParsedQuery};

pub fn corpus_path(file: &str) -> String {
    format!("{}/../../corpus/{file}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load_kb(file: &str) -> Kb {
    let path = corpus_path(file);
    let text = std::fs::read_to_string(&path).expect("corpus file");
    parse_kb(&text, &path).expect("corpus kb parses")
}

pub fn load_ucq(file: &str) -> Ucq {
    let path = corpus_path(file);
    let text = std::fs::read_to_string(&path).expect("corpus file");
    match parse_query(&text, &path).expect("corpus query parses") {
        ParsedQuery::Boolean(u) => u,
        ParsedQuery::Answer(_) => panic!("expected a Boolean query"),
    }
}

pub fn load_query(file: &str) -> Query {
    load_ucq(file).disjuncts()[0].clone()
}

pub fn v(n: &str) -> Term {
    Term::var(n)
}

pub fn role(r: &str, t: &str, u: &str) -> Atom {
    Atom::role(Role::named(r), v(t), v(u))
}

pub fn terms(ts: &[&str]) -> BTreeSet<Term> {
    ts.iter().map(|t| v(t)).collect()
}
