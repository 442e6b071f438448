//! The rewriting stages on the running and chain examples.

mod common;

use std::collections::BTreeSet;

use common::*;
use shiq_core::query::{Atom, Query};
use shiq_core::rewrite::{
    canonical, collapsings, forest_rewritings, is_forest_shaped, is_root_splitting, loop_rewritings,
    rewrite, split_rewritings, Candidate, RewriteConfig,
};

fn running_cfg() -> RewriteConfig {
    RewriteConfig::guided(2)
}

/// The split rewriting of the running example, with the introduced root
/// `ux` written as a fresh variable.
fn q_sr() -> Candidate {
    let q = Query::build([
        role("r", "u", "_ux"),
        role("r", "_ux", "x"),
        role("r", "x", "y"),
        role("t", "y", "y"),
        role("s", "z", "y"),
        role("r", "x", "z"),
    ]);
    canonical(Candidate::new(q, terms(&["_ux", "x"])))
}

fn q_fr() -> Candidate {
    let q = Query::build([
        role("r", "u", "_ux"),
        role("r", "_ux", "x"),
        role("r", "x", "y"),
        role("t", "y", "_y2"),
        role("t", "_y2", "y"),
        role("s", "z", "y"),
        role("r", "y", "z"),
    ]);
    canonical(Candidate::new(q, terms(&["_ux", "x"])))
}

#[test]
fn running_query_has_bell_four_collapsings() {
    assert_eq!(collapsings(&load_query("running.q")).len(), 15);
}

#[test]
fn running_split_contains_the_displayed_rewriting() {
    let kb = load_kb("running.kb");
    let split = split_rewritings(&load_query("running.q"), &kb, &running_cfg()).unwrap();
    assert!(split.contains(&q_sr()));
    for c in &split {
        assert!(is_root_splitting(&c.query, &c.roots));
    }
}

#[test]
fn running_forest_contains_the_displayed_rewriting() {
    let kb = load_kb("running.kb");
    let loops = loop_rewritings(&[q_sr()], &kb, &running_cfg()).unwrap();
    let forest = forest_rewritings(&loops, &kb, &running_cfg()).unwrap();
    assert!(forest.contains(&q_fr()));
    for c in &forest {
        assert!(is_forest_shaped(&c.query, &c.roots));
    }
}

#[test]
fn full_pipeline_on_running_example() {
    let kb = load_kb("running.kb");
    let stages = rewrite(&load_query("running.q"), &kb, &running_cfg()).unwrap();
    assert!(stages.forest.contains(&q_fr()));
    let mut seen = BTreeSet::new();
    for c in &stages.forest {
        assert!(seen.insert(c.clone()));
    }
}

#[test]
fn chain_example_has_a_rootless_tree_rewriting() {
    let kb = load_kb("chain.kb");
    let q = load_query("chain.q");
    let stages = rewrite(&q, &kb, &RewriteConfig::guided(1)).unwrap();
    let expected = Candidate::new(
        Query::build([
            role("r", "x1", "x2"),
            role("r", "x2", "x3"),
            role("r", "x3", "x4"),
            role("t", "x1", "x2"),
            role("t", "x2", "x3"),
            role("t", "x3", "x4"),
        ]),
        BTreeSet::new(),
    );
    assert!(stages.forest.contains(&expected));
}

#[test]
fn exhaustive_mode_keeps_forest_shaped_input() {
    let kb = load_kb("chain.kb");
    let q = Query::build([role("r", "x", "y"), Atom::concept(shiq_core::dl::Concept::atomic("A"), v("y"))]);
    let stages = rewrite(&q, &kb, &RewriteConfig::exhaustive()).unwrap();
    assert!(stages.forest.contains(&Candidate::new(q.clone(), BTreeSet::new())));
}

