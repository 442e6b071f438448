//! Acceptance harness: one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;

use common::criteria::*;

fn main() -> ExitCode {
    let checks: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "running example entailed, with and without UNA, < 60 s", c1_running_example),
        (2, "chain example entailed, < 10 s", c2_chain_example),
        (3, "ground stage contains both displayed groundings", c3_running_groundings),
        (4, "running query has Bell(4) = 15 collapsings", c4_collapsing_count),
        (5, "simple roles: only collapsing changes a query", c5_simple_roles),
        (6, "engine agrees with the bounded model oracle", c6_oracle_agreement),
        (7, "union of tree and ground queries at model level", c7_union_theorem),
        (8, "upward role closure preserves role extensions", c8_up_lemma),
        (9, "concept satisfiability preserved by translation", c9_translation),
        (10, "blocking KB consistent within the node budget", c10_blocking),
        (11, "rewriting sizes within the counting bounds", c11_size_bounds),
    ];
    let mut failed = 0;
    for (n, title, check) in checks {
        match check() {
            Ok(detail) => println!("criterion {n:2}: PASS  {title}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:2}: FAIL  {title}: {why}");
            }
        }
    }
    println!(
        "criterion 12: NOT REPRODUCIBLE  asymptotic complexity bounds are not measurable; covered by criteria 5-11"
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
