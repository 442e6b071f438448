//! Property tests over randomly generated syntax, role hierarchies and
//! interpretations.

mod common;

use common::criteria::{agree, up_lemma_holds, Agreement};
use common::gen;
use proptest::prelude::*;
use shiq_core::dl::Role;
use shiq_core::oracle::{enumerate_matches, satisfies_query};
use shiq_core::query::Query;
use shiq_core::rewrite::collapsings;
use shiq_core::syntax::{parse_concept, parse_kb, parse_query, print_concept, print_kb, print_ucq, ParsedQuery};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concepts_survive_printing(seed in any::<u64>(), depth in 0usize..4) {
        let mut rng = gen::rng(seed);
        let rbox = gen::rbox(&mut rng, true);
        let c = gen::concept(&mut rng, &rbox, depth);
        let text = print_concept(&c);
        prop_assert_eq!(parse_concept(&text, "printed").unwrap(), c, "{}", text);
    }

    #[test]
    fn kbs_survive_printing(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let kb = gen::kb(&mut rng, true);
        let text = print_kb(&kb);
        prop_assert_eq!(parse_kb(&text, "printed").unwrap(), kb, "{}", text);
    }

    #[test]
    fn queries_survive_printing(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let kb = gen::kb(&mut rng, false);
        let u = gen::ucq(&mut rng, &kb);
        let text = print_ucq(&u);
        match parse_query(&text, "printed").unwrap() {
            ParsedQuery::Boolean(back) => prop_assert_eq!(back, u, "{}", text),
            ParsedQuery::Answer(_) => prop_assert!(false, "Boolean query read back as answer query"),
        }
    }

    #[test]
    fn subrole_relation_is_a_preorder_closed_under_inverse(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let rbox = gen::rbox(&mut rng, true);
        let roles: Vec<_> = gen::ROLES
            .iter()
            .flat_map(|r| [Role::named(r), Role::inverse_of(r)])
            .collect();
        for r in &roles {
            prop_assert!(rbox.is_subrole(r, r));
            for s in &roles {
                prop_assert_eq!(rbox.is_subrole(r, s), rbox.is_subrole(&r.inv(), &s.inv()));
                for t in &roles {
                    if rbox.is_subrole(r, s) && rbox.is_subrole(s, t) {
                        prop_assert!(rbox.is_subrole(r, t));
                    }
                }
            }
            // A role with a transitive sub-role is not simple.
            let has_trans_sub = roles.iter().any(|s| rbox.is_transitive(s) && rbox.is_subrole(s, r));
            prop_assert_eq!(rbox.is_simple(r), !has_trans_sub);
        }
    }

    #[test]
    fn upward_closure_keeps_extensions(seed in any::<u64>(), size in 1usize..5) {
        let mut rng = gen::rng(seed);
        let rbox = gen::rbox(&mut rng, true);
        let i = gen::interpretation(&mut rng, size, &rbox);
        if let Some(w) = gen::conj(&mut rng, &rbox, false) {
            prop_assert!(up_lemma_holds(&rbox, &w, &i));
        }
    }

    #[test]
    fn collapsings_are_implied_by_the_query(seed in any::<u64>(), size in 1usize..4) {
        // Every collapsing is a homomorphic image, so it can only hold where
        // the original query holds.
        let mut rng = gen::rng(seed);
        let q = gen::query(&mut rng, 4, 4, &[]);
        let i = gen::interpretation(&mut rng, size, &Default::default());
        let holds = satisfies_query(&q, &i);
        for c in collapsings(&q) {
            prop_assert!(!satisfies_query(&c, &i) || holds, "{:?} holds without {:?}", c, q);
        }
    }

    #[test]
    fn matches_are_homomorphisms(seed in any::<u64>(), size in 1usize..4) {
        let mut rng = gen::rng(seed);
        let q = gen::query(&mut rng, 3, 4, &[]);
        let i = gen::interpretation(&mut rng, size, &Default::default());
        let matches = enumerate_matches(&q, &i);
        prop_assert_eq!(matches.is_empty(), !satisfies_query(&q, &i));
        for m in &matches {
            prop_assert_eq!(m.len(), q.terms().len());
            let single = Query::build(q.atoms().iter().take(1).cloned());
            prop_assert!(satisfies_query(&single, &i));
        }
    }
}

/// Engine verdicts on random KBs and queries never contradict the bounded
/// countermodel search.
#[test]
fn random_cases_agree_with_the_oracle() {
    let mut rng = gen::rng(6);
    let mut tally = Agreement::default();
    for n in 0..60 {
        let kb = gen::kb(&mut rng, n % 2 == 0);
        let u = gen::ucq(&mut rng, &kb);
        for una in [true, false] {
            agree(&format!("random {n}"), &kb, &u, una, 4, &mut tally).unwrap();
        }
    }
    assert!(tally.decisive >= 60, "only {} decisive checks", tally.decisive);
}
