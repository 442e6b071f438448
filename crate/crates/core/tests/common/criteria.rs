//! One check per acceptance criterion. Each returns a one-line summary on
//! success and a description of the first failure otherwise. The checks are
//! shared by the acceptance harness and the ordinary integration tests.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use shiq_core::dl::{name, Assertion, Concept, Kb, RBox, RoleConj};
use shiq_core::entail::{self, EntailConfig, Verdict};
use shiq_core::oracle::{
    find_countermodel, model_search, satisfies_query, satisfies_ucq, unravel,
    FiniteInterpretation, SearchGoal,
};
use shiq_core::query::{Query, Term, Ucq};
use shiq_core::rewrite::{collapsings, rewrite, RewriteConfig};
use shiq_core::rollup::{ground_mappings, rollup_query, Rollup};
use shiq_core::syntax::print_query;
use shiq_core::tableau::{check, is_satisfiable, TableauConfig};
use shiq_core::translate::{aux_tbox, tr_concept, up_close};

use super::gen;
use super::*;

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed_entailment(kb: &Kb, u: &Ucq, una: bool, limit: Duration) -> Result<Duration, String> {
    let start = Instant::now();
    let v = entail::entails(kb, u, una, &EntailConfig::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(v == Verdict::Entailed, || format!("una={una}: got {v}"))?;
    ensure(took < limit, || format!("una={una}: took {took:?}"))?;
    Ok(took)
}

/// The running example is entailed with and without the unique name
/// assumption, within a minute.
pub fn c1_running_example() -> Outcome {
    let (kb, u) = (load_kb("running.kb"), load_ucq("running.q"));
    let a = timed_entailment(&kb, &u, true, Duration::from_secs(60))?;
    let b = timed_entailment(&kb, &u, false, Duration::from_secs(60))?;
    Ok(format!("ENTAILED with UNA in {a:.2?}, without in {b:.2?}"))
}

/// The chain example is entailed within ten seconds.
pub fn c2_chain_example() -> Outcome {
    let (kb, u) = (load_kb("chain.kb"), load_ucq("chain.q"));
    let a = timed_entailment(&kb, &u, true, Duration::from_secs(10))?;
    Ok(format!("ENTAILED in {a:.2?}"))
}

/// The two ground queries of the forest rewriting with roots `{ux, x}`.
pub const RUNNING_GROUNDINGS: [&str; 2] = [
    "(query (vars) (atoms (concept (some r (and (some (rconj r (inv s)) top) (some (rconj t (inv t)) top))) b) (concept (some (inv r) top) a) (role r a b)))",
    "(query (vars) (atoms (concept (some r (and (some (rconj r (inv s)) top) (some (rconj t (inv t)) top))) a) (concept (some (inv r) top) b) (role r b a)))",
];

/// Both displayed groundings are produced; the all-roots candidate of the
/// original query has no ground mapping.
pub fn c3_running_groundings() -> Outcome {
    let kb = load_kb("running.kb");
    let q = load_query("running.q");
    let rollup = rollup_query(&q, &kb, &RewriteConfig::guided(kb.individuals().len())).map_err(|e| e.to_string())?;
    let printed: BTreeSet<String> = rollup.groundings.iter().map(print_query).collect();
    for g in RUNNING_GROUNDINGS {
        ensure(printed.contains(g), || format!("missing grounding {g}"))?;
    }
    let all: BTreeSet<Term> = q.terms().iter().cloned().collect();
    let taus = ground_mappings(&q, &all, &kb.individuals());
    ensure(taus.is_empty(), || format!("(Q, terms(Q)) has {} ground mappings", taus.len()))?;
    Ok(format!("both groundings among {}; (Q, {{u,x,y,z}}) contributes none", printed.len()))
}

/// All set partitions of `items`, by restricted growth strings.
pub fn partitions<T: Clone + Ord>(items: &[T]) -> BTreeSet<BTreeSet<BTreeSet<T>>> {
    let mut out = BTreeSet::new();
    let mut rgs = vec![0usize; items.len()];
    loop {
        let mut blocks: BTreeMap<usize, BTreeSet<T>> = BTreeMap::new();
        for (i, &b) in rgs.iter().enumerate() {
            blocks.entry(b).or_default().insert(items[i].clone());
        }
        out.insert(blocks.into_values().collect());
        // Next restricted growth string: rgs[i] <= 1 + max(rgs[..i]).
        let mut i = items.len();
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let max_before = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_before {
                rgs[i] += 1;
                for x in &mut rgs[i + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// The collapsings of the running query are exactly its 15 partitions.
pub fn c4_collapsing_count() -> Outcome {
    let q = load_query("running.q");
    let cs = collapsings(&q);
    let expected = partitions(q.terms());
    let got: BTreeSet<BTreeSet<BTreeSet<Term>>> = cs
        .iter()
        .map(|c| c.classes().iter().map(|cl| cl.iter().cloned().collect()).collect())
        .collect();
    ensure(cs.len() == 15 && expected.len() == 15, || format!("{} collapsings, {} partitions", cs.len(), expected.len()))?;
    ensure(got == expected, || "collapsings differ from the set partitions".into())?;
    Ok("15 collapsings = Bell(4), same partitions as the independent enumerator".into())
}

/// Without transitive roles only the collapsing step changes a query.
pub fn c5_simple_roles() -> Outcome {
    let mut rng = gen::rng(5);
    let mut checked = 0;
    for i in 0..20 {
        let rbox = gen::rbox(&mut rng, false);
        let kb = Kb::new([], rbox, [Assertion::Instance(name("a"), Concept::Top), Assertion::Instance(name("b"), Concept::Top)])
            .expect("valid KB");
        let q = gen::query(&mut rng, 3, 4, &[]);
        let cs: BTreeSet<Query> = collapsings(&q).into_iter().collect();
        for cfg in [RewriteConfig::guided(2), RewriteConfig::exhaustive()] {
            let stages = rewrite(&q, &kb, &cfg).map_err(|e| e.to_string())?;
            for c in stages.split.iter().chain(&stages.loops).chain(&stages.forest) {
                ensure(cs.contains(&c.query), || format!("query {i} {q:?}: non-collapsing candidate {:?}", c.query))?;
                checked += 1;
            }
        }
    }
    Ok(format!("20 queries, {checked} split/loop/forest candidates, all keep their collapsing's atoms"))
}

/// A corpus case: KB and Boolean query.
pub struct Case {
    pub name: String,
    pub kb: Kb,
    pub ucq: Ucq,
}

/// The oracle corpus plus the running and chain examples.
pub fn corpus_cases() -> Vec<Case> {
    let dir = corpus_path("oracle");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .filter_map(|e| e.ok()?.file_name().into_string().ok()?.strip_suffix(".kb").map(String::from))
        .collect();
    names.sort();
    let mut out: Vec<Case> = names
        .into_iter()
        .map(|n| Case { kb: load_kb(&format!("oracle/{n}.kb")), ucq: load_ucq(&format!("oracle/{n}.q")), name: n })
        .collect();
    for n in ["running", "chain"] {
        out.push(Case { name: n.into(), kb: load_kb(&format!("{n}.kb")), ucq: load_ucq(&format!("{n}.q")) });
    }
    out
}

/// Agreement counts of engine and oracle.
#[derive(Default, Debug)]
pub struct Agreement {
    pub decisive: usize,
    pub undecided: usize,
}

/// Compares the engine with the countermodel search on one case.
pub fn agree(name: &str, kb: &Kb, u: &Ucq, una: bool, max_domain: usize, tally: &mut Agreement) -> Result<(), String> {
    let v = entail::entails(kb, u, una, &EntailConfig::default()).map_err(|e| format!("{name}: {e}"))?;
    let cm = find_countermodel(kb, u, una, max_domain);
    if let Some(m) = &cm {
        ensure(m.is_model(kb) && !satisfies_ucq(u, m), || format!("{name}: oracle countermodel is invalid"))?;
    }
    match (v, cm.is_some()) {
        (Verdict::Entailed, false) | (Verdict::NotEntailed, true) => tally.decisive += 1,
        (Verdict::NotEntailed, false) => tally.undecided += 1,
        (Verdict::Entailed, true) => return Err(format!("{name} (una={una}): ENTAILED but a countermodel exists")),
    }
    Ok(())
}

/// Engine verdicts agree with the bounded countermodel search on the corpus.
pub fn c6_oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut tally = Agreement::default();
    let cases = corpus_cases();
    for case in &cases {
        for una in [true, false] {
            agree(&case.name, &case.kb, &case.ucq, una, 6, &mut tally)?;
        }
    }
    ensure(cases.len() >= 25, || format!("only {} corpus cases", cases.len()))?;
    ensure(tally.undecided == 0, || format!("{} undecided verdicts", tally.undecided))?;
    Ok(format!("{} cases, {} decisive checks, all agree, {:.2?}", cases.len(), tally.decisive, start.elapsed()))
}

/// Interpretations for the model-level union check: a model under UNA,
/// a countermodel if there is one, and their unravellings.
pub fn union_models(kb: &Kb, u: &Ucq) -> Vec<(FiniteInterpretation, bool)> {
    let mut base = Vec::new();
    if let Some(m) = model_search(kb, SearchGoal { avoid: None, una: true }, 5) {
        base.push(m);
    }
    if let Some(m) = find_countermodel(kb, u, true, 5) {
        base.push(m);
    }
    let mut out = Vec::new();
    for m in base {
        out.push((unravel(&m, kb, 3).interp, true));
        out.push((m, false));
    }
    out
}

fn satisfies_rollup(r: &Rollup, i: &FiniteInterpretation) -> bool {
    r.trees.iter().any(|c| !i.extension(c).is_empty()) || r.groundings.iter().any(|g| satisfies_query(g, i))
}

/// On canonical interpretations `I ⊨ Q` iff `I` satisfies a tree or ground
/// query; on arbitrary models the tree and ground queries imply `Q`.
pub fn union_check(case: &str, kb: &Kb, u: &Ucq, counts: &mut (usize, usize)) -> Result<(), String> {
    let cfg = RewriteConfig::guided(kb.individuals().len());
    for q in u.disjuncts().iter().filter(|q| q.is_connected()) {
        let r = rollup_query(q, kb, &cfg).map_err(|e| e.to_string())?;
        for (i, canonical) in union_models(kb, u) {
            let direct = satisfies_query(q, &i);
            let rolled = satisfies_rollup(&r, &i);
            if canonical {
                ensure(direct == rolled, || format!("{case}: query {direct}, trees/groundings {rolled} on\n{i}"))?;
                counts.0 += 1;
            } else {
                ensure(!rolled || direct, || format!("{case}: trees/groundings hold but the query fails on\n{i}"))?;
                counts.1 += 1;
            }
        }
    }
    Ok(())
}

pub fn c7_union_theorem() -> Outcome {
    let mut counts = (0, 0);
    for case in corpus_cases().iter().filter(|c| c.name != "running") {
        union_check(&case.name, &case.kb, &case.ucq, &mut counts)?;
    }
    let mut rng = gen::rng(7);
    for i in 0..40 {
        let kb = gen::kb(&mut rng, true);
        let u = gen::ucq(&mut rng, &kb);
        union_check(&format!("random {i}"), &kb, &u, &mut counts)?;
    }
    Ok(format!("{} canonical interpretations (iff), {} plain models (soundness)", counts.0, counts.1))
}

/// `I ⊨ W(d, e)` iff `I ⊨ ↑(W)(d, e)` on models of the RBox.
pub fn up_lemma_holds(rbox: &RBox, w: &RoleConj, i: &FiniteInterpretation) -> bool {
    let up = up_close(w, rbox);
    (0..i.size).all(|d| (0..i.size).all(|e| i.conj_holds(w, d, e) == i.bool_role_holds(&up, d, e)))
}

pub fn c8_up_lemma() -> Outcome {
    let mut rng = gen::rng(8);
    let mut done = 0;
    while done < 200 {
        let rbox = gen::rbox(&mut rng, true);
        let Some(w) = gen::conj(&mut rng, &rbox, false) else { continue };
        let size = 1 + (done % 4);
        let i = gen::interpretation(&mut rng, size, &rbox);
        ensure(i.satisfies_rbox(&rbox), || "generated interpretation violates its RBox".into())?;
        ensure(up_lemma_holds(&rbox, &w, &i), || format!("extension of {w:?} differs from its upward closure"))?;
        done += 1;
    }
    Ok("200 triples, extension(up(W)) = extension(W)".into())
}

/// The RBox used for the translation check: a transitive role with a
/// sub-role and an inverse inclusion.
pub fn translation_rbox() -> RBox {
    use shiq_core::dl::Role;
    RBox::new([(Role::named("r"), Role::named("t")), (Role::inverse_of("s"), Role::named("r"))], [name("t")])
}

/// Satisfiability of a concept, directly by the oracle and by the tableau
/// on its translation.
pub fn c9_translation() -> Outcome {
    let rbox = translation_rbox();
    let mut rng = gen::rng(9);
    let (mut agree, mut undecided, mut unsat) = (0, 0, 0);
    let mut seen = BTreeSet::new();
    while seen.len() < 30 {
        let c = gen::concept(&mut rng, &rbox, 3).nnf();
        if c.depth() > 3 || !seen.insert(c.clone()) {
            continue;
        }
        let kb = Kb::new([], rbox.clone(), [Assertion::Instance(name("a"), c.clone())]).map_err(|e| e.to_string())?;
        let oracle = model_search(&kb, SearchGoal::default(), 4).is_some();
        let (tc, _) = tr_concept(&c, &rbox);
        let tbox = aux_tbox(&c, &rbox);
        let tableau = is_satisfiable(&tc, &tbox, &TableauConfig::default()).map_err(|e| e.to_string())?;
        match (oracle, tableau) {
            (true, true) => agree += 1,
            (false, false) => {
                agree += 1;
                unsat += 1;
            }
            (false, true) => undecided += 1,
            (true, false) => return Err(format!("{c:?} has a model but its translation is unsatisfiable")),
        }
    }
    ensure(undecided == 0, || format!("{undecided} concepts without a small model"))?;
    Ok(format!("30 concepts ({unsat} unsatisfiable), {agree} agree"))
}

/// The blocking KB is consistent, and blocking is what stops the tableau.
pub fn c10_blocking() -> Outcome {
    let kb = load_kb("blocking.kb");
    let translated = entail::translate(&kb, &[], &[], &[], EntailConfig::default().translation);
    let cfg = TableauConfig { max_nodes: 10_000, ..TableauConfig::default() };
    let result = check(&translated, &cfg).map_err(|e| e.to_string())?;
    ensure(result.consistent, || "blocking KB reported inconsistent".into())?;
    ensure(result.blocked_nodes > 0, || "no node was blocked".into())?;
    Ok(format!("CONSISTENT, {} blocked of {} nodes", result.blocked_nodes, result.final_nodes))
}

/// Role atoms of a query.
pub fn role_atoms(q: &Query) -> usize {
    q.role_atom_count()
}

/// `∃`-nodes of a concept.
pub fn existentials(c: &Concept) -> usize {
    usize::from(c.role_slot().is_some()) + c.children().into_iter().map(existentials).sum::<usize>()
}

/// The bounds from the counting argument for one query, with `n = |Q|`:
/// collapsings have at most `n + n²` atoms, split rewritings at most `3n`
/// role atoms and `3n` terms, loop rewritings at most `6n` role atoms,
/// forest rewritings, tree and ground queries at most `36n²` role atoms
/// (or `∃`-nodes).
pub fn size_bounds(q: &Query, kb: &Kb, cfg: &RewriteConfig) -> Result<usize, String> {
    let n = q.len();
    let stages = rewrite(q, kb, cfg).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for c in &stages.collapsings {
        ensure(c.len() <= n + n * n, || format!("collapsing {c:?} too large"))?;
        checked += 1;
    }
    for c in &stages.split {
        ensure(role_atoms(&c.query) <= 3 * n, || format!("split rewriting {:?} has too many role atoms", c.query))?;
        ensure(c.query.terms().len() <= 3 * n, || format!("split rewriting {:?} has too many terms", c.query))?;
        checked += 1;
    }
    for c in &stages.loops {
        ensure(role_atoms(&c.query) <= 6 * n, || format!("loop rewriting {:?} too large", c.query))?;
        checked += 1;
    }
    for c in &stages.forest {
        ensure(role_atoms(&c.query) <= 36 * n * n, || format!("forest rewriting {:?} too large", c.query))?;
        checked += 1;
    }
    if q.is_connected() {
        let r = rollup_query(q, kb, cfg).map_err(|e| e.to_string())?;
        for t in &r.trees {
            ensure(existentials(t) <= 36 * n * n, || format!("tree query {t:?} too large"))?;
        }
        for g in &r.groundings {
            let size = role_atoms(g) + g.atoms().iter().map(|a| match a {
                shiq_core::query::Atom::Concept(c, _) => existentials(c),
                _ => 0,
            }).sum::<usize>();
            ensure(size <= 36 * n * n, || format!("ground query {g:?} too large"))?;
        }
        checked += r.trees.len() + r.groundings.len();
    }
    Ok(checked)
}

pub fn c11_size_bounds() -> Outcome {
    let mut checked = 0;
    for case in corpus_cases() {
        let cfg = RewriteConfig::guided(case.kb.individuals().len());
        for q in case.ucq.disjuncts() {
            checked += size_bounds(q, &case.kb, &cfg).map_err(|e| format!("{}: {e}", case.name))?;
            // Exhaustive forest rewriting with transitive roles is only bounded
            // by the candidate budget, so it is checked on the other cases.
            if q.terms().len() <= 2 && case.kb.rbox().trans_roles().is_empty() {
                checked += size_bounds(q, &case.kb, &RewriteConfig::exhaustive()).map_err(|e| format!("{}: {e}", case.name))?;
            }
        }
    }
    Ok(format!("{checked} rewritten queries within the polynomial bounds"))
}
