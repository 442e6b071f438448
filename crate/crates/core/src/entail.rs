//! Entailment as inconsistency of extended knowledge bases, ABox partitions
//! for reasoning without the unique name assumption, and query answering.
//!
//! An extended KB adds `⊤ ⊑ ¬C` for every tree query `C` and, for every
//! ground query, the negation of one of its atoms. The query is entailed iff
//! every extended KB is inconsistent. The default strategy decides all of
//! them with one tableau run: the spoiler choices become disjunctive ABox
//! clauses on which the tableau branches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

use crate::dl::{Assertion, Concept, Gci, Kb, Name};
use crate::error::{Error, Result};
use crate::query::{AnswerQuery, Atom, Query, Term, Ucq};
use crate::rewrite::{set_partitions, Mode, RewriteConfig, DEFAULT_BUDGET};
use crate::rollup::{rollup_query, Rollup};
use crate::tableau::{check, TableauConfig};
use crate::translate::{AlcqibKb, KbTranslation, TrMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Entailed,
    NotEntailed,
}

impl Verdict {
    pub fn from_bool(entailed: bool) -> Verdict {
        if entailed {
            Verdict::Entailed
        } else {
            Verdict::NotEntailed
        }
    }

    pub fn is_entailed(self) -> bool {
        self == Verdict::Entailed
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Entailed => "ENTAILED",
            Verdict::NotEntailed => "NOT-ENTAILED",
        })
    }
}

/// How the family of extended KBs is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// One tableau run; spoiler choices are disjunctive ABox clauses.
    Disjunctive,
    /// One tableau run per choice function, stopping at the first
    /// consistent extended KB.
    Enumerate,
}

#[derive(Clone, Debug)]
pub struct EntailConfig {
    pub mode: Mode,
    /// Per-stage candidate budget of the rewriting.
    pub budget: usize,
    /// Maximal number of extended KBs enumerated.
    pub max_extended: usize,
    /// Maximal number of ABox partitions.
    pub max_partitions: usize,
    pub strategy: Strategy,
    pub translation: TrMode,
    /// Drop tree and ground queries implied by others before reasoning.
    pub simplify: bool,
    pub tableau: TableauConfig,
}

impl Default for EntailConfig {
    fn default() -> Self {
        EntailConfig {
            mode: Mode::Guided,
            budget: DEFAULT_BUDGET,
            max_extended: 1_000_000,
            max_partitions: 100_000,
            strategy: Strategy::Disjunctive,
            translation: TrMode::Universal,
            simplify: true,
            tableau: TableauConfig::default(),
        }
    }
}

impl EntailConfig {
    pub fn rewrite_config(&self, kb: &Kb) -> RewriteConfig {
        match self.mode {
            Mode::Guided => RewriteConfig::guided(kb.individuals().len()),
            Mode::Exhaustive => RewriteConfig::exhaustive(),
        }
        .with_budget(self.budget)
    }
}

/// A KB extended by query-derived axioms and spoiler assertions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedKb {
    pub base: Kb,
    pub tree_tbox: Vec<Gci>,
    pub spoilers: Vec<Assertion>,
}

impl ExtendedKb {
    pub fn to_kb(&self) -> Result<Kb> {
        self.base.extend(self.tree_tbox.iter().cloned(), self.spoilers.iter().cloned())
    }
}

/// `T_Q`: `⊤ ⊑ nnf(¬C)` for every tree query `C`.
pub fn extended_tbox(trees: &BTreeSet<Concept>) -> Vec<Gci> {
    trees.iter().map(|c| Gci::new(Concept::Top, c.neg_nnf())).collect()
}

/// The negation of a ground atom; `None` when it cannot be false.
pub fn spoiler(atom: &Atom) -> Option<Assertion> {
    match atom {
        Atom::Concept(c, t) => Some(Assertion::Instance(t.name().clone(), c.neg_nnf())),
        Atom::Role(r, t, u) => Some(Assertion::NotRelated(t.name().clone(), u.name().clone(), r.clone())),
        Atom::Eq(t, u) if t == u => None,
        Atom::Eq(t, u) => Some(Assertion::Distinct(t.name().clone(), u.name().clone())),
    }
}

/// The possible spoilers of each ground query, in canonical order.
pub fn spoiler_clauses(groundings: &BTreeSet<Query>) -> Vec<Vec<Assertion>> {
    groundings.iter().map(|g| g.atoms().iter().filter_map(spoiler).collect()).collect()
}

/// Tree and ground queries of every disjunct (which must be connected).
pub fn rollup_ucq(kb: &Kb, u: &Ucq, cfg: &EntailConfig) -> Result<Rollup> {
    let rcfg = cfg.rewrite_config(kb);
    let mut out = Rollup::default();
    for q in u.disjuncts() {
        if !q.is_connected() {
            return Err(Error::Semantic("extended knowledge bases need connected disjuncts".into()));
        }
        out.merge(rollup_query(q, kb, &rcfg)?);
    }
    Ok(if cfg.simplify { out.simplify(kb.rbox()) } else { out })
}

/// Lazy enumeration of the extended KBs: one per choice of a spoiler for
/// every ground query, in lexicographic order.
pub struct ExtendedKbs {
    base: Kb,
    tree_tbox: Vec<Gci>,
    clauses: Vec<Vec<Assertion>>,
    next: Option<Vec<usize>>,
}

impl ExtendedKbs {
    /// `∏ |Q'|` over the ground queries (saturating).
    pub fn total(&self) -> usize {
        self.clauses.iter().fold(1usize, |acc, c| acc.saturating_mul(c.len()))
    }
}

impl Iterator for ExtendedKbs {
    type Item = ExtendedKb;

    fn next(&mut self) -> Option<ExtendedKb> {
        let choice = self.next.take()?;
        let spoilers = choice.iter().zip(&self.clauses).map(|(&i, c)| c[i].clone()).collect();
        let mut succ = choice;
        let mut i = succ.len();
        self.next = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.clauses[i].len() {
                break Some(succ);
            }
            succ[i] = 0;
        };
        Some(ExtendedKb { base: self.base.clone(), tree_tbox: self.tree_tbox.clone(), spoilers })
    }
}

pub fn extended_kbs(kb: &Kb, rollup: &Rollup) -> ExtendedKbs {
    let clauses = spoiler_clauses(&rollup.groundings);
    let start = if clauses.iter().any(Vec::is_empty) { None } else { Some(vec![0; clauses.len()]) };
    ExtendedKbs { base: kb.clone(), tree_tbox: extended_tbox(&rollup.trees), clauses, next: start }
}

/// Translates `kb` plus extra axioms, assertions and disjunctive clauses.
pub fn translate(kb: &Kb, extra_tbox: &[Gci], extra_abox: &[Assertion], clauses: &[Vec<Assertion>], mode: TrMode) -> AlcqibKb {
    let mut tr = KbTranslation::new(kb.rbox(), mode);
    for g in kb.tbox().iter().chain(extra_tbox) {
        tr.gci(&g.sub, &g.sup);
    }
    for a in kb.abox().iter().chain(extra_abox) {
        tr.abox_assertion(a);
    }
    for c in clauses {
        tr.clause(c);
    }
    tr.finish()
}

/// Consistency of a SHIQ KB.
pub fn is_consistent(kb: &Kb, cfg: &EntailConfig) -> Result<bool> {
    Ok(check(&translate(kb, &[], &[], &[], cfg.translation), &cfg.tableau)?.consistent)
}

fn una_assertions(kb: &Kb) -> Vec<Assertion> {
    let inds: Vec<Name> = kb.individuals().into_iter().collect();
    let mut out = Vec::new();
    for i in 0..inds.len() {
        for j in i + 1..inds.len() {
            out.push(Assertion::Distinct(inds[i].clone(), inds[j].clone()));
        }
    }
    out
}

/// Entailment under the unique name assumption for a UCQ whose disjuncts
/// are connected.
fn entails_connected(kb: &Kb, u: &Ucq, cfg: &EntailConfig) -> Result<Verdict> {
    let rollup = rollup_ucq(kb, u, cfg)?;
    let una = una_assertions(kb);
    let tree_tbox = extended_tbox(&rollup.trees);
    match cfg.strategy {
        Strategy::Disjunctive => {
            let clauses = spoiler_clauses(&rollup.groundings);
            let a = translate(kb, &tree_tbox, &una, &clauses, cfg.translation);
            Ok(Verdict::from_bool(!check(&a, &cfg.tableau)?.consistent))
        }
        Strategy::Enumerate => {
            let ekbs = extended_kbs(kb, &rollup);
            if ekbs.total() > cfg.max_extended {
                return Err(Error::BudgetExceeded { stage: "extended knowledge bases", limit: cfg.max_extended });
            }
            let found = AtomicBool::new(false);
            let results: Vec<Result<bool>> = ekbs
                .par_bridge()
                .map(|e| {
                    if found.load(Ordering::Relaxed) {
                        return Ok(false);
                    }
                    let mut extra = una.clone();
                    extra.extend(e.spoilers);
                    let a = translate(&e.base, &e.tree_tbox, &extra, &[], cfg.translation);
                    let consistent = check(&a, &cfg.tableau)?.consistent;
                    if consistent {
                        found.store(true, Ordering::Relaxed);
                    }
                    Ok(consistent)
                })
                .collect();
            fold_any(results).map(|consistent| Verdict::from_bool(!consistent))
        }
    }
}

/// `true` if some result is `true`; otherwise the first error, if any.
fn fold_any(results: Vec<Result<bool>>) -> Result<bool> {
    let mut err = None;
    for r in results {
        match r {
            Ok(true) => return Ok(true),
            Ok(false) => {}
            Err(e) => {
                err.get_or_insert(e);
            }
        }
    }
    err.map_or(Ok(false), Err)
}

/// Entailment under the unique name assumption; disconnected disjuncts are
/// handled through the conjunctive normal form.
pub fn entails_una(kb: &Kb, u: &Ucq, cfg: &EntailConfig) -> Result<Verdict> {
    for conjunct in u.to_cnf() {
        if entails_connected(kb, &conjunct, cfg)? == Verdict::NotEntailed {
            return Ok(Verdict::NotEntailed);
        }
    }
    Ok(Verdict::Entailed)
}

/// A partition of the individuals with one representative per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbPartition {
    pub blocks: Vec<Vec<Name>>,
    /// Each individual to its block's representative (the least name).
    pub representative: BTreeMap<Name, Name>,
}

impl AbPartition {
    pub fn apply_kb(&self, kb: &Kb) -> Kb {
        kb.rename_individuals(&self.representative)
    }

    pub fn apply_ucq(&self, u: &Ucq) -> Ucq {
        let map = self.representative.iter().map(|(a, b)| (Term::Ind(a.clone()), Term::Ind(b.clone()))).collect();
        u.rename(&map)
    }
}

/// All partitions of the individuals, coarsest first.
pub fn ab_partitions(individuals: &BTreeSet<Name>) -> Vec<AbPartition> {
    let inds: Vec<Name> = individuals.iter().cloned().collect();
    let mut out: Vec<AbPartition> = set_partitions(inds.len())
        .into_iter()
        .map(|blocks_of| {
            let k = blocks_of.iter().copied().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); k];
            for (i, &b) in blocks_of.iter().enumerate() {
                blocks[b].push(inds[i].clone());
            }
            let representative =
                blocks.iter().flat_map(|b| b.iter().map(move |a| (a.clone(), b[0].clone()))).collect();
            AbPartition { blocks, representative }
        })
        .collect();
    out.sort_by_key(|p| p.blocks.len());
    out
}

/// `Bell(n)` by the Bell triangle; `None` on overflow.
fn bell(n: usize) -> Option<usize> {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last()?];
        for x in &row {
            let v = next.last()?.checked_add(*x)?;
            next.push(v);
        }
        row = next;
    }
    Some(row[0])
}

/// Entailment, with or without the unique name assumption.
pub fn entails(kb: &Kb, u: &Ucq, una: bool, cfg: &EntailConfig) -> Result<Verdict> {
    if una {
        return entails_una(kb, u, cfg);
    }
    let inds = kb.individuals();
    if bell(inds.len()).is_none_or(|b| b > cfg.max_partitions) {
        return Err(Error::BudgetExceeded { stage: "ABox partitions", limit: cfg.max_partitions });
    }
    let found = AtomicBool::new(false);
    let results: Vec<Result<bool>> = ab_partitions(&inds)
        .par_iter()
        .map(|p| {
            if found.load(Ordering::Relaxed) {
                return Ok(false);
            }
            let non = entails_una(&p.apply_kb(kb), &p.apply_ucq(u), cfg)? == Verdict::NotEntailed;
            if non {
                found.store(true, Ordering::Relaxed);
            }
            Ok(non)
        })
        .collect();
    fold_any(results).map(|non| Verdict::from_bool(!non))
}

/// All tuples of individuals whose substitution into the answer variables
/// gives an entailed Boolean query, sorted.
pub fn answer(kb: &Kb, aq: &AnswerQuery, una: bool, cfg: &EntailConfig) -> Result<Vec<Vec<Name>>> {
    let inds: Vec<Name> = kb.individuals().into_iter().collect();
    let m = aq.answer_vars().len();
    let total = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(inds.len()));
    if total.is_none_or(|t| t > cfg.max_extended) {
        return Err(Error::BudgetExceeded { stage: "answer tuples", limit: cfg.max_extended });
    }
    let tuples: Vec<Vec<Name>> = itertools::Itertools::multi_cartesian_product((0..m).map(|_| inds.iter().cloned()))
        .collect();
    let tuples = if m == 0 { vec![vec![]] } else { tuples };
    let results: Vec<Result<Option<Vec<Name>>>> = tuples
        .into_par_iter()
        .map(|tuple| {
            let map: BTreeMap<Term, Term> =
                aq.answer_vars().iter().cloned().zip(tuple.iter().map(|a| Term::Ind(a.clone()))).collect();
            let q = aq.query().rename(&map);
            Ok(entails(kb, &Ucq::single(q), una, cfg)?.is_entailed().then_some(tuple))
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        if let Some(t) = r? {
            out.push(t);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{name, RBox, Role, RoleConj};

    fn kb(abox: Vec<Assertion>) -> Kb {
        Kb::new([], RBox::default(), abox).unwrap()
    }

    #[test]
    fn tree_axioms_negate_the_concept() {
        let c = Concept::exists(RoleConj::single(Role::named("r")), Concept::atomic("A"));
        let t = extended_tbox(&BTreeSet::from([c]));
        let expect = Concept::forall(RoleConj::single(Role::named("r")), Concept::not(Concept::atomic("A")));
        assert_eq!(t, vec![Gci::new(Concept::Top, expect)]);
        assert!(extended_tbox(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn bell_numbers() {
        let b: Vec<usize> = (0..6).map(|n| bell(n).unwrap()).collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn partitions_coarsest_first() {
        let inds: BTreeSet<Name> = ["a", "b", "c"].iter().map(|s| name(s)).collect();
        let ps = ab_partitions(&inds);
        assert_eq!(ps.len(), 5);
        assert_eq!(ps[0].blocks.len(), 1);
        assert_eq!(ps[4].blocks.len(), 3);
        assert!(ps.iter().all(|p| p.blocks.iter().all(|b| b.iter().all(|a| p.representative[a] == b[0]))));
        assert_eq!(ab_partitions(&BTreeSet::from([name("a")])).len(), 1);
    }

    #[test]
    fn extended_kb_count_is_the_product() {
        let a = Term::ind("a");
        let g = |n: &str| {
            Query::build([
                Atom::concept(Concept::atomic(n), a.clone()),
                Atom::concept(Concept::atomic("B"), a.clone()),
                Atom::role(Role::named("r"), a.clone(), a.clone()),
            ])
        };
        let rollup = Rollup { trees: BTreeSet::new(), groundings: BTreeSet::from([g("A"), g("C")]) };
        let k = kb(vec![Assertion::Instance(name("a"), Concept::Top)]);
        let e = extended_kbs(&k, &rollup);
        assert_eq!(e.total(), 9);
        assert_eq!(e.count(), 9);
        let empty = extended_kbs(&k, &Rollup::default()).collect::<Vec<_>>();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0].to_kb().unwrap(), k);
    }

    #[test]
    fn simple_instance_query() {
        let a = Assertion::Instance(name("a"), Concept::atomic("A"));
        let b = Assertion::Instance(name("b"), Concept::atomic("B"));
        let k = kb(vec![a, b]);
        let q = |atoms: Vec<Atom>| Ucq::single(Query::build(atoms));
        let x = Term::var("x");
        let cfg = EntailConfig::default();
        let qa = q(vec![Atom::concept(Concept::atomic("A"), x.clone())]);
        assert_eq!(entails(&k, &qa, true, &cfg).unwrap(), Verdict::Entailed);
        let qab = q(vec![Atom::concept(Concept::atomic("A"), x.clone()), Atom::concept(Concept::atomic("B"), x)]);
        assert_eq!(entails(&k, &qab, true, &cfg).unwrap(), Verdict::NotEntailed);
        assert_eq!(entails(&k, &qab, false, &cfg).unwrap(), Verdict::NotEntailed);
    }
}
