//! Canonical renaming of fresh variables, so that candidates differing only
//! in the names of introduced variables compare equal.

use std::collections::{BTreeMap, BTreeSet};

use super::{fresh, is_fresh, Candidate};
use crate::dl::name;
use crate::query::{Atom, Query, Term};

/// Upper bound on the renamings tried for one candidate; ties beyond it are
/// broken by the signature order alone (still deterministic, possibly
/// leaving some duplicates).
const MAX_PERMUTATIONS: usize = 40_320;

fn signature(
    q: &Query,
    roots: &BTreeSet<Term>,
    f: &Term,
    renamable: &dyn Fn(&Term) -> bool,
) -> (bool, Vec<Atom>) {
    let star = Term::Var(name("*"));
    let other = Term::Var(name("?"));
    let mut atoms: Vec<Atom> = q
        .atoms()
        .iter()
        .filter(|a| a.terms().contains(&f))
        .map(|a| {
            a.map_terms(|t| {
                if t == f {
                    star.clone()
                } else if renamable(t) {
                    other.clone()
                } else {
                    t.clone()
                }
            })
        })
        .collect();
    atoms.sort();
    (roots.contains(f), atoms)
}

pub fn canonical(c: Candidate) -> Candidate {
    canonical_by(c, &is_fresh, "v")
}

/// Canonical renaming of the variables selected by `renamable` to
/// `_{prefix}0`, `_{prefix}1`, ...
pub(crate) fn canonical_by(c: Candidate, renamable: &dyn Fn(&Term) -> bool, prefix: &str) -> Candidate {
    let fresh_vars: Vec<Term> = c.query.vars().filter(|t| renamable(t)).cloned().collect();
    if fresh_vars.is_empty() {
        return c;
    }
    let mut keyed: Vec<((bool, Vec<Atom>), Term)> = fresh_vars
        .into_iter()
        .map(|f| (signature(&c.query, &c.roots, &f, renamable), f))
        .collect();
    keyed.sort();
    let mut groups: Vec<Vec<Term>> = Vec::new();
    for (i, (sig, t)) in keyed.iter().enumerate() {
        if i > 0 && keyed[i - 1].0 == *sig {
            groups.last_mut().unwrap().push(t.clone());
        } else {
            groups.push(vec![t.clone()]);
        }
    }
    let total: usize = groups
        .iter()
        .map(|g| (1..=g.len()).product::<usize>())
        .try_fold(1usize, |acc, x| acc.checked_mul(x))
        .unwrap_or(usize::MAX);

    let apply = |order: &[Term]| -> Candidate {
        let map: BTreeMap<Term, Term> =
            order.iter().enumerate().map(|(i, t)| (t.clone(), fresh(prefix, i))).collect();
        let roots = c.roots.iter().map(|t| map.get(t).cloned().unwrap_or_else(|| t.clone())).collect();
        Candidate { query: c.query.rename(&map), roots }
    };

    if total > MAX_PERMUTATIONS || total == 1 {
        let order: Vec<Term> = groups.into_iter().flatten().collect();
        return apply(&order);
    }
    let group_perms: Vec<Vec<Vec<Term>>> = groups
        .iter()
        .map(|g| itertools::Itertools::permutations(g.iter().cloned(), g.len()).collect())
        .collect();
    let mut best: Option<Candidate> = None;
    let _ = super::for_each_product(&group_perms, |pick| {
        let order: Vec<Term> = pick.iter().flat_map(|p| p.iter().cloned()).collect();
        let cand = apply(&order);
        if best.as_ref().is_none_or(|b| (&cand.query, &cand.roots) < (&b.query, &b.roots)) {
            best = Some(cand);
        }
        Ok(())
    });
    best.expect("at least one permutation")
}
