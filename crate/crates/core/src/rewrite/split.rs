//! Split rewritings: role atoms realised through roots are made explicit by
//! routing them through root terms.

use std::collections::BTreeSet;

use super::collapse::collapsings_filtered;
use super::shape::{class_terms, is_root_splitting};
use super::{canonical, for_each_product, fresh, subsets, Budget, Candidate, Mode, RewriteConfig};
use crate::dl::{Kb, RBox, Role};
use crate::error::Result;
use crate::query::{Atom, Query, Term};

pub fn split_rewritings(q: &Query, kb: &Kb, cfg: &RewriteConfig) -> Result<Vec<Candidate>> {
    let guided = cfg.mode == Mode::Guided;
    let mut out = BTreeSet::new();
    let mut budget = Budget::new("split", cfg);
    for qc in collapsings_filtered(q, guided) {
        if guided {
            split_guided(&qc, kb.rbox(), cfg, &mut out, &mut budget)?;
        } else {
            split_exhaustive(&qc, kb.rbox(), cfg, &mut out, &mut budget)?;
        }
    }
    Ok(out.into_iter().collect())
}

fn parts(q: &Query) -> (Vec<Atom>, Vec<(Role, Term, Term)>) {
    let mut fixed = Vec::new();
    let mut roles = Vec::new();
    for a in q.atoms() {
        match a {
            Atom::Role(r, t, u) => roles.push((r.clone(), t.clone(), u.clone())),
            other => fixed.push(other.clone()),
        }
    }
    (fixed, roles)
}

fn two(s: &Role, t: &Term, u: &Term, t2: &Term) -> Vec<Atom> {
    vec![
        Atom::Role(s.clone(), t.clone(), u.clone()),
        Atom::Role(s.clone(), u.clone(), t2.clone()),
    ]
}

fn three(s: &Role, t: &Term, u: &Term, u2: &Term, t2: &Term) -> Vec<Atom> {
    vec![
        Atom::Role(s.clone(), t.clone(), u.clone()),
        Atom::Role(s.clone(), u.clone(), u2.clone()),
        Atom::Role(s.clone(), u2.clone(), t2.clone()),
    ]
}

fn assemble(fixed: &[Atom], pick: &[&Vec<Atom>]) -> Query {
    Query::build(fixed.iter().cloned().chain(pick.iter().flat_map(|v| v.iter().cloned())))
}

/// Every root splitting (over `≈`-classes, individuals' classes included)
/// of `q` within the class bound.
fn root_splittings(q: &Query, cfg: &RewriteConfig) -> Vec<BTreeSet<Term>> {
    let n = q.classes().len();
    let forced: BTreeSet<usize> = q.inds().map(|a| q.class_id(a)).collect();
    let optional: Vec<usize> = (0..n).filter(|c| !forced.contains(c)).collect();
    let bound = cfg.max_root_classes.unwrap_or(n);
    if forced.len() > bound {
        return vec![];
    }
    subsets(&optional, bound - forced.len())
        .into_iter()
        .map(|extra| {
            let cls: BTreeSet<usize> = forced.iter().copied().chain(extra).collect();
            class_terms(q, &cls)
        })
        .filter(|roots| is_root_splitting(q, roots))
        .collect()
}

fn split_exhaustive(
    q: &Query,
    rbox: &RBox,
    cfg: &RewriteConfig,
    out: &mut BTreeSet<Candidate>,
    budget: &mut Budget,
) -> Result<()> {
    let (fixed, roles) = parts(q);
    let mut pool: Vec<Term> = q.vars().cloned().collect();
    pool.extend((0..2 * roles.len()).map(|i| fresh("s", i)));
    let options: Vec<Vec<Vec<Atom>>> = roles
        .iter()
        .map(|(r, t, t2)| {
            let mut opts = vec![vec![Atom::Role(r.clone(), t.clone(), t2.clone())]];
            for s in rbox.transitive_subroles(r) {
                for u in &pool {
                    opts.push(two(&s, t, u, t2));
                }
                for u in &pool {
                    for u2 in &pool {
                        opts.push(three(&s, t, u, u2, t2));
                    }
                }
            }
            opts
        })
        .collect();
    for_each_product(&options, |pick| {
        let nq = assemble(&fixed, pick);
        for roots in root_splittings(&nq, cfg) {
            budget.tick()?;
            out.insert(canonical(Candidate::new(nq.clone(), roots)));
        }
        Ok(())
    })
}

fn split_guided(
    q: &Query,
    rbox: &RBox,
    cfg: &RewriteConfig,
    out: &mut BTreeSet<Candidate>,
    budget: &mut Budget,
) -> Result<()> {
    let (fixed, roles) = parts(q);
    let n = q.classes().len();
    let forced: BTreeSet<usize> = q.inds().map(|a| q.class_id(a)).collect();
    let optional: Vec<usize> = (0..n).filter(|c| !forced.contains(c)).collect();
    let non_simple = roles.iter().filter(|(r, _, _)| !rbox.transitive_subroles(r).is_empty()).count();
    let bound = cfg.max_root_classes.unwrap_or(n + 2 * non_simple);
    if forced.len() > bound {
        return Ok(());
    }
    for extra in subsets(&optional, bound - forced.len()) {
        let root_cls: BTreeSet<usize> = forced.iter().copied().chain(extra).collect();
        let max_fresh = (bound - root_cls.len()).min(2 * non_simple);
        for nf in 0..=max_fresh {
            let fresh_terms: Vec<Term> = (0..nf).map(|i| fresh("s", i)).collect();
            let mut roots = class_terms(q, &root_cls);
            roots.extend(fresh_terms.iter().cloned());
            // Middle terms: one representative per root class, plus the fresh roots.
            let mids: Vec<(Option<usize>, Term)> = root_cls
                .iter()
                .map(|&c| (Some(c), q.classes()[c][0].clone()))
                .chain(fresh_terms.iter().map(|t| (None, t.clone())))
                .collect();
            let options: Vec<Vec<Vec<Atom>>> = roles
                .iter()
                .map(|(r, t, t2)| {
                    let ct = q.class_id(t);
                    let ct2 = q.class_id(t2);
                    let mut opts = vec![vec![Atom::Role(r.clone(), t.clone(), t2.clone())]];
                    let (rt, rt2) = (root_cls.contains(&ct), root_cls.contains(&ct2));
                    for s in rbox.transitive_subrole_reps(r) {
                        match (rt, rt2) {
                            (true, false) => {
                                for (c, u) in &mids {
                                    if *c != Some(ct) {
                                        opts.push(two(&s, t, u, t2));
                                    }
                                }
                            }
                            (false, true) => {
                                for (c, u) in &mids {
                                    if *c != Some(ct2) {
                                        opts.push(two(&s, t, u, t2));
                                    }
                                }
                            }
                            (false, false) => {
                                for (c, u) in &mids {
                                    for (c2, u2) in &mids {
                                        if u != u2 && (c.is_none() || c != c2) {
                                            opts.push(three(&s, t, u, u2, t2));
                                        }
                                    }
                                }
                            }
                            (true, true) => {}
                        }
                    }
                    opts
                })
                .collect();
            for_each_product(&options, |pick| {
                let nq = assemble(&fixed, pick);
                if fresh_terms.iter().all(|f| nq.contains_term(f)) && is_root_splitting(&nq, &roots) {
                    budget.tick()?;
                    out.insert(canonical(Candidate::new(nq, roots.clone())));
                }
                Ok(())
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{name, RBox};

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn simple_roles_only_keep() {
        let kb = Kb::new([], RBox::default(), []).unwrap();
        let q = Query::build([
            Atom::role(Role::named("r"), v("x"), v("y")),
            Atom::role(Role::named("s"), v("y"), v("z")),
        ]);
        for cfg in [RewriteConfig::exhaustive(), RewriteConfig::guided(3)] {
            for c in split_rewritings(&q, &kb, &cfg).unwrap() {
                let base: BTreeSet<Atom> =
                    c.query.atoms().iter().filter(|a| !matches!(a, Atom::Eq(..))).cloned().collect();
                assert_eq!(&base, q.atoms());
            }
        }
    }

    #[test]
    fn all_roots_candidate_is_present() {
        let rb = RBox::new([], [name("r")]);
        let kb = Kb::new([], rb, []).unwrap();
        let q = Query::build([Atom::role(Role::named("r"), v("x"), v("y"))]);
        let all: BTreeSet<Term> = q.terms().iter().cloned().collect();
        let cands = split_rewritings(&q, &kb, &RewriteConfig::exhaustive()).unwrap();
        assert!(cands.contains(&Candidate::new(q.clone(), all)));
    }
}
