//! Loop rewritings: a loop `r(t, t)` at a non-root term can only hold through
//! a transitive sub-role and a neighbour, which is made explicit.

use std::collections::BTreeSet;

use super::shape::{is_root_splitting, root_classes};
use super::{canonical, for_each_product, fresh, Budget, Candidate, Mode, RewriteConfig};
use crate::dl::Kb;
use crate::error::Result;
use crate::query::{Atom, Query};

pub fn loop_rewritings(cands: &[Candidate], kb: &Kb, cfg: &RewriteConfig) -> Result<Vec<Candidate>> {
    let rbox = kb.rbox();
    let mut out = BTreeSet::new();
    let mut budget = Budget::new("loop", cfg);
    for cand in cands {
        let q = &cand.query;
        let rc = root_classes(q, &cand.roots);
        let mut fixed = Vec::new();
        let mut loops = Vec::new();
        for a in q.atoms() {
            match a {
                Atom::Role(r, t, t2)
                    if q.class_id(t) == q.class_id(t2) && !rc.contains(&q.class_id(t)) =>
                {
                    loops.push((r.clone(), t.clone(), t2.clone()))
                }
                other => fixed.push(other.clone()),
            }
        }
        if loops.is_empty() {
            budget.tick()?;
            out.insert(cand.clone());
            continue;
        }
        let options: Vec<Vec<Vec<Atom>>> = loops
            .iter()
            .enumerate()
            .map(|(i, (r, t, t2))| {
                let mut opts = Vec::new();
                let ct = q.class_id(t);
                // A fresh neighbour always suffices for a match (it may share
                // its image with another term); reusing terms is exhaustive only.
                let mut others: Vec<_> = match cfg.mode {
                    Mode::Exhaustive => q.terms().iter().filter(|u| q.class_id(u) != ct).cloned().collect(),
                    Mode::Guided => vec![],
                };
                others.push(fresh("l", i));
                let subs = match cfg.mode {
                    Mode::Exhaustive => rbox.transitive_subroles(r),
                    Mode::Guided => rbox.transitive_subrole_reps(r),
                };
                for s in subs {
                    for u in &others {
                        opts.push(vec![
                            Atom::Role(s.clone(), t.clone(), u.clone()),
                            Atom::Role(s.clone(), u.clone(), t2.clone()),
                        ]);
                    }
                }
                opts
            })
            .collect();
        for_each_product(&options, |pick| {
            let nq = Query::build(fixed.iter().cloned().chain(pick.iter().flat_map(|v| v.iter().cloned())));
            if is_root_splitting(&nq, &cand.roots) {
                budget.tick()?;
                out.insert(canonical(Candidate::new(nq, cand.roots.clone())));
            }
            Ok(())
        })?;
    }
    Ok(out.into_iter().collect())
}
