//! Forest rewritings: role atoms inside a sub-query (or the whole query when
//! there are no roots) are replaced by chains over a transitive sub-role so
//! that the result becomes forest-shaped.
//!
//! Guided mode enumerates, per region, the trees whose nodes are the region's
//! `≈`-classes plus fresh branching nodes (via Prüfer sequences) and routes
//! every atom along its tree path. Exhaustive mode enumerates chains through
//! arbitrary interior terms and filters by shape.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::canon::canonical_by;
use super::shape::{is_forest_shaped, is_root_splitting, reach_classes, root_classes};
use super::{canonical, for_each_product, fresh, Budget, Candidate, Mode, RewriteConfig};
use crate::dl::{Kb, RBox, Role};
use crate::error::Result;
use crate::query::{Atom, Query, Term};

pub fn forest_rewritings(cands: &[Candidate], kb: &Kb, cfg: &RewriteConfig) -> Result<Vec<Candidate>> {
    let mut out = BTreeSet::new();
    let mut budget = Budget::new("forest", cfg);
    for cand in cands {
        let regions = regions(cand);
        match cfg.mode {
            Mode::Guided => forest_guided(cand, &regions, kb.rbox(), &mut out, &mut budget)?,
            Mode::Exhaustive => forest_exhaustive(cand, &regions, kb.rbox(), &mut out, &mut budget)?,
        }
    }
    Ok(out.into_iter().collect())
}

/// A part of the query that must become a tree: its classes, the root class
/// (if any) and the role atoms that may be rewritten.
struct Region {
    root: Option<usize>,
    classes: Vec<usize>,
    atoms: Vec<(Role, Term, Term)>,
}

/// Splits a candidate into regions; the returned regions own every role atom
/// except those between root classes and loops at roots.
fn regions(cand: &Candidate) -> Vec<Region> {
    let q = &cand.query;
    let rc = root_classes(q, &cand.roots);
    let mut regions: Vec<Region> = if rc.is_empty() {
        vec![Region { root: None, classes: (0..q.classes().len()).collect(), atoms: vec![] }]
    } else {
        rc.iter()
            .map(|&c| Region {
                root: Some(c),
                classes: reach_classes(q, &q.classes()[c][0], &cand.roots).into_iter().collect(),
                atoms: vec![],
            })
            .collect()
    };
    for (r, t, u) in q.role_atoms() {
        let (ct, cu) = (q.class_id(t), q.class_id(u));
        if ct == cu && rc.contains(&ct) {
            continue;
        }
        if let Some(reg) = regions
            .iter_mut()
            .find(|reg| reg.classes.binary_search(&ct).is_ok() && reg.classes.binary_search(&cu).is_ok())
        {
            reg.atoms.push((r.clone(), t.clone(), u.clone()));
        }
    }
    regions
}

/// Atoms of `q` that no region may rewrite.
fn fixed_atoms(q: &Query, regions: &[Region]) -> Vec<Atom> {
    let owned: BTreeSet<Atom> = regions
        .iter()
        .flat_map(|reg| reg.atoms.iter().map(|(r, t, u)| Atom::Role(r.clone(), t.clone(), u.clone())))
        .collect();
    q.atoms().iter().filter(|a| !owned.contains(a)).cloned().collect()
}

fn accept(nq: Query, cand: &Candidate, out: &mut BTreeSet<Candidate>, budget: &mut Budget) -> Result<()> {
    if is_forest_shaped(&nq, &cand.roots) && is_root_splitting(&nq, &cand.roots) {
        budget.tick()?;
        out.insert(canonical(Candidate::new(nq, cand.roots.clone())));
    }
    Ok(())
}

fn chain(s: &Role, t: &Term, interior: &[Term], u: &Term) -> Vec<Atom> {
    let mut nodes = Vec::with_capacity(interior.len() + 2);
    nodes.push(t.clone());
    nodes.extend(interior.iter().cloned());
    nodes.push(u.clone());
    nodes.windows(2).map(|w| Atom::Role(s.clone(), w[0].clone(), w[1].clone())).collect()
}

fn forest_exhaustive(
    cand: &Candidate,
    regions: &[Region],
    rbox: &RBox,
    out: &mut BTreeSet<Candidate>,
    budget: &mut Budget,
) -> Result<()> {
    let q = &cand.query;
    let n_v = q.vars().count();
    let fixed = fixed_atoms(q, regions);
    let mut base_pool: Vec<Term> = q.vars().cloned().collect();
    base_pool.extend((0..n_v).map(|i| fresh("f", i)));
    let mut options: Vec<Vec<Vec<Atom>>> = Vec::new();
    for reg in regions {
        let mut pool = base_pool.clone();
        if let Some(c) = reg.root {
            pool.extend(q.classes()[c].iter().filter(|t| t.is_ind()).cloned());
        }
        for (r, t, u) in &reg.atoms {
            let mut opts = vec![vec![Atom::Role(r.clone(), t.clone(), u.clone())]];
            for s in rbox.transitive_subroles(r) {
                for len in 2..=n_v {
                    let interiors: Vec<Vec<Term>> = vec![pool.clone(); len - 1];
                    for_each_product(&interiors, |pick| {
                        let inner: Vec<Term> = pick.iter().map(|t| (*t).clone()).collect();
                        let atoms = chain(&s, t, &inner, u);
                        let repeats = atoms.iter().any(|a| match a {
                            Atom::Role(_, x, y) => x == y,
                            _ => false,
                        });
                        if !repeats {
                            opts.push(atoms);
                        }
                        Ok(())
                    })?;
                }
            }
            options.push(opts);
        }
    }
    for_each_product(&options, |pick| {
        budget.tick()?;
        let nq = Query::build(fixed.iter().cloned().chain(pick.iter().flat_map(|v| v.iter().cloned())));
        accept(nq, cand, out, budget)
    })
}

fn forest_guided(
    cand: &Candidate,
    regions: &[Region],
    rbox: &RBox,
    out: &mut BTreeSet<Candidate>,
    budget: &mut Budget,
) -> Result<()> {
    let q = &cand.query;
    let n_v = q.vars().count();
    let fixed = fixed_atoms(q, regions);
    let mut per_region: Vec<Vec<(Vec<Atom>, usize)>> = Vec::new();
    for reg in regions {
        let opts = region_trees(q, reg, rbox, n_v, budget)?;
        if opts.is_empty() {
            return Ok(());
        }
        per_region.push(opts);
    }
    for_each_product(&per_region, |pick| {
        let total: usize = pick.iter().map(|(_, f)| f).sum();
        if total > n_v {
            return Ok(());
        }
        let mut atoms = fixed.clone();
        let mut offset = 0;
        for (region_atoms, nf) in pick {
            let map: BTreeMap<Term, Term> =
                (0..*nf).map(|i| (fresh("#", i), fresh("f", offset + i))).collect();
            atoms.extend(region_atoms.iter().map(|a| a.map_terms(|t| map.get(t).cloned().unwrap_or_else(|| t.clone()))));
            offset += nf;
        }
        accept(Query::build(atoms), cand, out, budget)
    })
}

fn is_local_fresh(t: &Term) -> bool {
    t.is_var() && t.name().starts_with("_#")
}

/// Rewritings of one region into a tree, each with its count of fresh
/// (`_#i`) nodes, deduplicated up to renaming of those nodes.
fn region_trees(
    q: &Query,
    reg: &Region,
    rbox: &RBox,
    n_v: usize,
    budget: &mut Budget,
) -> Result<Vec<(Vec<Atom>, usize)>> {
    if reg.atoms.is_empty() {
        return Ok(vec![(vec![], 0)]);
    }
    let k = reg.classes.len();
    let pos: BTreeMap<usize, usize> = reg.classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let max_fresh = if reg.root.is_none() { k.saturating_sub(1) } else { k.saturating_sub(2) }.min(n_v);
    let mut found: BTreeSet<Vec<Atom>> = BTreeSet::new();
    for nf in 0..=max_fresh {
        let n = k + nf;
        let node_term: Vec<Term> = reg
            .classes
            .iter()
            .map(|&c| q.classes()[c][0].clone())
            .chain((0..nf).map(|i| fresh("#", i)))
            .collect();
        prufer_sequences(k, nf, reg.root.is_none(), &mut |seq| {
            let adj = prufer_decode(seq, n);
            let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut options: Vec<Vec<Vec<Atom>>> = Vec::new();
            for (r, t, u) in &reg.atoms {
                let (a, b) = (pos[&q.class_id(t)], pos[&q.class_id(u)]);
                let path = tree_path(&adj, a, b);
                for w in path.windows(2) {
                    covered.insert((w[0].min(w[1]), w[0].max(w[1])));
                }
                let len = path.len() - 1;
                if len <= 1 {
                    options.push(vec![vec![Atom::Role(r.clone(), t.clone(), u.clone())]]);
                    continue;
                }
                if len > n_v {
                    return Ok(());
                }
                let interior: Vec<Term> = path[1..len].iter().map(|&i| node_term[i].clone()).collect();
                let opts: Vec<Vec<Atom>> =
                    rbox.transitive_subrole_reps(r).iter().map(|s| chain(s, t, &interior, u)).collect();
                if opts.is_empty() {
                    return Ok(());
                }
                options.push(opts);
            }
            if covered.len() != n - 1 {
                return Ok(());
            }
            for_each_product(&options, |pick| {
                budget.tick()?;
                let atoms: Vec<Atom> = pick.iter().flat_map(|v| v.iter().cloned()).collect();
                let c = canonical_by(Candidate::new(Query::build(atoms), BTreeSet::new()), &is_local_fresh, "#");
                found.insert(c.query.atoms().iter().cloned().collect());
                Ok(())
            })
        })?;
    }
    Ok(found
        .into_iter()
        .map(|atoms| {
            let nf: BTreeSet<&Term> =
                atoms.iter().flat_map(|a| a.terms()).filter(|t| is_local_fresh(t)).collect();
            let count = nf.len();
            (atoms, count)
        })
        .collect())
}

/// Fresh nodes (indices `k..k+nf`) must branch: degree at least three, except
/// that one of them may have degree two when it can be the tree's top.
fn fresh_degrees_ok(seq: &[usize], k: usize, nf: usize, allow_top: bool) -> bool {
    let mut two = 0;
    for f in k..k + nf {
        // Degree in a Prüfer-coded tree is one plus the number of occurrences.
        let occ = seq.iter().filter(|&&x| x == f).count();
        match occ {
            0 => return false,
            1 => two += 1,
            _ => {}
        }
    }
    two == 0 || (allow_top && two == 1)
}

/// Calls `f` on every Prüfer sequence over `k` class nodes and `nf` fresh
/// nodes (numbered after the classes) that satisfies [`fresh_degrees_ok`].
fn prufer_sequences(
    k: usize,
    nf: usize,
    allow_top: bool,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn go(
        seq: &mut Vec<usize>,
        len: usize,
        counts: &mut [usize],
        k: usize,
        slack: usize,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        let deficit: usize = counts[k..].iter().map(|&c| 2usize.saturating_sub(c)).sum();
        if deficit > len - seq.len() + slack {
            return Ok(());
        }
        if seq.len() == len {
            let nf = counts.len() - k;
            return if fresh_degrees_ok(seq, k, nf, slack == 1) { f(seq) } else { Ok(()) };
        }
        for x in 0..counts.len() {
            seq.push(x);
            counts[x] += 1;
            go(seq, len, counts, k, slack, f)?;
            counts[x] -= 1;
            seq.pop();
        }
        Ok(())
    }
    let n = k + nf;
    if n == 0 {
        return Ok(());
    }
    let mut counts = vec![0usize; n];
    go(&mut Vec::new(), n.saturating_sub(2), &mut counts, k, usize::from(allow_top), f)
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    if n < 2 {
        return adj;
    }
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    for &x in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("Prüfer leaf");
        adj[leaf].push(x);
        adj[x].push(leaf);
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let last: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    adj[last[0]].push(last[1]);
    adj[last[1]].push(last[0]);
    adj
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prufer_gives_all_labelled_trees() {
        for n in 2..=5usize {
            let opts: Vec<Vec<usize>> = vec![(0..n).collect(); n - 2];
            let mut trees = BTreeSet::new();
            for_each_product(&opts, |seq| {
                let seq: Vec<usize> = seq.iter().map(|&&x| x).collect();
                let adj = prufer_decode(&seq, n);
                let mut edges: Vec<(usize, usize)> = adj
                    .iter()
                    .enumerate()
                    .flat_map(|(v, ws)| ws.iter().filter(move |&&w| v < w).map(move |&w| (v, w)))
                    .collect();
                edges.sort();
                assert_eq!(edges.len(), n - 1);
                trees.insert(edges);
                Ok(())
            })
            .unwrap();
            assert_eq!(trees.len(), n.pow(n as u32 - 2));
        }
    }

    #[test]
    fn paths_follow_the_tree() {
        let adj = prufer_decode(&[1, 1], 4);
        assert_eq!(tree_path(&adj, 0, 2), vec![0, 1, 2]);
        assert_eq!(tree_path(&adj, 3, 3), vec![3]);
    }
}
