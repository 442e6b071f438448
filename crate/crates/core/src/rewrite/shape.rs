//! Shape analysis: reachability from roots, root splittings, sub-queries,
//! tree mappings and forest shape.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::dl::Concept;
use crate::query::{Atom, Query, Term};

/// Classes (by index) of the terms in `roots`.
pub fn root_classes(q: &Query, roots: &BTreeSet<Term>) -> BTreeSet<usize> {
    roots.iter().filter(|t| q.contains_term(t)).map(|t| q.class_id(t)).collect()
}

/// Classes reachable from the class of `t` without entering another root class.
pub fn reach_classes(q: &Query, t: &Term, roots: &BTreeSet<Term>) -> BTreeSet<usize> {
    let start = q.class_id(t);
    let rc = root_classes(q, roots);
    let adj = q.class_adjacency();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for &d in &adj[c] {
            if (d == start || !rc.contains(&d)) && seen.insert(d) {
                queue.push_back(d);
            }
        }
    }
    seen
}

/// `reach(t)`: terms connected to `t` by role-atom paths that only pass
/// through roots equivalent to `t`.
pub fn reach(q: &Query, t: &Term, roots: &BTreeSet<Term>) -> BTreeSet<Term> {
    reach_classes(q, t, roots)
        .into_iter()
        .flat_map(|c| q.classes()[c].iter().cloned())
        .collect()
}

/// Whether `roots` is a root splitting for `q`: it contains all individuals,
/// is closed under `≈`, and non-equivalent roots reach disjoint term sets.
pub fn is_root_splitting(q: &Query, roots: &BTreeSet<Term>) -> bool {
    if roots.iter().any(|t| !q.contains_term(t)) {
        return false;
    }
    if q.inds().any(|a| !roots.contains(a)) {
        return false;
    }
    let rc = root_classes(q, roots);
    for &c in &rc {
        if q.classes()[c].iter().any(|t| !roots.contains(t)) {
            return false;
        }
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &rc {
        let rep = &q.classes()[c][0];
        for d in reach_classes(q, rep, roots) {
            if let Some(prev) = owner.insert(d, c) {
                if prev != c {
                    return false;
                }
            }
        }
    }
    true
}

/// All terms of the given classes.
pub fn class_terms(q: &Query, classes: &BTreeSet<usize>) -> BTreeSet<Term> {
    classes.iter().flat_map(|&c| q.classes()[c].iter().cloned()).collect()
}

/// `sq(Q, t)`: atoms over `reach(t)` without loops at the root. An otherwise
/// empty sub-query is represented by `⊤(t)`.
pub fn sub_query(q: &Query, t: &Term, roots: &BTreeSet<Term>) -> Query {
    let region = reach_classes(q, t, roots);
    let root = q.class_id(t);
    let atoms: Vec<Atom> = q
        .atoms()
        .iter()
        .filter(|a| a.terms().iter().all(|u| region.contains(&q.class_id(u))))
        .filter(|a| match a {
            Atom::Role(_, u, v) => !(q.class_id(u) == root && q.class_id(v) == root),
            _ => true,
        })
        .cloned()
        .collect();
    if atoms.is_empty() {
        Query::build([Atom::Concept(Concept::Top, t.clone())])
    } else {
        Query::build(atoms)
    }
}

/// A tree mapping: every term gets the address of its `≈`-class in a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMapping {
    pub address: BTreeMap<Term, Vec<u32>>,
    /// Children of each class in the tree, by class index.
    pub children: BTreeMap<usize, Vec<usize>>,
    pub root: usize,
}

/// A tree mapping with the class of `root` at `ε`, if one exists.
///
/// A query is mapped to a tree when its class graph (role atoms between
/// `≈`-classes) is connected, acyclic and loop-free.
pub fn tree_mapping_at(q: &Query, root: &Term) -> Option<TreeMapping> {
    if q.inds().count() > 1 {
        return None;
    }
    if let Some(a) = q.inds().next() {
        if !q.same_class(a, root) {
            return None;
        }
    }
    let adj = q.class_adjacency();
    let n = q.classes().len();
    if (0..n).any(|c| adj[c].contains(&c)) {
        return None;
    }
    let edges: usize = adj.iter().map(BTreeSet::len).sum::<usize>() / 2;
    if edges + 1 != n {
        return None;
    }
    let r = q.class_id(root);
    let mut addr_of: BTreeMap<usize, Vec<u32>> = BTreeMap::from([(r, vec![])]);
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut queue = VecDeque::from([r]);
    while let Some(c) = queue.pop_front() {
        let base = addr_of[&c].clone();
        let mut k = 0u32;
        for &d in &adj[c] {
            if addr_of.contains_key(&d) {
                continue;
            }
            let mut a = base.clone();
            a.push(k);
            k += 1;
            addr_of.insert(d, a);
            children.entry(c).or_default().push(d);
            queue.push_back(d);
        }
    }
    if addr_of.len() != n {
        return None;
    }
    let address = q
        .terms()
        .iter()
        .map(|t| (t.clone(), addr_of[&q.class_id(t)].clone()))
        .collect();
    Some(TreeMapping { address, children, root: r })
}

/// A witness tree mapping rooted at the individual, or at the least term.
pub fn tree_mapping(q: &Query) -> Option<TreeMapping> {
    let root = q.inds().next().cloned().unwrap_or_else(|| q.terms()[0].clone());
    tree_mapping_at(q, &root)
}

pub fn is_tree_shaped(q: &Query) -> bool {
    tree_mapping(q).is_some()
}

/// Forest shape: tree-shaped when there are no roots, otherwise every
/// sub-query is tree-shaped.
pub fn is_forest_shaped(q: &Query, roots: &BTreeSet<Term>) -> bool {
    if roots.is_empty() {
        return is_tree_shaped(q);
    }
    let rc = root_classes(q, roots);
    rc.iter().all(|&c| {
        let t = &q.classes()[c][0];
        tree_mapping_at(&sub_query(q, t, roots), t).is_some()
    })
}
