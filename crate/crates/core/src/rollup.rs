//! Rolling up tree-shaped queries into concepts, grounding forest rewritings
//! and collecting the tree and ground queries of a query.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::dl::{Concept, Kb, Name, RBox, RoleConj};
use crate::error::{Error, Result};
use crate::query::{Atom, Query, Term};
use crate::rewrite::shape::{root_classes, sub_query, tree_mapping_at, TreeMapping};
use crate::rewrite::{rewrite, Candidate, RewriteConfig};

/// `con(Q, t)`: the query concept of a tree-shaped query rooted at `root`.
pub fn query_concept(q: &Query, root: &Term) -> Result<Concept> {
    let tm = tree_mapping_at(q, root).ok_or(Error::NotTreeShaped)?;
    Ok(concept_at(q, &tm, tm.root))
}

fn concept_at(q: &Query, tm: &TreeMapping, class: usize) -> Concept {
    let mut parts: Vec<Concept> = q
        .atoms()
        .iter()
        .filter_map(|a| match a {
            Atom::Concept(c, t) if q.class_id(t) == class => Some(c.clone()),
            _ => None,
        })
        .collect();
    for &child in tm.children.get(&class).map(Vec::as_slice).unwrap_or(&[]) {
        let w = RoleConj::new(q.roles_between(class, child)).expect("tree edges carry a role atom");
        parts.push(Concept::exists(w, concept_at(q, tm, child)));
    }
    Concept::and(parts)
}

/// A ground mapping: root terms to individual terms.
pub type GroundMapping = BTreeMap<Term, Term>;

/// All maps from the root classes of `q` into `individuals` that fix
/// individuals and are injective on classes.
pub fn ground_mappings(q: &Query, roots: &BTreeSet<Term>, individuals: &BTreeSet<Name>) -> Vec<GroundMapping> {
    let classes: Vec<usize> = root_classes(q, roots).into_iter().collect();
    let mut fixed: BTreeMap<usize, Name> = BTreeMap::new();
    for &c in &classes {
        let inds: BTreeSet<&Name> = q.classes()[c].iter().filter(|t| t.is_ind()).map(Term::name).collect();
        match inds.len() {
            0 => {}
            1 => {
                let a = inds.into_iter().next().unwrap();
                if !individuals.contains(a) {
                    return vec![];
                }
                fixed.insert(c, a.clone());
            }
            _ => return vec![],
        }
    }
    let mut out = Vec::new();
    let mut assignment = fixed.clone();
    let free: Vec<usize> = classes.iter().copied().filter(|c| !fixed.contains_key(c)).collect();
    fn go(
        q: &Query,
        free: &[usize],
        individuals: &BTreeSet<Name>,
        assignment: &mut BTreeMap<usize, Name>,
        out: &mut Vec<GroundMapping>,
    ) {
        let Some((&c, rest)) = free.split_first() else {
            let map = assignment
                .iter()
                .flat_map(|(&c, a)| q.classes()[c].iter().map(move |t| (t.clone(), Term::Ind(a.clone()))))
                .collect();
            out.push(map);
            return;
        };
        for a in individuals {
            if assignment.values().any(|b| b == a) {
                continue;
            }
            assignment.insert(c, a.clone());
            go(q, rest, individuals, assignment, out);
            assignment.remove(&c);
        }
    }
    if fixed.values().collect::<BTreeSet<_>>().len() != fixed.len() {
        return vec![];
    }
    go(q, &free, individuals, &mut assignment, &mut out);
    out
}

/// `ground(Q, R, τ)`: roots replaced by individuals and every sub-query by
/// the atom of its query concept at the root's individual.
pub fn ground_query(cand: &Candidate, tau: &GroundMapping) -> Result<Query> {
    let q = &cand.query;
    let mut atoms = Vec::new();
    for c in root_classes(q, &cand.roots) {
        let t = &q.classes()[c][0];
        let concept = query_concept(&sub_query(q, t, &cand.roots), t)?;
        if concept != Concept::Top {
            atoms.push(Atom::Concept(concept, tau[t].clone()));
        }
    }
    for (r, t, u) in q.role_atoms() {
        if cand.roots.contains(t) && cand.roots.contains(u) {
            atoms.push(Atom::Role(r.clone(), tau[t].clone(), tau[u].clone()));
        }
    }
    if atoms.is_empty() {
        let first = cand.roots.iter().next().ok_or(Error::NotTreeShaped)?;
        atoms.push(Atom::Concept(Concept::Top, tau[first].clone()));
    }
    Ok(Query::build(atoms))
}

/// The tree queries (as concepts) and ground queries of a query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rollup {
    pub trees: BTreeSet<Concept>,
    pub groundings: BTreeSet<Query>,
}

impl Rollup {
    /// Adds another query's tree and ground queries.
    pub fn merge(&mut self, other: Rollup) {
        self.trees.extend(other.trees);
        self.groundings.extend(other.groundings);
    }

    /// An equivalent, smaller disjunction for the entailment check: role
    /// conjunctions are minimised under `⊑*`, concept atoms on the same
    /// individual are conjoined, and any tree or ground query that implies
    /// another one (or implies a tree query somewhere below) is dropped.
    pub fn simplify(&self, rbox: &RBox) -> Rollup {
        let trees: Vec<Concept> =
            self.trees.iter().map(|c| normalize(c, rbox)).collect::<BTreeSet<_>>().into_iter().collect();
        let trees = antichain(trees, |a, b| implies_somewhere(rbox, a, b));
        let groundings: Vec<Query> = self
            .groundings
            .iter()
            .map(|g| normalize_ground(g, rbox))
            .filter(|g| {
                !g.atoms().iter().any(|a| match a {
                    Atom::Concept(c, _) => trees.iter().any(|t| implies_somewhere(rbox, c, t)),
                    _ => false,
                })
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let groundings = antichain(groundings, |a, b| ground_implies(rbox, a, b));
        Rollup { trees: trees.into_iter().collect(), groundings: groundings.into_iter().collect() }
    }
}

/// Keeps the weakest elements: `x` is dropped when it implies a kept `y`.
fn antichain<T: Clone>(items: Vec<T>, implies: impl Fn(&T, &T) -> bool) -> Vec<T> {
    let mut kept: Vec<T> = Vec::new();
    for x in items {
        if kept.iter().any(|k| implies(&x, k)) {
            continue;
        }
        kept.retain(|k| !implies(k, &x));
        kept.push(x);
    }
    kept
}

/// Removes roles implied by another member of the conjunction.
pub fn minimize_conj(w: &RoleConj, rbox: &RBox) -> RoleConj {
    let roles = w.roles();
    let keep = roles.iter().filter(|r2| {
        !roles.iter().any(|r| {
            r != *r2 && rbox.is_subrole(r, r2) && (!rbox.is_subrole(r2, r) || r < *r2)
        })
    });
    RoleConj::new(keep.cloned()).expect("a minimal element survives")
}

fn normalize(c: &Concept, rbox: &RBox) -> Concept {
    match c {
        Concept::And(parts) => Concept::and(parts.iter().map(|p| normalize(p, rbox))),
        Concept::Exists(w, d) => Concept::exists(minimize_conj(w, rbox), normalize(d, rbox)),
        other => other.clone(),
    }
}

fn normalize_ground(g: &Query, rbox: &RBox) -> Query {
    let mut per_ind: BTreeMap<Term, Vec<Concept>> = BTreeMap::new();
    let mut atoms = Vec::new();
    for a in g.atoms() {
        match a {
            Atom::Concept(c, t) => per_ind.entry(t.clone()).or_default().push(normalize(c, rbox)),
            other => atoms.push(other.clone()),
        }
    }
    for (t, cs) in per_ind {
        let c = Concept::and(cs);
        atoms.push(Atom::Concept(c, t));
    }
    Query::build(atoms)
}

fn conjuncts(c: &Concept) -> &[Concept] {
    match c {
        Concept::And(parts) => parts,
        Concept::Top => &[],
        other => std::slice::from_ref(other),
    }
}

fn conj_implies(rbox: &RBox, w: &RoleConj, w2: &RoleConj) -> bool {
    w2.roles().iter().all(|r2| w.roles().iter().any(|r| rbox.is_subrole(r, r2)))
}

/// A sufficient test for `c ⊑ d` on conjunctions of existentials: every
/// conjunct of `d` is matched by a conjunct of `c`.
pub fn el_subsumed(rbox: &RBox, c: &Concept, d: &Concept) -> bool {
    if *c == Concept::Bottom {
        return true;
    }
    conjuncts(d).iter().all(|dj| match dj {
        Concept::Exists(w2, d2) => conjuncts(c).iter().any(|ci| match ci {
            Concept::Exists(w, c2) => conj_implies(rbox, w, w2) && el_subsumed(rbox, c2, d2),
            _ => false,
        }),
        other => conjuncts(c).contains(other),
    })
}

/// Whether `c` implies that some element (this one or one reached through
/// existentials) is an instance of `d`.
pub fn implies_somewhere(rbox: &RBox, c: &Concept, d: &Concept) -> bool {
    el_subsumed(rbox, c, d)
        || conjuncts(c).iter().any(|ci| match ci {
            Concept::Exists(_, c2) => implies_somewhere(rbox, c2, d),
            _ => false,
        })
}

/// A sufficient test for `g ⊨ h` between ground queries.
fn ground_implies(rbox: &RBox, g: &Query, h: &Query) -> bool {
    h.atoms().iter().all(|b| match b {
        Atom::Concept(d, t) => g.atoms().iter().any(|a| matches!(a, Atom::Concept(c, u) if u == t && el_subsumed(rbox, c, d))),
        Atom::Role(r, t, u) => g.role_atoms().any(|(s, t2, u2)| {
            (t2 == t && u2 == u && rbox.is_subrole(s, r)) || (t2 == u && u2 == t && rbox.is_subrole(&s.inv(), r))
        }),
        Atom::Eq(t, u) => t == u,
    })
}

/// Rolls up forest candidates: one tree concept per root-free candidate and
/// all groundings of the others.
pub fn rollup_candidates(cands: &[Candidate], kb: &Kb) -> Result<Rollup> {
    let individuals = kb.individuals();
    let parts: Vec<Result<Rollup>> = cands
        .par_iter()
        .map(|c| {
            let mut r = Rollup::default();
            if c.roots.is_empty() {
                let root = &c.query.classes()[0][0];
                r.trees.insert(query_concept(&c.query, root)?);
            } else {
                for tau in ground_mappings(&c.query, &c.roots, &individuals) {
                    r.groundings.insert(ground_query(c, &tau)?);
                }
            }
            Ok(r)
        })
        .collect();
    let mut out = Rollup::default();
    for p in parts {
        out.merge(p?);
    }
    Ok(out)
}

/// `trees(Q)` and `groundings(Q)` for a connected query.
pub fn rollup_query(q: &Query, kb: &Kb, cfg: &RewriteConfig) -> Result<Rollup> {
    let stages = rewrite(q, kb, cfg)?;
    rollup_candidates(&stages.forest, kb)
}

/// `trees(Q)`: the query concepts of root-free forest rewritings.
pub fn trees_of(q: &Query, kb: &Kb, cfg: &RewriteConfig) -> Result<BTreeSet<Concept>> {
    Ok(rollup_query(q, kb, cfg)?.trees)
}

/// `groundings(Q)`: the ground queries of forest rewritings with roots.
pub fn groundings_of(q: &Query, kb: &Kb, cfg: &RewriteConfig) -> Result<BTreeSet<Query>> {
    Ok(rollup_query(q, kb, cfg)?.groundings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{name, Role};

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn leaf_query_rolls_up_to_its_concept() {
        let q = Query::build([Atom::concept(Concept::atomic("A"), v("v"))]);
        assert_eq!(query_concept(&q, &v("v")).unwrap(), Concept::atomic("A"));
    }

    #[test]
    fn role_conjunctions_are_read_parent_to_child() {
        let q = Query::build([
            Atom::role(Role::named("r"), v("x"), v("y")),
            Atom::role(Role::named("s"), v("y"), v("x")),
        ]);
        let w = RoleConj::new([Role::named("r"), Role::named("s").inv()]).unwrap();
        assert_eq!(query_concept(&q, &v("x")).unwrap(), Concept::exists(w, Concept::Top));
    }

    #[test]
    fn cyclic_query_is_rejected() {
        let q = Query::build([
            Atom::role(Role::named("r"), v("x"), v("y")),
            Atom::role(Role::named("r"), v("y"), v("z")),
            Atom::role(Role::named("r"), v("z"), v("x")),
        ]);
        assert!(matches!(query_concept(&q, &v("x")), Err(Error::NotTreeShaped)));
    }

    #[test]
    fn mappings_are_injective_on_classes() {
        let q = Query::build([Atom::role(Role::named("r"), v("x"), v("y"))]);
        let roots = BTreeSet::from([v("x"), v("y")]);
        let two: BTreeSet<Name> = [name("a"), name("b")].into();
        assert_eq!(ground_mappings(&q, &roots, &two).len(), 2);
        let one: BTreeSet<Name> = [name("a")].into();
        assert!(ground_mappings(&q, &roots, &one).is_empty());
    }

    #[test]
    fn individuals_are_fixed() {
        let a = Term::ind("a");
        let q = Query::build([Atom::role(Role::named("r"), a.clone(), v("y"))]);
        let roots = BTreeSet::from([a.clone(), v("y")]);
        let inds: BTreeSet<Name> = [name("a"), name("b"), name("c")].into();
        let maps = ground_mappings(&q, &roots, &inds);
        assert_eq!(maps.len(), 2);
        assert!(maps.iter().all(|m| m[&a] == a));
    }
}
