//! Conjunctive queries: terms, atoms, `≈`-classes, the `⋿` relation,
//! connectivity, cyclicity and the CNF of unions of queries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::dl::{name, Concept, Name, Role};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Ind(Name),
}

impl Term {
    pub fn var(n: &str) -> Term {
        Term::Var(name(n))
    }

    pub fn ind(n: &str) -> Term {
        Term::Ind(name(n))
    }

    pub fn name(&self) -> &Name {
        match self {
            Term::Var(n) | Term::Ind(n) => n,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ind(&self) -> bool {
        matches!(self, Term::Ind(_))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) => write!(f, "?{n}"),
            Term::Ind(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Concept(Concept, Term),
    Role(Role, Term, Term),
    Eq(Term, Term),
}

impl Atom {
    pub fn concept(c: Concept, t: Term) -> Atom {
        Atom::Concept(c, t)
    }

    pub fn role(r: Role, t: Term, u: Term) -> Atom {
        Atom::Role(r, t, u)
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Concept(_, t) => vec![t],
            Atom::Role(_, t, u) | Atom::Eq(t, u) => vec![t, u],
        }
    }

    pub fn map_terms<F: FnMut(&Term) -> Term>(&self, mut f: F) -> Atom {
        match self {
            Atom::Concept(c, t) => Atom::Concept(c.clone(), f(t)),
            Atom::Role(r, t, u) => Atom::Role(r.clone(), f(t), f(u)),
            Atom::Eq(t, u) => Atom::Eq(f(t), f(u)),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Concept(c, t) => write!(f, "{c:?}({t:?})"),
            Atom::Role(r, t, u) => write!(f, "{r}({t:?},{u:?})"),
            Atom::Eq(t, u) => write!(f, "{t:?}≈{u:?}"),
        }
    }
}

/// A non-empty set of atoms with its `≈`-partition precomputed.
#[derive(Clone)]
pub struct Query {
    atoms: BTreeSet<Atom>,
    terms: Vec<Term>,
    class_of: BTreeMap<Term, usize>,
    classes: Vec<Vec<Term>>,
    concept_index: HashSet<(Concept, usize)>,
    role_index: HashSet<(Role, usize, usize)>,
}

impl PartialEq for Query {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for Query {}

impl PartialOrd for Query {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Query {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.atoms.cmp(&other.atoms)
    }
}

impl std::hash::Hash for Query {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.atoms.hash(state)
    }
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms.iter()).finish()
    }
}

/// Minimal union-find over dense indices.
pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

impl Query {
    pub fn new<I: IntoIterator<Item = Atom>>(atoms: I) -> Result<Query> {
        let atoms: BTreeSet<Atom> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::Semantic("a query needs at least one atom".into()));
        }
        Ok(Query::from_set(atoms))
    }

    /// Panics on an empty atom set; for internal rewriting code where
    /// emptiness is impossible by construction.
    pub fn build<I: IntoIterator<Item = Atom>>(atoms: I) -> Query {
        Query::new(atoms).expect("query construction from a non-empty atom set")
    }

    fn from_set(atoms: BTreeSet<Atom>) -> Query {
        let terms: Vec<Term> = atoms
            .iter()
            .flat_map(|a| a.terms().into_iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&Term, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut uf = UnionFind::new(terms.len());
        for a in &atoms {
            if let Atom::Eq(t, u) = a {
                uf.union(index[t], index[u]);
            }
        }
        // Roots are minimal indices, so classes come out ordered by their
        // smallest term.
        let mut root_to_class: BTreeMap<usize, usize> = BTreeMap::new();
        let mut classes: Vec<Vec<Term>> = Vec::new();
        let mut class_of = BTreeMap::new();
        for (i, t) in terms.iter().enumerate() {
            let root = uf.find(i);
            let id = *root_to_class.entry(root).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[id].push(t.clone());
            class_of.insert(t.clone(), id);
        }
        let mut concept_index = HashSet::new();
        let mut role_index = HashSet::new();
        for a in &atoms {
            match a {
                Atom::Concept(c, t) => {
                    concept_index.insert((c.clone(), class_of[t]));
                }
                Atom::Role(r, t, u) => {
                    role_index.insert((r.clone(), class_of[t], class_of[u]));
                    role_index.insert((r.inv(), class_of[u], class_of[t]));
                }
                Atom::Eq(..) => {}
            }
        }
        Query { atoms, terms, class_of, classes, concept_index, role_index }
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    /// `|Q|`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn vars(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.is_var())
    }

    pub fn inds(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.is_ind())
    }

    pub fn contains_term(&self, t: &Term) -> bool {
        self.class_of.contains_key(t)
    }

    /// Index of the `≈`-class of `t`. Panics if `t` does not occur.
    pub fn class_id(&self, t: &Term) -> usize {
        self.class_of[t]
    }

    pub fn classes(&self) -> &[Vec<Term>] {
        &self.classes
    }

    pub fn class(&self, t: &Term) -> &[Term] {
        &self.classes[self.class_of[t]]
    }

    pub fn same_class(&self, t: &Term, u: &Term) -> bool {
        match (self.class_of.get(t), self.class_of.get(u)) {
            (Some(a), Some(b)) => a == b,
            _ => t == u,
        }
    }

    pub fn role_atoms(&self) -> impl Iterator<Item = (&Role, &Term, &Term)> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::Role(r, t, u) => Some((r, t, u)),
            _ => None,
        })
    }

    pub fn role_atom_count(&self) -> usize {
        self.role_atoms().count()
    }

    /// The `⋿` relation.
    pub fn din(&self, atom: &Atom) -> bool {
        let cls = |t: &Term| self.class_of.get(t).copied();
        match atom {
            Atom::Concept(c, t) => match cls(t) {
                Some(i) => self.concept_index.contains(&(c.clone(), i)),
                None => false,
            },
            Atom::Role(r, t, u) => match (cls(t), cls(u)) {
                (Some(i), Some(j)) => self.role_index.contains(&(r.clone(), i, j)),
                _ => false,
            },
            Atom::Eq(t, u) => t == u || matches!((cls(t), cls(u)), (Some(i), Some(j)) if i == j),
        }
    }

    /// Roles `r` with `r(t, u) ⋿ Q`, read from the class of `t` to the class of `u`.
    pub fn roles_between(&self, ct: usize, cu: usize) -> BTreeSet<Role> {
        self.role_index
            .iter()
            .filter(|(_, i, j)| *i == ct && *j == cu)
            .map(|(r, _, _)| r.clone())
            .collect()
    }

    /// Undirected adjacency between `≈`-classes induced by role atoms
    /// (self-loops included).
    pub fn class_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.classes.len()];
        for (_, t, u) in self.role_atoms() {
            let (i, j) = (self.class_of[t], self.class_of[u]);
            adj[i].insert(j);
            adj[j].insert(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Connected components; role and equality atoms link their terms.
    pub fn components(&self) -> Vec<Query> {
        let index: BTreeMap<&Term, usize> =
            self.terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut uf = UnionFind::new(self.terms.len());
        for a in &self.atoms {
            if let Atom::Role(_, t, u) | Atom::Eq(t, u) = a {
                uf.union(index[t], index[u]);
            }
        }
        let mut groups: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
        for a in &self.atoms {
            let t = a.terms()[0];
            groups.entry(uf.find(index[t])).or_default().push(a.clone());
        }
        let mut out: Vec<Query> = groups.into_values().map(Query::build).collect();
        out.sort();
        out
    }

    /// True iff there are terms `t1 … tn`, `n > 3`, linked consecutively by role
    /// atoms (up to `⋿`), with `t1 = tn` and `t1 … t(n-1)` pairwise distinct.
    pub fn is_cyclic(&self) -> bool {
        let adj = self.class_adjacency();
        let n = self.terms.len();
        let linked = |a: usize, b: usize| {
            adj[self.class_of[&self.terms[a]]].contains(&self.class_of[&self.terms[b]])
        };
        fn search(
            start: usize,
            cur: usize,
            len: usize,
            used: &mut Vec<bool>,
            n: usize,
            linked: &dyn Fn(usize, usize) -> bool,
        ) -> bool {
            for next in 0..n {
                if !linked(cur, next) {
                    continue;
                }
                if next == start && len >= 3 {
                    return true;
                }
                if !used[next] {
                    used[next] = true;
                    if search(start, next, len + 1, used, n, linked) {
                        return true;
                    }
                    used[next] = false;
                }
            }
            false
        }
        (0..n).any(|s| {
            let mut used = vec![false; n];
            used[s] = true;
            search(s, s, 1, &mut used, n, &linked)
        })
    }

    pub fn rename(&self, map: &BTreeMap<Term, Term>) -> Query {
        Query::build(
            self.atoms
                .iter()
                .map(|a| a.map_terms(|t| map.get(t).cloned().unwrap_or_else(|| t.clone()))),
        )
    }

    pub fn with_atoms<I: IntoIterator<Item = Atom>>(&self, extra: I) -> Query {
        Query::build(self.atoms.iter().cloned().chain(extra))
    }

    pub fn concept_names(&self, out: &mut BTreeSet<Name>) {
        for a in &self.atoms {
            if let Atom::Concept(c, _) = a {
                c.concept_names(out);
            }
        }
    }

    pub fn role_names(&self, out: &mut BTreeSet<Name>) {
        for a in &self.atoms {
            match a {
                Atom::Concept(c, _) => c.role_names(out),
                Atom::Role(r, _, _) => {
                    out.insert(r.name().clone());
                }
                Atom::Eq(..) => {}
            }
        }
    }
}

/// A union of Boolean conjunctive queries with variables named apart.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ucq {
    disjuncts: Vec<Query>,
}

impl Ucq {
    /// Renames variables of later disjuncts that clash with earlier ones.
    pub fn new(disjuncts: Vec<Query>) -> Result<Ucq> {
        if disjuncts.is_empty() {
            return Err(Error::Semantic("a union of queries needs a disjunct".into()));
        }
        let mut seen: BTreeSet<Term> = BTreeSet::new();
        let mut out = Vec::new();
        for (i, q) in disjuncts.into_iter().enumerate() {
            let mut map = BTreeMap::new();
            for v in q.vars() {
                if seen.contains(v) {
                    let mut k = 0;
                    let fresh = loop {
                        let cand = Term::Var(name(&format!("{}~{}", v.name(), i + k)));
                        if !seen.contains(&cand) && !q.contains_term(&cand) {
                            break cand;
                        }
                        k += 1;
                    };
                    map.insert(v.clone(), fresh);
                }
            }
            let q = if map.is_empty() { q } else { q.rename(&map) };
            seen.extend(q.vars().cloned());
            out.push(q);
        }
        Ok(Ucq { disjuncts: out })
    }

    pub fn single(q: Query) -> Ucq {
        Ucq { disjuncts: vec![q] }
    }

    pub fn disjuncts(&self) -> &[Query] {
        &self.disjuncts
    }

    pub fn individuals(&self) -> BTreeSet<Name> {
        self.disjuncts
            .iter()
            .flat_map(|q| q.inds().map(|t| t.name().clone()).collect::<Vec<_>>())
            .collect()
    }

    pub fn rename(&self, map: &BTreeMap<Term, Term>) -> Ucq {
        Ucq { disjuncts: self.disjuncts.iter().map(|q| q.rename(map)).collect() }
    }

    /// Conjunctive normal form over connected components: one conjunct per
    /// choice of a component from every disjunct.
    pub fn to_cnf(&self) -> Vec<Ucq> {
        let comps: Vec<Vec<Query>> = self.disjuncts.iter().map(Query::components).collect();
        let mut acc: Vec<Vec<Query>> = vec![vec![]];
        for cs in &comps {
            let mut next = Vec::new();
            for prefix in &acc {
                for c in cs {
                    let mut v = prefix.clone();
                    v.push(c.clone());
                    next.push(v);
                }
            }
            acc = next;
        }
        acc.into_iter().map(|disjuncts| Ucq { disjuncts }).collect()
    }
}

/// A query with answer variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnswerQuery {
    query: Query,
    answer_vars: Vec<Term>,
}

impl AnswerQuery {
    pub fn new(query: Query, answer_vars: Vec<Term>) -> Result<AnswerQuery> {
        for v in &answer_vars {
            if !v.is_var() || !query.contains_term(v) {
                return Err(Error::Semantic(format!(
                    "answer variable {v:?} does not occur in the query"
                )));
            }
        }
        Ok(AnswerQuery { query, answer_vars })
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn answer_vars(&self) -> &[Term] {
        &self.answer_vars
    }
}
