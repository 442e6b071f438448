//! Ground truth for tests: finite interpretations, a SAT-based bounded model
//! search, query match enumeration, match classification on canonical
//! interpretations and the path unravelling into canonical models.
//!
//! Nothing here shares code with the tableau; the model search encodes the
//! semantics of the input KB directly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use varisat::{ExtendFormula, Lit, Solver};

use crate::dl::{Assertion, Concept, Kb, Name, RBox, Role, RoleConj, RoleSlot};
use crate::query::{Atom, Query, Term, Ucq};
use crate::rewrite::sub_query;
use crate::translate::BoolRole;

/// A finite interpretation over the domain `0..size`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteInterpretation {
    pub size: usize,
    pub concepts: BTreeMap<Name, BTreeSet<usize>>,
    pub roles: BTreeMap<Name, BTreeSet<(usize, usize)>>,
    pub individuals: BTreeMap<Name, usize>,
}

impl FiniteInterpretation {
    pub fn has_role(&self, r: &Role, d: usize, e: usize) -> bool {
        let (x, y) = if r.is_inverse() { (e, d) } else { (d, e) };
        self.roles.get(r.name()).is_some_and(|s| s.contains(&(x, y)))
    }

    pub fn conj_holds(&self, w: &RoleConj, d: usize, e: usize) -> bool {
        w.roles().iter().all(|r| self.has_role(r, d, e))
    }

    pub fn bool_role_holds(&self, w: &BoolRole, d: usize, e: usize) -> bool {
        w.eval(&|r| self.has_role(r, d, e))
    }

    /// Extension of a concept whose role slots are evaluated by `holds`.
    pub fn extension_with<R: RoleSlot>(
        &self,
        c: &Concept<R>,
        holds: &dyn Fn(&R, usize, usize) -> bool,
    ) -> BTreeSet<usize> {
        let all = || (0..self.size).collect::<BTreeSet<usize>>();
        let count = |d: usize, r: &R, f: &BTreeSet<usize>| (0..self.size).filter(|&e| holds(r, d, e) && f.contains(&e)).count();
        match c {
            Concept::Top => all(),
            Concept::Bottom => BTreeSet::new(),
            Concept::Atomic(a) => self.concepts.get(a).cloned().unwrap_or_default(),
            Concept::Not(d) => {
                let inner = self.extension_with(d, holds);
                all().difference(&inner).copied().collect()
            }
            Concept::And(cs) => cs.iter().fold(all(), |acc, d| acc.intersection(&self.extension_with(d, holds)).copied().collect()),
            Concept::Or(cs) => cs.iter().fold(BTreeSet::new(), |acc, d| acc.union(&self.extension_with(d, holds)).copied().collect()),
            Concept::Exists(r, d) => {
                let f = self.extension_with(d, holds);
                all().into_iter().filter(|&x| count(x, r, &f) >= 1).collect()
            }
            Concept::Forall(r, d) => {
                let f = self.extension_with(d, holds);
                all().into_iter().filter(|&x| (0..self.size).all(|e| !holds(r, x, e) || f.contains(&e))).collect()
            }
            Concept::AtLeast(n, r, d) => {
                let f = self.extension_with(d, holds);
                all().into_iter().filter(|&x| count(x, r, &f) as u64 >= *n).collect()
            }
            Concept::AtMost(n, r, d) => {
                let f = self.extension_with(d, holds);
                all().into_iter().filter(|&x| count(x, r, &f) as u64 <= *n).collect()
            }
        }
    }

    pub fn extension(&self, c: &Concept) -> BTreeSet<usize> {
        self.extension_with(c, &|w: &RoleConj, d, e| self.conj_holds(w, d, e))
    }

    pub fn bool_extension(&self, c: &Concept<BoolRole>) -> BTreeSet<usize> {
        self.extension_with(c, &|w: &BoolRole, d, e| self.bool_role_holds(w, d, e))
    }

    /// Closes role extensions under the inclusions and transitivity axioms.
    pub fn close_under(&mut self, rbox: &RBox) {
        loop {
            let mut changed = false;
            for (r, s) in rbox.inclusions() {
                let pairs: Vec<(usize, usize)> = self.pairs(r).into_iter().collect();
                for (d, e) in pairs {
                    changed |= self.insert_role(s, d, e);
                }
            }
            for t in rbox.transitive_names() {
                let pairs = self.roles.get(t).cloned().unwrap_or_default();
                for &(d, e) in &pairs {
                    for &(e2, f) in &pairs {
                        if e == e2 {
                            changed |= self.roles.entry(t.clone()).or_default().insert((d, f));
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Pairs in the extension of `r`.
    pub fn pairs(&self, r: &Role) -> BTreeSet<(usize, usize)> {
        let set = self.roles.get(r.name()).cloned().unwrap_or_default();
        if r.is_inverse() {
            set.into_iter().map(|(d, e)| (e, d)).collect()
        } else {
            set
        }
    }

    fn insert_role(&mut self, r: &Role, d: usize, e: usize) -> bool {
        let (x, y) = if r.is_inverse() { (e, d) } else { (d, e) };
        self.roles.entry(r.name().clone()).or_default().insert((x, y))
    }

    pub fn satisfies_rbox(&self, rbox: &RBox) -> bool {
        let inclusions = rbox.inclusions().iter().all(|(r, s)| self.pairs(r).iter().all(|&(d, e)| self.has_role(s, d, e)));
        let transitive = rbox.transitive_names().iter().all(|t| {
            let p = self.roles.get(t).cloned().unwrap_or_default();
            p.iter().all(|&(d, e)| p.iter().filter(|(e2, _)| *e2 == e).all(|&(_, f)| p.contains(&(d, f))))
        });
        inclusions && transitive
    }

    pub fn satisfies_assertion(&self, a: &Assertion) -> bool {
        let ind = |n: &Name| self.individuals.get(n).copied();
        match a {
            Assertion::Instance(x, c) => ind(x).is_some_and(|d| self.extension(c).contains(&d)),
            Assertion::Related(x, y, r) => matches!((ind(x), ind(y)), (Some(d), Some(e)) if self.has_role(r, d, e)),
            Assertion::NotRelated(x, y, r) => matches!((ind(x), ind(y)), (Some(d), Some(e)) if !self.has_role(r, d, e)),
            Assertion::Distinct(x, y) => matches!((ind(x), ind(y)), (Some(d), Some(e)) if d != e),
        }
    }

    pub fn is_model(&self, kb: &Kb) -> bool {
        self.satisfies_rbox(kb.rbox())
            && kb.tbox().iter().all(|g| self.extension(&g.sub).is_subset(&self.extension(&g.sup)))
            && kb.abox().iter().all(|a| self.satisfies_assertion(a))
    }
}

impl fmt::Display for FiniteInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain {}", self.size)?;
        for (a, d) in &self.individuals {
            writeln!(f, "individual {a} {d}")?;
        }
        for (c, ext) in &self.concepts {
            writeln!(f, "concept {c} {}", ext.iter().join(" "))?;
        }
        for (r, ext) in &self.roles {
            writeln!(f, "role {r} {}", ext.iter().map(|(d, e)| format!("{d},{e}")).join(" "))?;
        }
        Ok(())
    }
}

/// All evaluations `π` with `I ⊨^π q`, as maps from the terms of `q`.
pub fn enumerate_matches(q: &Query, i: &FiniteInterpretation) -> Vec<BTreeMap<Term, usize>> {
    let classes = q.classes();
    let mut fixed: Vec<Option<usize>> = vec![None; classes.len()];
    for (c, terms) in classes.iter().enumerate() {
        for t in terms.iter().filter(|t| t.is_ind()) {
            let Some(&d) = i.individuals.get(t.name()) else { return vec![] };
            if fixed[c].is_some_and(|e| e != d) {
                return vec![];
            }
            fixed[c] = Some(d);
        }
    }
    let mut concept_ext: HashMap<&Concept, BTreeSet<usize>> = HashMap::new();
    for a in q.atoms() {
        if let Atom::Concept(c, _) = a {
            concept_ext.entry(c).or_insert_with(|| i.extension(c));
        }
    }
    let atoms_of: Vec<Vec<&Atom>> = (0..classes.len())
        .map(|c| {
            q.atoms()
                .iter()
                .filter(|a| {
                    let ids: Vec<usize> = a.terms().iter().map(|t| q.class_id(t)).collect();
                    ids.contains(&c) && ids.iter().all(|&k| k <= c)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut assign: Vec<usize> = Vec::with_capacity(classes.len());
    fn go(
        q: &Query,
        i: &FiniteInterpretation,
        fixed: &[Option<usize>],
        atoms_of: &[Vec<&Atom>],
        concept_ext: &HashMap<&Concept, BTreeSet<usize>>,
        assign: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<Term, usize>>,
    ) {
        let c = assign.len();
        if c == fixed.len() {
            let m = q.classes().iter().enumerate().flat_map(|(k, ts)| ts.iter().map(move |t| (t.clone(), k)));
            out.push(m.map(|(t, k)| (t, assign[k])).collect());
            return;
        }
        let range: Vec<usize> = match fixed[c] {
            Some(d) => vec![d],
            None => (0..i.size).collect(),
        };
        for d in range {
            assign.push(d);
            let ok = atoms_of[c].iter().all(|a| match a {
                Atom::Concept(cc, t) => concept_ext[cc].contains(&assign[q.class_id(t)]),
                Atom::Role(r, t, u) => i.has_role(r, assign[q.class_id(t)], assign[q.class_id(u)]),
                Atom::Eq(..) => true,
            });
            if ok {
                go(q, i, fixed, atoms_of, concept_ext, assign, out);
            }
            assign.pop();
        }
    }
    go(q, i, &fixed, &atoms_of, &concept_ext, &mut assign, &mut out);
    out
}

pub fn satisfies_query(q: &Query, i: &FiniteInterpretation) -> bool {
    !enumerate_matches(q, i).is_empty()
}

pub fn satisfies_ucq(u: &Ucq, i: &FiniteInterpretation) -> bool {
    u.disjuncts().iter().any(|q| satisfies_query(q, i))
}

/// What the bounded search looks for.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchGoal<'a> {
    /// A model in which this query has no match.
    pub avoid: Option<&'a Ucq>,
    /// Distinct individuals denote distinct elements.
    pub una: bool,
}

/// A model of `kb` with at most `max_domain` elements, if one exists.
pub fn bounded_model_search(kb: &Kb, max_domain: usize) -> Option<FiniteInterpretation> {
    model_search(kb, SearchGoal::default(), max_domain)
}

/// A model of `kb` falsifying `u`, with at most `max_domain` elements.
pub fn find_countermodel(kb: &Kb, u: &Ucq, una: bool, max_domain: usize) -> Option<FiniteInterpretation> {
    model_search(kb, SearchGoal { avoid: Some(u), una }, max_domain)
}

/// Searches domain sizes `1..=max_domain` in turn.
pub fn model_search(kb: &Kb, goal: SearchGoal, max_domain: usize) -> Option<FiniteInterpretation> {
    (1..=max_domain).find_map(|n| Encoding::solve(kb, goal, n))
}

/// SAT encoding of "a model with exactly `n` elements".
struct Encoding<'a> {
    solver: Solver<'a>,
    n: usize,
    tru: Lit,
    atoms: HashMap<Name, Vec<Lit>>,
    roles: HashMap<Name, Vec<Lit>>,
    inds: BTreeMap<Name, Vec<Lit>>,
    memo: HashMap<Concept, Vec<Lit>>,
}

impl Encoding<'_> {
    fn solve(kb: &Kb, goal: SearchGoal, n: usize) -> Option<FiniteInterpretation> {
        let mut solver = Solver::new();
        let tru = solver.new_lit();
        solver.add_clause(&[tru]);
        let mut e = Encoding { solver, n, tru, atoms: HashMap::new(), roles: HashMap::new(), inds: BTreeMap::new(), memo: HashMap::new() };

        let mut individuals = kb.individuals();
        if let Some(u) = goal.avoid {
            individuals.extend(u.individuals());
        }
        for a in &individuals {
            let lits: Vec<Lit> = (0..n).map(|_| e.solver.new_lit()).collect();
            e.solver.add_clause(&lits);
            for (x, y) in lits.iter().tuple_combinations() {
                e.solver.add_clause(&[!*x, !*y]);
            }
            e.inds.insert(a.clone(), lits);
        }
        if goal.una {
            for (a, b) in individuals.iter().tuple_combinations() {
                e.distinct(a, b);
            }
        }
        for name in kb.rbox().role_names() {
            e.role_lits(&name);
        }
        for (r, s) in kb.rbox().inclusions() {
            for d in 0..n {
                for f in 0..n {
                    let (x, y) = (e.role(r, d, f), e.role(s, d, f));
                    e.solver.add_clause(&[!x, y]);
                }
            }
        }
        for t in kb.rbox().transitive_names() {
            let r = Role::from_name(t.clone(), false);
            for (d, f, g) in (0..n).cartesian_product(0..n).cartesian_product(0..n).map(|((a, b), c)| (a, b, c)) {
                let (x, y, z) = (e.role(&r, d, f), e.role(&r, f, g), e.role(&r, d, g));
                e.solver.add_clause(&[!x, !y, z]);
            }
        }
        for g in kb.tbox() {
            let (c, d) = (e.concept(&g.sub), e.concept(&g.sup));
            for k in 0..n {
                e.solver.add_clause(&[!c[k], d[k]]);
            }
        }
        for a in kb.abox() {
            e.assertion(a);
        }
        if let Some(u) = goal.avoid {
            for q in u.disjuncts() {
                e.forbid(q);
            }
        }

        if !e.solver.solve().ok()? {
            return None;
        }
        let model: BTreeSet<Lit> = e.solver.model()?.into_iter().collect();
        let val = |l: Lit| model.contains(&l);
        let mut out = FiniteInterpretation { size: n, ..Default::default() };
        for (a, lits) in &e.inds {
            out.individuals.insert(a.clone(), lits.iter().position(|&l| val(l)).expect("one-hot"));
        }
        let mut names: Vec<Name> = e.atoms.keys().cloned().collect();
        names.sort();
        for c in names {
            let ext = (0..n).filter(|&d| val(e.atoms[&c][d])).collect();
            out.concepts.insert(c, ext);
        }
        let mut names: Vec<Name> = e.roles.keys().cloned().collect();
        names.sort();
        for r in names {
            let ext = (0..n).cartesian_product(0..n).filter(|&(d, f)| val(e.roles[&r][d * n + f])).collect();
            out.roles.insert(r, ext);
        }
        Some(out)
    }

    fn role_lits(&mut self, name: &Name) -> &Vec<Lit> {
        if !self.roles.contains_key(name) {
            let lits = (0..self.n * self.n).map(|_| self.solver.new_lit()).collect();
            self.roles.insert(name.clone(), lits);
        }
        &self.roles[name]
    }

    fn role(&mut self, r: &Role, d: usize, e: usize) -> Lit {
        let n = self.n;
        let (x, y) = if r.is_inverse() { (e, d) } else { (d, e) };
        self.role_lits(r.name())[x * n + y]
    }

    fn and(&mut self, lits: &[Lit]) -> Lit {
        match lits {
            [] => self.tru,
            [l] => *l,
            _ => {
                let x = self.solver.new_lit();
                for &l in lits {
                    self.solver.add_clause(&[!x, l]);
                }
                let mut back: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                back.push(x);
                self.solver.add_clause(&back);
                x
            }
        }
    }

    /// A literal equivalent to "at least `k` of `lits`".
    fn at_least(&mut self, k: u64, lits: &[Lit]) -> Lit {
        let m = lits.len() as u64;
        if k == 0 {
            return self.tru;
        }
        if k > m {
            return !self.tru;
        }
        let x = self.solver.new_lit();
        for subset in lits.iter().combinations((m - k + 1) as usize) {
            let mut clause: Vec<Lit> = subset.into_iter().copied().collect();
            clause.push(!x);
            self.solver.add_clause(&clause);
        }
        for subset in lits.iter().combinations(k as usize) {
            let mut clause: Vec<Lit> = subset.into_iter().map(|&l| !l).collect();
            clause.push(x);
            self.solver.add_clause(&clause);
        }
        x
    }

    fn concept(&mut self, c: &Concept) -> Vec<Lit> {
        if let Some(v) = self.memo.get(c) {
            return v.clone();
        }
        let n = self.n;
        let out: Vec<Lit> = match c {
            Concept::Top => vec![self.tru; n],
            Concept::Bottom => vec![!self.tru; n],
            Concept::Atomic(a) => {
                if !self.atoms.contains_key(a) {
                    let lits = (0..n).map(|_| self.solver.new_lit()).collect();
                    self.atoms.insert(a.clone(), lits);
                }
                self.atoms[a].clone()
            }
            Concept::Not(d) => self.concept(d).into_iter().map(|l| !l).collect(),
            Concept::And(cs) => {
                let parts: Vec<Vec<Lit>> = cs.iter().map(|d| self.concept(d)).collect();
                (0..n).map(|k| self.and(&parts.iter().map(|p| p[k]).collect::<Vec<_>>())).collect()
            }
            Concept::Or(cs) => {
                let parts: Vec<Vec<Lit>> = cs.iter().map(|d| self.concept(d)).collect();
                (0..n).map(|k| !self.and(&parts.iter().map(|p| !p[k]).collect::<Vec<_>>())).collect()
            }
            Concept::Exists(w, d) => self.counting(1, w, d, false),
            Concept::Forall(w, d) => self.counting(1, w, d, true).into_iter().map(|l| !l).collect(),
            Concept::AtLeast(k, w, d) => self.counting(*k, w, d, false),
            Concept::AtMost(k, w, d) => self.counting(k + 1, w, d, false).into_iter().map(|l| !l).collect(),
        };
        self.memo.insert(c.clone(), out.clone());
        out
    }

    /// Per element: at least `k` `w`-neighbours in `d` (or in `¬d`).
    fn counting(&mut self, k: u64, w: &RoleConj, d: &Concept, negate: bool) -> Vec<Lit> {
        let f = self.concept(d);
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let mut succ = Vec::with_capacity(n);
            for y in 0..n {
                let mut lits: Vec<Lit> = w.roles().iter().map(|r| self.role(r, x, y)).collect();
                lits.push(if negate { !f[y] } else { f[y] });
                succ.push(self.and(&lits));
            }
            out.push(self.at_least(k, &succ));
        }
        out
    }

    fn distinct(&mut self, a: &Name, b: &Name) {
        for d in 0..self.n {
            let (x, y) = (self.inds[a][d], self.inds[b][d]);
            self.solver.add_clause(&[!x, !y]);
        }
    }

    fn assertion(&mut self, a: &Assertion) {
        let n = self.n;
        match a {
            Assertion::Instance(x, c) => {
                let lits = self.concept(c);
                for d in 0..n {
                    let i = self.inds[x][d];
                    self.solver.add_clause(&[!i, lits[d]]);
                }
            }
            Assertion::Related(x, y, r) | Assertion::NotRelated(x, y, r) => {
                let positive = matches!(a, Assertion::Related(..));
                for d in 0..n {
                    for e in 0..n {
                        let (i, j) = (self.inds[x][d], self.inds[y][e]);
                        let l = self.role(r, d, e);
                        self.solver.add_clause(&[!i, !j, if positive { l } else { !l }]);
                    }
                }
            }
            Assertion::Distinct(x, y) => self.distinct(x, y),
        }
    }

    /// No evaluation of the terms of `q` is a match.
    fn forbid(&mut self, q: &Query) {
        let classes = q.classes().to_vec();
        let concepts: Vec<(Concept, usize)> = q
            .atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Concept(c, t) => Some((c.clone(), q.class_id(t))),
                _ => None,
            })
            .collect();
        let lits: Vec<Vec<Lit>> = concepts.iter().map(|(c, _)| self.concept(c)).collect();
        let roles: Vec<(Role, usize, usize)> = q.role_atoms().map(|(r, t, u)| (r.clone(), q.class_id(t), q.class_id(u))).collect();
        for assign in (0..classes.len()).map(|_| 0..self.n).multi_cartesian_product() {
            let assign = if classes.is_empty() { vec![] } else { assign };
            let mut clause = Vec::new();
            for (c, terms) in classes.iter().enumerate() {
                for t in terms.iter().filter(|t| t.is_ind()) {
                    clause.push(!self.inds[t.name()][assign[c]]);
                }
            }
            for ((_, c), l) in concepts.iter().zip(&lits) {
                clause.push(!l[assign[*c]]);
            }
            for (r, t, u) in &roles {
                let l = self.role(r, assign[*t], assign[*u]);
                clause.push(!l);
            }
            self.solver.add_clause(&clause);
        }
    }
}

/// A canonical interpretation: every element is a pair of an individual and
/// a word, and `tail` maps it back to the interpretation it was unravelled
/// from.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    pub interp: FiniteInterpretation,
    pub elements: Vec<(Name, Vec<usize>)>,
    pub tail: Vec<usize>,
}

impl CanonicalModel {
    pub fn is_root(&self, d: usize) -> bool {
        self.elements[d].1.is_empty()
    }
}

/// Unravels `i` into a canonical interpretation for `kb`, truncated at words
/// of length `depth`.
pub fn unravel(i: &FiniteInterpretation, kb: &Kb, depth: usize) -> CanonicalModel {
    let rbox = kb.rbox();
    let ind_elems: BTreeSet<usize> = kb.individuals().iter().filter_map(|a| i.individuals.get(a).copied()).collect();
    let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); i.size];
    for pairs in i.roles.values() {
        for &(d, e) in pairs {
            nbrs[d].insert(e);
            nbrs[e].insert(d);
        }
    }
    let mut elements: Vec<(Name, Vec<usize>)> = Vec::new();
    let mut tail: Vec<usize> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    for a in kb.individuals() {
        let Some(&d) = i.individuals.get(&a) else { continue };
        elements.push((a, vec![]));
        tail.push(d);
        parent.push(None);
    }
    let mut k = 0;
    while k < elements.len() {
        let (a, w) = elements[k].clone();
        if w.len() < depth {
            // A path may reach an individual's element only from length two on.
            let succ: Vec<usize> =
                nbrs[tail[k]].iter().copied().filter(|e| !w.is_empty() || !ind_elems.contains(e)).collect();
            for (j, e) in succ.into_iter().enumerate() {
                let mut w2 = w.clone();
                w2.push(j);
                elements.push((a.clone(), w2));
                tail.push(e);
                parent.push(Some(k));
            }
        }
        k += 1;
    }

    let mut out = FiniteInterpretation { size: elements.len(), ..Default::default() };
    for (idx, (a, w)) in elements.iter().enumerate() {
        if w.is_empty() {
            out.individuals.insert(a.clone(), idx);
        }
    }
    for (c, ext) in &i.concepts {
        out.concepts.insert(c.clone(), (0..elements.len()).filter(|&x| ext.contains(&tail[x])).collect());
    }
    let roots: Vec<usize> = (0..elements.len()).filter(|&x| elements[x].1.is_empty()).collect();
    let mut base: BTreeMap<Name, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (r, ext) in &i.roles {
        let set = base.entry(r.clone()).or_default();
        for &x in &roots {
            for &y in &roots {
                if ext.contains(&(tail[x], tail[y])) {
                    set.insert((x, y));
                }
            }
        }
        for (x, p) in parent.iter().enumerate() {
            let Some(p) = *p else { continue };
            if ext.contains(&(tail[p], tail[x])) {
                set.insert((p, x));
            }
            if ext.contains(&(tail[x], tail[p])) {
                set.insert((x, p));
            }
        }
    }
    out.roles = base.clone();
    let base_interp = FiniteInterpretation { roles: base, ..out.clone() };
    let names: BTreeSet<Name> = i.roles.keys().cloned().chain(rbox.role_names()).collect();
    for r in names {
        let role = Role::from_name(r.clone(), false);
        if rbox.is_simple(&role) {
            continue;
        }
        for s in rbox.transitive_subroles(&role) {
            // Pairs of a sub-role, inverse or not, are pairs of `r` as given.
            let closure = transitive_closure(&base_interp.pairs(&s));
            out.roles.entry(r.clone()).or_default().extend(closure);
        }
    }
    CanonicalModel { interp: out, elements, tail }
}

fn transitive_closure(pairs: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut out = pairs.clone();
    loop {
        let extra: Vec<(usize, usize)> = out
            .iter()
            .flat_map(|&(a, b)| out.range((b, 0)..=(b, usize::MAX)).map(move |&(_, c)| (a, c)))
            .filter(|p| !out.contains(p))
            .collect();
        if extra.is_empty() {
            return out;
        }
        out.extend(extra);
    }
}

/// The strongest kind of a match on a canonical interpretation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchClass {
    None,
    Split,
    Forest,
    Tree,
}

/// Classifies a match `π` of `q` in a canonical model.
pub fn classify_match(pi: &BTreeMap<Term, usize>, q: &Query, m: &CanonicalModel) -> MatchClass {
    let el = |t: &Term| &m.elements[pi[t]];
    let split = q.role_atoms().all(|(_, t, u)| {
        let ((a, w), (b, w2)) = (el(t), el(u));
        (w.is_empty() && w2.is_empty()) || a == b
    });
    if !split {
        return MatchClass::None;
    }
    let roots: BTreeSet<Term> = q.terms().iter().filter(|t| m.is_root(pi[*t])).cloned().collect();
    for tr in &roots {
        let sq = sub_query(q, tr, &roots);
        let mut uf: BTreeMap<usize, usize> = BTreeMap::new();
        fn find(uf: &mut BTreeMap<usize, usize>, x: usize) -> usize {
            let p = *uf.get(&x).unwrap_or(&x);
            if p == x {
                x
            } else {
                let r = find(uf, p);
                uf.insert(x, r);
                r
            }
        }
        let edges: BTreeSet<(usize, usize)> = sq
            .role_atoms()
            .map(|(_, t, u)| (pi[t].min(pi[u]), pi[t].max(pi[u])))
            .collect();
        for (x, y) in edges {
            if x == y {
                return MatchClass::Split;
            }
            let (rx, ry) = (find(&mut uf, x), find(&mut uf, y));
            if rx == ry {
                return MatchClass::Split;
            }
            uf.insert(rx, ry);
        }
    }
    let trees: BTreeSet<&Name> = q.terms().iter().map(|t| &el(t).0).collect();
    if trees.len() == 1 {
        MatchClass::Tree
    } else {
        MatchClass::Forest
    }
}
