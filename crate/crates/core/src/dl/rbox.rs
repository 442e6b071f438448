//! Role hierarchies: `⊑*`, `Trans_R`, simplicity, and the concept closure `cl(C, R)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::concept::Concept;
use super::role::{Name, Role, RoleConj};

/// Role inclusions plus the set of transitive role names, with the closure
/// precomputed on construction.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct RBox {
    inclusions: BTreeSet<(Role, Role)>,
    transitive: BTreeSet<Name>,
    supers: BTreeMap<Role, BTreeSet<Role>>,
    subs: BTreeMap<Role, BTreeSet<Role>>,
    trans: BTreeSet<Role>,
}

impl RBox {
    pub fn new<I, J>(inclusions: I, transitive: J) -> RBox
    where
        I: IntoIterator<Item = (Role, Role)>,
        J: IntoIterator<Item = Name>,
    {
        let inclusions: BTreeSet<(Role, Role)> = inclusions.into_iter().collect();
        let transitive: BTreeSet<Name> = transitive.into_iter().collect();

        let mut nodes: BTreeSet<Role> = BTreeSet::new();
        let mut edges: BTreeMap<Role, BTreeSet<Role>> = BTreeMap::new();
        for (r, s) in &inclusions {
            for (a, b) in [(r.clone(), s.clone()), (r.inv(), s.inv())] {
                nodes.insert(a.clone());
                nodes.insert(a.inv());
                nodes.insert(b.clone());
                nodes.insert(b.inv());
                edges.entry(a).or_default().insert(b);
            }
        }
        for n in &transitive {
            nodes.insert(Role::from_name(n.clone(), false));
            nodes.insert(Role::from_name(n.clone(), true));
        }

        let mut supers: BTreeMap<Role, BTreeSet<Role>> = BTreeMap::new();
        for start in &nodes {
            let mut seen = BTreeSet::from([start.clone()]);
            let mut queue = VecDeque::from([start.clone()]);
            while let Some(x) = queue.pop_front() {
                for y in edges.get(&x).into_iter().flatten() {
                    if seen.insert(y.clone()) {
                        queue.push_back(y.clone());
                    }
                }
            }
            supers.insert(start.clone(), seen);
        }
        let mut subs: BTreeMap<Role, BTreeSet<Role>> = BTreeMap::new();
        for (r, ss) in &supers {
            for s in ss {
                subs.entry(s.clone()).or_default().insert(r.clone());
            }
        }
        let mut trans = BTreeSet::new();
        for s in &nodes {
            let equivalent_transitive = supers[s]
                .iter()
                .any(|r| supers[r].contains(s) && transitive.contains(r.name()));
            if equivalent_transitive {
                trans.insert(s.clone());
            }
        }
        RBox { inclusions, transitive, supers, subs, trans }
    }

    pub fn inclusions(&self) -> &BTreeSet<(Role, Role)> {
        &self.inclusions
    }

    pub fn transitive_names(&self) -> &BTreeSet<Name> {
        &self.transitive
    }

    /// `r ⊑* s`.
    pub fn is_subrole(&self, r: &Role, s: &Role) -> bool {
        match self.supers.get(r) {
            Some(set) => set.contains(s),
            None => r == s,
        }
    }

    /// All `s` with `r ⊑* s`.
    pub fn supers(&self, r: &Role) -> BTreeSet<Role> {
        self.supers.get(r).cloned().unwrap_or_else(|| BTreeSet::from([r.clone()]))
    }

    /// All `s` with `s ⊑* r`.
    pub fn subs(&self, r: &Role) -> BTreeSet<Role> {
        self.subs.get(r).cloned().unwrap_or_else(|| BTreeSet::from([r.clone()]))
    }

    /// `Trans_R`, restricted to the roles this RBox mentions (no other role can
    /// be transitive).
    pub fn trans_roles(&self) -> &BTreeSet<Role> {
        &self.trans
    }

    pub fn is_transitive(&self, r: &Role) -> bool {
        self.trans.contains(r)
    }

    pub fn is_simple(&self, r: &Role) -> bool {
        !self.subs(r).iter().any(|s| self.trans.contains(s))
    }

    /// `{s | s ⊑* r, s ∈ Trans_R}` in canonical order.
    pub fn transitive_subroles(&self, r: &Role) -> Vec<Role> {
        self.subs(r).into_iter().filter(|s| self.trans.contains(s)).collect()
    }

    /// One transitive sub-role of `r` per `≡_R` class (the least one).
    /// Equivalent roles have equal extensions in every model of the RBox.
    pub fn transitive_subrole_reps(&self, r: &Role) -> Vec<Role> {
        let all = self.transitive_subroles(r);
        all.iter()
            .filter(|s| !all.iter().any(|s2| s2 < s && self.is_subrole(s, s2) && self.is_subrole(s2, s)))
            .cloned()
            .collect()
    }

    /// `tc(W)`: every way of replacing each conjunct by one of its transitive
    /// sub-roles. Empty when some conjunct has none.
    pub fn tc_set(&self, w: &RoleConj) -> BTreeSet<RoleConj> {
        let mut acc: Vec<Vec<Role>> = vec![vec![]];
        for r in w.roles() {
            let choices = self.transitive_subroles(r);
            let mut next = Vec::new();
            for prefix in &acc {
                for s in &choices {
                    let mut v = prefix.clone();
                    v.push(s.clone());
                    next.push(v);
                }
            }
            acc = next;
        }
        acc.into_iter().filter_map(RoleConj::new).collect()
    }

    /// `up(W)`: the set of all super-roles of the conjuncts.
    pub fn up_roles(&self, w: &RoleConj) -> BTreeSet<Role> {
        w.roles().iter().flat_map(|r| self.supers(r)).collect()
    }

    /// Role names mentioned by the RBox.
    pub fn role_names(&self) -> BTreeSet<Name> {
        let mut out = self.transitive.clone();
        for (r, s) in &self.inclusions {
            out.insert(r.name().clone());
            out.insert(s.name().clone());
        }
        out
    }

    /// `cl(C, R)` for a concept in negation normal form.
    pub fn closure(&self, c: &Concept) -> BTreeSet<Concept> {
        let mut out = BTreeSet::new();
        let mut todo = vec![c.clone()];
        while let Some(d) = todo.pop() {
            if out.contains(&d) {
                continue;
            }
            for child in d.children() {
                todo.push(child.clone());
            }
            todo.push(d.neg_nnf());
            if let Concept::Forall(w, body) = &d {
                for t in self.tc_set(w) {
                    todo.push(Concept::forall(t, (**body).clone()));
                }
            }
            out.insert(d);
        }
        out
    }
}
