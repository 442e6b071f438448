//! Concept expressions, generic over what may stand in a role position.
//!
//! SHIQ⊓ concepts use [`RoleConj`] slots; the ALCQIb target of the translation
//! reuses the same tree with boolean role expressions.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;

use super::role::{Name, RoleConj};

/// Anything that can label a quantifier or number restriction.
pub trait RoleSlot: Clone + Ord + Hash + fmt::Debug {
    fn role_names(&self, out: &mut BTreeSet<Name>);
}

impl RoleSlot for RoleConj {
    fn role_names(&self, out: &mut BTreeSet<Name>) {
        for r in self.roles() {
            out.insert(r.name().clone());
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept<R = RoleConj> {
    Top,
    Bottom,
    Atomic(Name),
    Not(Box<Concept<R>>),
    And(Vec<Concept<R>>),
    Or(Vec<Concept<R>>),
    Exists(R, Box<Concept<R>>),
    Forall(R, Box<Concept<R>>),
    AtLeast(u64, R, Box<Concept<R>>),
    AtMost(u64, R, Box<Concept<R>>),
}

impl<R: RoleSlot> Concept<R> {
    pub fn atomic(n: &str) -> Self {
        Concept::Atomic(super::role::name(n))
    }

    pub fn not(c: Self) -> Self {
        Concept::Not(Box::new(c))
    }

    /// Flattening, deduplicating conjunction; `⊤` is dropped as the unit.
    pub fn and<I: IntoIterator<Item = Self>>(parts: I) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Concept::And(inner) => out.extend(inner),
                Concept::Top => {}
                other => out.push(other),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Concept::Top,
            1 => out.pop().unwrap(),
            _ => Concept::And(out),
        }
    }

    /// Flattening, deduplicating disjunction; `⊥` is dropped as the unit.
    pub fn or<I: IntoIterator<Item = Self>>(parts: I) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Concept::Or(inner) => out.extend(inner),
                Concept::Bottom => {}
                other => out.push(other),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Concept::Bottom,
            1 => out.pop().unwrap(),
            _ => Concept::Or(out),
        }
    }

    pub fn exists(r: R, c: Self) -> Self {
        Concept::Exists(r, Box::new(c))
    }

    pub fn forall(r: R, c: Self) -> Self {
        Concept::Forall(r, Box::new(c))
    }

    /// `≥0 W.C` is `⊤`.
    pub fn at_least(n: u64, r: R, c: Self) -> Self {
        if n == 0 {
            Concept::Top
        } else {
            Concept::AtLeast(n, r, Box::new(c))
        }
    }

    pub fn at_most(n: u64, r: R, c: Self) -> Self {
        Concept::AtMost(n, r, Box::new(c))
    }

    /// Negation normal form.
    pub fn nnf(&self) -> Self {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => self.clone(),
            Concept::Not(c) => c.neg_nnf(),
            Concept::And(cs) => Concept::and(cs.iter().map(Concept::nnf)),
            Concept::Or(cs) => Concept::or(cs.iter().map(Concept::nnf)),
            Concept::Exists(r, c) => Concept::exists(r.clone(), c.nnf()),
            Concept::Forall(r, c) => Concept::forall(r.clone(), c.nnf()),
            Concept::AtLeast(n, r, c) => Concept::at_least(*n, r.clone(), c.nnf()),
            Concept::AtMost(n, r, c) => Concept::at_most(*n, r.clone(), c.nnf()),
        }
    }

    /// `nnf(¬C)`, written `¬̇C`.
    pub fn neg_nnf(&self) -> Self {
        match self {
            Concept::Top => Concept::Bottom,
            Concept::Bottom => Concept::Top,
            Concept::Atomic(_) => Concept::not(self.clone()),
            Concept::Not(c) => c.nnf(),
            Concept::And(cs) => Concept::or(cs.iter().map(Concept::neg_nnf)),
            Concept::Or(cs) => Concept::and(cs.iter().map(Concept::neg_nnf)),
            Concept::Exists(r, c) => Concept::forall(r.clone(), c.neg_nnf()),
            Concept::Forall(r, c) => Concept::exists(r.clone(), c.neg_nnf()),
            Concept::AtLeast(0, _, _) => Concept::Bottom,
            Concept::AtLeast(n, r, c) => Concept::at_most(n - 1, r.clone(), c.nnf()),
            Concept::AtMost(n, r, c) => match n.checked_add(1) {
                Some(m) => Concept::at_least(m, r.clone(), c.nnf()),
                None => Concept::Bottom,
            },
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => true,
            Concept::Not(c) => matches!(**c, Concept::Atomic(_)),
            Concept::And(cs) | Concept::Or(cs) => cs.iter().all(Concept::is_nnf),
            Concept::Exists(_, c)
            | Concept::Forall(_, c)
            | Concept::AtLeast(_, _, c)
            | Concept::AtMost(_, _, c) => c.is_nnf(),
        }
    }

    /// Immediate sub-concepts.
    pub fn children(&self) -> Vec<&Self> {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => vec![],
            Concept::Not(c)
            | Concept::Exists(_, c)
            | Concept::Forall(_, c)
            | Concept::AtLeast(_, _, c)
            | Concept::AtMost(_, _, c) => vec![&**c],
            Concept::And(cs) | Concept::Or(cs) => cs.iter().collect(),
        }
    }

    pub fn role_slot(&self) -> Option<&R> {
        match self {
            Concept::Exists(r, _)
            | Concept::Forall(r, _)
            | Concept::AtLeast(_, r, _)
            | Concept::AtMost(_, r, _) => Some(r),
            _ => None,
        }
    }

    /// Nesting depth of constructors (atoms have depth 0).
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    pub fn concept_names(&self, out: &mut BTreeSet<Name>) {
        if let Concept::Atomic(n) = self {
            out.insert(n.clone());
        }
        for c in self.children() {
            c.concept_names(out);
        }
    }

    pub fn role_names(&self, out: &mut BTreeSet<Name>) {
        if let Some(r) = self.role_slot() {
            r.role_names(out);
        }
        for c in self.children() {
            c.role_names(out);
        }
    }

    /// All sub-concepts including `self`.
    pub fn subconcepts(&self, out: &mut BTreeSet<Self>) {
        if out.insert(self.clone()) {
            for c in self.children() {
                c.subconcepts(out);
            }
        }
    }
}

impl<R: RoleSlot> fmt::Debug for Concept<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<R: RoleSlot>(
            f: &mut fmt::Formatter<'_>,
            cs: &[Concept<R>],
            op: &str,
        ) -> fmt::Result {
            write!(f, "(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{c:?}")?;
            }
            write!(f, ")")
        }
        match self {
            Concept::Top => write!(f, "⊤"),
            Concept::Bottom => write!(f, "⊥"),
            Concept::Atomic(n) => write!(f, "{n}"),
            Concept::Not(c) => write!(f, "¬{c:?}"),
            Concept::And(cs) => join(f, cs, "⊓"),
            Concept::Or(cs) => join(f, cs, "⊔"),
            Concept::Exists(r, c) => write!(f, "∃({r:?}).{c:?}"),
            Concept::Forall(r, c) => write!(f, "∀({r:?}).{c:?}"),
            Concept::AtLeast(n, r, c) => write!(f, "≥{n} ({r:?}).{c:?}"),
            Concept::AtMost(n, r, c) => write!(f, "≤{n} ({r:?}).{c:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::Role;

    type C = Concept;

    fn a(n: &str) -> C {
        C::atomic(n)
    }

    fn r(n: &str) -> RoleConj {
        RoleConj::single(Role::named(n))
    }

    #[test]
    fn de_morgan() {
        let c = C::not(C::and([a("A"), a("B")]));
        assert_eq!(c.nnf(), C::or([C::not(a("A")), C::not(a("B"))]));
    }

    #[test]
    fn quantifier_duality() {
        let c = C::not(C::exists(r("r"), a("A")));
        assert_eq!(c.nnf(), C::forall(r("r"), C::not(a("A"))));
    }

    #[test]
    fn number_restriction_duality() {
        let c = C::not(C::at_most(2, r("s"), a("C")));
        assert_eq!(c.nnf(), C::at_least(3, r("s"), a("C")));
        let d = C::not(C::at_least(1, r("s"), a("C")));
        assert_eq!(d.nnf(), C::at_most(0, r("s"), a("C")));
        assert_eq!(C::not(C::at_most(u64::MAX, r("s"), a("C"))).nnf(), C::Bottom);
    }

    #[test]
    fn at_least_zero_is_top() {
        assert_eq!(C::at_least(0, r("r"), a("A")), C::Top);
    }

    #[test]
    fn and_flattens_and_dedupes() {
        let c = C::and([a("B"), C::and([a("A"), a("B")]), C::Top]);
        assert_eq!(c, C::And(vec![a("A"), a("B")]));
        assert_eq!(C::and([]), C::Top);
        assert_eq!(C::or([]), C::Bottom);
    }

    #[test]
    fn nnf_is_idempotent_and_normal() {
        let c = C::not(C::or([
            C::forall(r("r"), C::not(a("A"))),
            C::at_least(2, r("s"), C::not(C::not(a("B")))),
        ]));
        let n = c.nnf();
        assert!(n.is_nnf());
        assert_eq!(n.nnf(), n);
    }
}
