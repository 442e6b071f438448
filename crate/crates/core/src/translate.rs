//! Translation of SHIQ⊓ knowledge bases into ALCQIb: role hierarchies are
//! compiled into `↑`-closed role expressions and transitivity into fresh
//! concept names `X_{W,D}` with propagation axioms.
//!
//! [`TrMode::Definitional`] follows the textbook translation: `∃W.D` becomes
//! `¬X_{W,¬̇D}` and each `X` is defined by an equivalence. [`TrMode::Universal`]
//! keeps existentials (`∃↑(W).tr(D)`) and only states the `∀` side of each
//! definition; it is equisatisfiable and every `X` axiom has an atomic left
//! side, which the tableau absorbs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::dl::{name, Assertion, Concept, Name, RBox, Role, RoleConj, RoleSlot};
use crate::syntax::{print_concept, print_role, SlotSyntax};

/// A boolean combination of roles.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolRole {
    Role(Role),
    And(Vec<BoolRole>),
    Or(Vec<BoolRole>),
    Not(Box<BoolRole>),
}

/// A disjunct of a role expression in DNF: role literals with polarity.
pub type RoleClause = Vec<(Role, bool)>;

impl BoolRole {
    /// The conjunction of the given roles (a bare role when there is one).
    pub fn conj<I: IntoIterator<Item = Role>>(roles: I) -> BoolRole {
        let mut rs: Vec<BoolRole> =
            roles.into_iter().collect::<BTreeSet<_>>().into_iter().map(BoolRole::Role).collect();
        if rs.len() == 1 {
            rs.pop().unwrap()
        } else {
            BoolRole::And(rs)
        }
    }

    /// Disjunctive normal form; contradictory disjuncts are dropped.
    pub fn dnf(&self) -> Vec<RoleClause> {
        fn go(e: &BoolRole, positive: bool) -> Vec<BTreeMap<Role, bool>> {
            match (e, positive) {
                (BoolRole::Role(r), p) => vec![BTreeMap::from([(r.clone(), p)])],
                (BoolRole::Not(e), p) => go(e, !p),
                (BoolRole::And(es), true) | (BoolRole::Or(es), false) => {
                    let mut acc = vec![BTreeMap::new()];
                    for e in es {
                        let part = go(e, positive);
                        let mut next = Vec::new();
                        for a in &acc {
                            for b in &part {
                                let mut m: BTreeMap<Role, bool> = a.clone();
                                let ok = b.iter().all(|(r, p)| *m.entry(r.clone()).or_insert(*p) == *p);
                                if ok {
                                    next.push(m);
                                }
                            }
                        }
                        acc = next;
                    }
                    acc
                }
                (BoolRole::Or(es), true) | (BoolRole::And(es), false) => {
                    es.iter().flat_map(|e| go(e, positive)).collect()
                }
            }
        }
        let clauses: BTreeSet<RoleClause> = go(self, true).into_iter().map(|m| m.into_iter().collect()).collect();
        clauses.into_iter().collect()
    }

    /// Safe: every DNF disjunct has a positive literal.
    pub fn is_safe(&self) -> bool {
        self.dnf().iter().all(|c| c.iter().any(|(_, p)| *p))
    }

    /// Evaluates the expression given which roles hold.
    pub fn eval(&self, holds: &dyn Fn(&Role) -> bool) -> bool {
        match self {
            BoolRole::Role(r) => holds(r),
            BoolRole::And(es) => es.iter().all(|e| e.eval(holds)),
            BoolRole::Or(es) => es.iter().any(|e| e.eval(holds)),
            BoolRole::Not(e) => !e.eval(holds),
        }
    }

    /// Every role mentioned.
    pub fn roles(&self, out: &mut BTreeSet<Role>) {
        match self {
            BoolRole::Role(r) => {
                out.insert(r.clone());
            }
            BoolRole::And(es) | BoolRole::Or(es) => es.iter().for_each(|e| e.roles(out)),
            BoolRole::Not(e) => e.roles(out),
        }
    }
}

impl RoleSlot for BoolRole {
    fn role_names(&self, out: &mut BTreeSet<Name>) {
        let mut roles = BTreeSet::new();
        self.roles(&mut roles);
        out.extend(roles.into_iter().map(|r| r.name().clone()));
    }
}

fn write_bool_role(e: &BoolRole, out: &mut String) {
    match e {
        BoolRole::Role(r) => out.push_str(&print_role(r)),
        BoolRole::Not(e) => {
            out.push_str("(not ");
            write_bool_role(e, out);
            out.push(')');
        }
        BoolRole::And(es) | BoolRole::Or(es) => {
            out.push_str(if matches!(e, BoolRole::And(_)) { "(and" } else { "(or" });
            for e in es {
                out.push(' ');
                write_bool_role(e, out);
            }
            out.push(')');
        }
    }
}

impl SlotSyntax for BoolRole {
    fn write_slot(&self, out: &mut String) {
        match self {
            BoolRole::Role(r) => out.push_str(&print_role(r)),
            other => {
                out.push_str("(boolean-role ");
                write_bool_role(other, out);
                out.push(')');
            }
        }
    }
}

impl fmt::Debug for BoolRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_slot(&mut s);
        f.write_str(&s)
    }
}

pub type AConcept = Concept<BoolRole>;

/// An ALCQIb assertion.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AAssertion {
    Instance(Name, AConcept),
    Related(Name, Name, Role),
    NotRelated(Name, Name, Role),
    Distinct(Name, Name),
}

/// An ALCQIb knowledge base; `clauses` are disjunctions of assertion sets of
/// which at least one must hold.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlcqibKb {
    pub tbox: Vec<(AConcept, AConcept)>,
    pub abox: Vec<AAssertion>,
    pub clauses: Vec<Vec<Vec<AAssertion>>>,
}

impl AlcqibKb {
    pub fn individuals(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for a in self.abox.iter().chain(self.clauses.iter().flatten().flatten()) {
            match a {
                AAssertion::Instance(x, _) => {
                    out.insert(x.clone());
                }
                AAssertion::Related(x, y, _) | AAssertion::NotRelated(x, y, _) | AAssertion::Distinct(x, y) => {
                    out.insert(x.clone());
                    out.insert(y.clone());
                }
            }
        }
        out
    }
}

fn print_a_assertion(a: &AAssertion) -> String {
    match a {
        AAssertion::Instance(x, c) => format!("(instance {x} {})", print_concept(c)),
        AAssertion::Related(x, y, r) => format!("(related {x} {y} {})", print_role(r)),
        AAssertion::NotRelated(x, y, r) => format!("(not-related {x} {y} {})", print_role(r)),
        AAssertion::Distinct(x, y) => format!("(distinct {x} {y})"),
    }
}

/// Prints an ALCQIb KB in the KB syntax, with `(boolean-role …)` slots and
/// clauses as `(one-of (all-of …) …)` entries of the ABox.
pub fn print_alcqib(kb: &AlcqibKb) -> String {
    let mut out = String::from("(kb\n  (tbox");
    for (c, d) in &kb.tbox {
        out.push_str(&format!("\n    (implies {} {})", print_concept(c), print_concept(d)));
    }
    out.push_str(")\n  (rbox)\n  (abox");
    for a in &kb.abox {
        out.push_str("\n    ");
        out.push_str(&print_a_assertion(a));
    }
    for clause in &kb.clauses {
        out.push_str("\n    (one-of");
        for alt in clause {
            out.push_str(" (all-of");
            for a in alt {
                out.push(' ');
                out.push_str(&print_a_assertion(a));
            }
            out.push(')');
        }
        out.push(')');
    }
    out.push_str("))\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrMode {
    Definitional,
    Universal,
}

/// `↑(W)`: the conjunction of all super-roles of the conjuncts of `W`.
pub fn up_close(w: &RoleConj, rbox: &RBox) -> BoolRole {
    BoolRole::conj(rbox.up_roles(w))
}

/// `tc(W, R)`.
pub fn tc_set(w: &RoleConj, rbox: &RBox) -> BTreeSet<RoleConj> {
    rbox.tc_set(w)
}

/// Stateful translator: owns the table of fresh `X_{W,D}` names and the
/// auxiliary axioms generated for them.
pub struct Translator<'a> {
    rbox: &'a RBox,
    mode: TrMode,
    names: BTreeMap<(RoleConj, Concept), Name>,
    pending: VecDeque<(RoleConj, Concept)>,
    aux: Vec<(AConcept, AConcept)>,
}

impl<'a> Translator<'a> {
    pub fn new(rbox: &'a RBox, mode: TrMode) -> Translator<'a> {
        Translator { rbox, mode, names: BTreeMap::new(), pending: VecDeque::new(), aux: Vec::new() }
    }

    /// The fresh name table: `(W, D) ↦ X_{W,D}`.
    pub fn names(&self) -> &BTreeMap<(RoleConj, Concept), Name> {
        &self.names
    }

    /// `X_{W,D}`, allocating it (and scheduling its axioms) on first use.
    pub fn x_name(&mut self, w: &RoleConj, d: &Concept) -> Name {
        let key = (w.clone(), d.clone());
        if let Some(n) = self.names.get(&key) {
            return n.clone();
        }
        let n = name(&format!("_X{}", self.names.len()));
        self.names.insert(key.clone(), n.clone());
        self.pending.push_back(key);
        n
    }

    /// `tr(C)` for a concept in negation normal form.
    pub fn tr(&mut self, c: &Concept) -> AConcept {
        match c {
            Concept::Top => Concept::Top,
            Concept::Bottom => Concept::Bottom,
            Concept::Atomic(n) => Concept::Atomic(n.clone()),
            Concept::Not(d) => Concept::Not(Box::new(self.tr(d))),
            Concept::And(cs) => Concept::and(cs.iter().map(|d| self.tr(d)).collect::<Vec<_>>()),
            Concept::Or(cs) => Concept::or(cs.iter().map(|d| self.tr(d)).collect::<Vec<_>>()),
            Concept::AtLeast(n, w, d) => Concept::AtLeast(*n, up_close(w, self.rbox), Box::new(self.tr(d))),
            Concept::AtMost(n, w, d) => Concept::AtMost(*n, up_close(w, self.rbox), Box::new(self.tr(d))),
            Concept::Forall(w, d) => Concept::Atomic(self.x_name(w, d)),
            Concept::Exists(w, d) => match self.mode {
                TrMode::Definitional => Concept::Not(Box::new(Concept::Atomic(self.x_name(w, &d.neg_nnf())))),
                TrMode::Universal => Concept::Exists(up_close(w, self.rbox), Box::new(self.tr(d))),
            },
        }
    }

    /// Emits the axioms of every name allocated so far (and of the names
    /// those axioms allocate).
    pub fn flush(&mut self) {
        while let Some((w, d)) = self.pending.pop_front() {
            let x = Concept::Atomic(self.names[&(w.clone(), d.clone())].clone());
            let body = Concept::Forall(up_close(&w, self.rbox), Box::new(self.tr(&d)));
            self.aux.push((x.clone(), body.clone()));
            if self.mode == TrMode::Definitional {
                self.aux.push((body, x.clone()));
            }
            for t in self.rbox.tc_set(&w) {
                let xt = Concept::Atomic(self.x_name(&t, &d));
                self.aux.push((x.clone(), Concept::Forall(up_close(&t, self.rbox), Box::new(xt))));
            }
        }
    }

    /// Takes the auxiliary axioms emitted so far.
    pub fn take_aux(&mut self) -> Vec<(AConcept, AConcept)> {
        self.flush();
        std::mem::take(&mut self.aux)
    }
}

/// A translator whose names for the `∀`-concepts of `cl(C, R)` are
/// allocated in canonical order, so that separate calls agree on them.
fn closure_translator<'a>(c: &Concept, rbox: &'a RBox) -> Translator<'a> {
    let mut t = Translator::new(rbox, TrMode::Definitional);
    for d in rbox.closure(c) {
        if let Concept::Forall(w, e) = &d {
            t.x_name(w, e);
        }
    }
    t
}

/// `tr(C)` for a concept in negation normal form, with the name table.
pub fn tr_concept(c: &Concept, rbox: &RBox) -> (AConcept, BTreeMap<(RoleConj, Concept), Name>) {
    let mut t = closure_translator(c, rbox);
    let out = t.tr(c);
    (out, t.names().clone())
}

/// `T_{C,R}`: the definitions of `X_{W,D}` for every `∀W.D ∈ cl(C, R)` and
/// their propagation axioms, as GCIs. Names agree with [`tr_concept`].
pub fn aux_tbox(c: &Concept, rbox: &RBox) -> Vec<(AConcept, AConcept)> {
    closure_translator(c, rbox).take_aux()
}

/// Translates a TBox axiom, an ABox and disjunctive assertion clauses.
pub struct KbTranslation<'a> {
    tr: Translator<'a>,
    rbox: &'a RBox,
    out: AlcqibKb,
    markers: BTreeMap<(Name, Name, Role), Name>,
}

impl<'a> KbTranslation<'a> {
    pub fn new(rbox: &'a RBox, mode: TrMode) -> KbTranslation<'a> {
        KbTranslation { tr: Translator::new(rbox, mode), rbox, out: AlcqibKb::default(), markers: BTreeMap::new() }
    }

    /// `C ⊑ D`; atomic or `⊤` left sides are kept, others become
    /// `⊤ ⊑ tr(nnf(¬C ⊔ D))`.
    pub fn gci(&mut self, sub: &Concept, sup: &Concept) {
        let axiom = match sub {
            Concept::Top | Concept::Atomic(_) => (self.tr.tr(sub), self.tr.tr(&sup.nnf())),
            _ => (Concept::Top, self.tr.tr(&Concept::or([sub.neg_nnf(), sup.nnf()]))),
        };
        self.out.tbox.push(axiom);
    }

    fn assertion(&mut self, a: &Assertion) -> Vec<AAssertion> {
        match a {
            Assertion::Instance(x, c) => vec![AAssertion::Instance(x.clone(), self.tr.tr(&c.nnf()))],
            Assertion::Related(x, y, r) => {
                self.rbox.supers(r).into_iter().map(|s| AAssertion::Related(x.clone(), y.clone(), s)).collect()
            }
            Assertion::NotRelated(x, y, r) if self.rbox.is_simple(r) => {
                self.rbox.subs(r).into_iter().map(|s| AAssertion::NotRelated(x.clone(), y.clone(), s)).collect()
            }
            Assertion::NotRelated(x, y, r) => {
                // ¬r(x, y) for non-simple r: y carries a marker that no
                // r-successor of x may carry.
                let key = (x.clone(), y.clone(), r.clone());
                let k = self.markers.len();
                let marker = self.markers.entry(key).or_insert_with(|| name(&format!("_N{k}"))).clone();
                let forbid = Concept::forall(RoleConj::single(r.clone()), Concept::not(Concept::Atomic(marker.clone())));
                vec![
                    AAssertion::Instance(y.clone(), Concept::Atomic(marker)),
                    AAssertion::Instance(x.clone(), self.tr.tr(&forbid)),
                ]
            }
            Assertion::Distinct(x, y) => vec![AAssertion::Distinct(x.clone(), y.clone())],
        }
    }

    pub fn abox_assertion(&mut self, a: &Assertion) {
        let out = self.assertion(a);
        self.out.abox.extend(out);
    }

    /// A disjunction of assertions: one of them must hold.
    pub fn clause(&mut self, alternatives: &[Assertion]) {
        let alts: Vec<Vec<AAssertion>> = alternatives.iter().map(|a| self.assertion(a)).collect();
        self.out.clauses.push(alts);
    }

    pub fn finish(mut self) -> AlcqibKb {
        let aux = self.tr.take_aux();
        self.out.tbox.extend(aux);
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running_rbox() -> RBox {
        let t = Role::named("t");
        let s = Role::named("s");
        RBox::new([(t.clone(), t.inv()), (s.inv(), Role::named("r"))], [name("r"), name("t")])
    }

    fn conj(rs: &[Role]) -> RoleConj {
        RoleConj::new(rs.iter().cloned()).unwrap()
    }

    #[test]
    fn up_closure_examples() {
        let rb = running_rbox();
        let s = Role::named("s");
        assert_eq!(up_close(&conj(&[s.inv()]), &rb), BoolRole::conj([s.inv(), Role::named("r")]));
        let t = Role::named("t");
        assert_eq!(up_close(&conj(&[t.clone()]), &rb), BoolRole::conj([t.clone(), t.inv()]));
        assert_eq!(up_close(&conj(&[Role::named("r")]), &RBox::default()), BoolRole::Role(Role::named("r")));
    }

    #[test]
    fn tc_examples() {
        let rb = running_rbox();
        let r = Role::named("r");
        let t = Role::named("t");
        assert_eq!(tc_set(&conj(&[r.clone()]), &rb), BTreeSet::from([conj(&[r.clone()])]));
        assert!(tc_set(&conj(&[Role::named("p")]), &rb).is_empty());
        assert_eq!(
            tc_set(&conj(&[r.clone(), t.clone()]), &rb),
            BTreeSet::from([conj(&[r.clone(), t.clone()]), conj(&[r, t.inv()])])
        );
    }

    #[test]
    fn tr_examples() {
        let rb = running_rbox();
        let a = Concept::atomic("A");
        let b = Concept::atomic("B");
        let (c, _) = tr_concept(&Concept::and([a.clone(), Concept::not(b.clone())]), &rb);
        assert_eq!(c, Concept::and([Concept::atomic("A"), Concept::not(Concept::atomic("B"))]));
        let p = Role::named("p");
        let (c, _) = tr_concept(&Concept::at_least(2, conj(&[p.clone()]), a.clone()), &rb);
        assert_eq!(c, Concept::at_least(2, BoolRole::Role(p), Concept::atomic("A")));
        let r = Role::named("r");
        let (c, names) = tr_concept(&Concept::exists(conj(&[r.clone()]), a.clone()), &rb);
        let x = &names[&(conj(&[r]), Concept::not(a))];
        assert_eq!(c, Concept::not(Concept::Atomic(x.clone())));
    }

    #[test]
    fn aux_tbox_examples() {
        let rb = running_rbox();
        let a = Concept::atomic("A");
        let p = aux_tbox(&Concept::forall(conj(&[Role::named("p")]), a.clone()), &rb);
        assert_eq!(p.len(), 2);
        let r = aux_tbox(&Concept::forall(conj(&[Role::named("r")]), a.clone()), &rb);
        assert_eq!(r.len(), 3);
        assert!(aux_tbox(&a, &rb).is_empty());
    }

    #[test]
    fn dnf_and_safety() {
        let r = BoolRole::Role(Role::named("r"));
        let s = BoolRole::Role(Role::named("s"));
        let e = BoolRole::And(vec![r.clone(), BoolRole::Not(Box::new(s.clone()))]);
        assert!(e.is_safe());
        assert!(!BoolRole::Not(Box::new(r.clone())).is_safe());
        assert_eq!(BoolRole::Or(vec![r.clone(), s.clone()]).dnf().len(), 2);
        let holds = |x: &Role| x.name().as_ref() == "r";
        assert!(e.eval(&holds));
    }
}
