//! Canonical printing: sorted, fully parenthesized, re-parsable.

use std::fmt::Write;

use crate::dl::{Assertion, Concept, Kb, Role, RoleConj, RoleSlot};
use crate::query::{AnswerQuery, Atom, Query, Term, Ucq};

/// How a role slot is written inside quantifiers and number restrictions.
pub trait SlotSyntax {
    fn write_slot(&self, out: &mut String);
}

impl SlotSyntax for RoleConj {
    fn write_slot(&self, out: &mut String) {
        match self.as_single() {
            Some(r) => out.push_str(&print_role(r)),
            None => {
                out.push_str("(rconj");
                for r in self.roles() {
                    out.push(' ');
                    out.push_str(&print_role(r));
                }
                out.push(')');
            }
        }
    }
}

pub fn print_role(r: &Role) -> String {
    if r.is_inverse() {
        format!("(inv {})", r.name())
    } else {
        r.name().to_string()
    }
}

pub fn print_concept<R: RoleSlot + SlotSyntax>(c: &Concept<R>) -> String {
    let mut out = String::new();
    write_concept(c, &mut out);
    out
}

fn write_concept<R: RoleSlot + SlotSyntax>(c: &Concept<R>, out: &mut String) {
    let list = |out: &mut String, op: &str, cs: &[Concept<R>]| {
        out.push('(');
        out.push_str(op);
        for c in cs {
            out.push(' ');
            write_concept(c, out);
        }
        out.push(')');
    };
    match c {
        Concept::Top => out.push_str("top"),
        Concept::Bottom => out.push_str("bottom"),
        Concept::Atomic(n) => out.push_str(n),
        Concept::Not(d) => {
            out.push_str("(not ");
            write_concept(d, out);
            out.push(')');
        }
        Concept::And(cs) => list(out, "and", cs),
        Concept::Or(cs) => list(out, "or", cs),
        Concept::Exists(w, d) | Concept::Forall(w, d) => {
            out.push_str(if matches!(c, Concept::Exists(..)) { "(some " } else { "(all " });
            w.write_slot(out);
            out.push(' ');
            write_concept(d, out);
            out.push(')');
        }
        Concept::AtLeast(n, w, d) | Concept::AtMost(n, w, d) => {
            let kw = if matches!(c, Concept::AtLeast(..)) { "at-least" } else { "at-most" };
            let _ = write!(out, "({kw} {n} ");
            w.write_slot(out);
            out.push(' ');
            write_concept(d, out);
            out.push(')');
        }
    }
}

pub fn print_assertion(a: &Assertion) -> String {
    match a {
        Assertion::Instance(i, c) => format!("(instance {i} {})", print_concept(c)),
        Assertion::Related(i, j, r) => format!("(related {i} {j} {})", print_role(r)),
        Assertion::NotRelated(i, j, r) => format!("(not-related {i} {j} {})", print_role(r)),
        Assertion::Distinct(i, j) => format!("(distinct {i} {j})"),
    }
}

fn section(out: &mut String, name: &str, lines: Vec<String>) {
    if lines.is_empty() {
        let _ = writeln!(out, "  ({name})");
        return;
    }
    let _ = writeln!(out, "  ({name}");
    let n = lines.len();
    for (i, l) in lines.into_iter().enumerate() {
        let close = if i + 1 == n { ")" } else { "" };
        let _ = writeln!(out, "    {l}{close}");
    }
}

pub fn print_kb(kb: &Kb) -> String {
    let mut out = String::from("(kb\n");
    let tbox = kb
        .tbox()
        .iter()
        .map(|g| format!("(implies {} {})", print_concept(&g.sub), print_concept(&g.sup)))
        .collect();
    section(&mut out, "tbox", tbox);
    let mut rbox: Vec<String> = kb
        .rbox()
        .inclusions()
        .iter()
        .map(|(r, s)| format!("(subrole {} {})", print_role(r), print_role(s)))
        .collect();
    rbox.extend(kb.rbox().transitive_names().iter().map(|n| format!("(transitive {n})")));
    section(&mut out, "rbox", rbox);
    let abox = kb.abox().iter().map(print_assertion).collect();
    section(&mut out, "abox", abox);
    out.pop();
    out.push_str(")\n");
    out
}

pub fn print_term(t: &Term) -> String {
    t.name().to_string()
}

pub fn print_atom(a: &Atom) -> String {
    match a {
        Atom::Concept(c, t) => format!("(concept {} {})", print_concept(c), print_term(t)),
        Atom::Role(r, t, u) => format!("(role {} {} {})", print_role(r), print_term(t), print_term(u)),
        Atom::Eq(t, u) => format!("(eq {} {})", print_term(t), print_term(u)),
    }
}

fn query_body(q: &Query, answer: Option<&[Term]>) -> String {
    let vars: Vec<String> = q.vars().map(print_term).collect();
    let mut out = format!("(query (vars{}{})", if vars.is_empty() { "" } else { " " }, vars.join(" "));
    if let Some(ans) = answer {
        let a: Vec<String> = ans.iter().map(print_term).collect();
        let _ = write!(out, " (answer-vars{}{})", if a.is_empty() { "" } else { " " }, a.join(" "));
    }
    out.push_str(" (atoms");
    for a in q.atoms() {
        out.push(' ');
        out.push_str(&print_atom(a));
    }
    out.push_str("))");
    out
}

pub fn print_query(q: &Query) -> String {
    query_body(q, None)
}

pub fn print_answer_query(q: &AnswerQuery) -> String {
    query_body(q.query(), Some(q.answer_vars()))
}

pub fn print_ucq(u: &Ucq) -> String {
    if u.disjuncts().len() == 1 {
        return print_query(&u.disjuncts()[0]);
    }
    let parts: Vec<String> = u.disjuncts().iter().map(print_query).collect();
    format!("(ucq {})", parts.join(" "))
}
