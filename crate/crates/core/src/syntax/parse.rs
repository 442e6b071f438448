//! Parsing knowledge bases, concepts and queries from s-expressions.

use std::collections::BTreeSet;

use super::sexpr::{read_all, Pos, Sexp};
use super::ParseError;
use crate::dl::{name, Assertion, Concept, Gci, Kb, Name, RBox, Role, RoleConj, FILLER_INDIVIDUAL};
use crate::error::{Error, Result};
use crate::query::{AnswerQuery, Atom, Query, Term, Ucq};

/// A parsed query file: either a Boolean union of queries or a query with
/// answer variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedQuery {
    Boolean(Ucq),
    Answer(AnswerQuery),
}

const KEYWORDS: &[&str] = &[
    "kb", "tbox", "rbox", "abox", "implies", "subrole", "transitive", "instance", "related",
    "not-related", "distinct", "top", "bottom", "not", "and", "or", "some", "all", "at-least",
    "at-most", "inv", "rconj", "query", "vars", "answer-vars", "atoms", "concept", "role", "eq",
    "ucq",
];

struct P<'a> {
    file: &'a str,
}

impl P<'_> {
    fn err(&self, pos: &Pos, msg: impl Into<String>) -> ParseError {
        ParseError {
            file: self.file.to_string(),
            line: pos.line,
            column: pos.column,
            message: msg.into(),
        }
    }

    fn single(&self, items: Vec<Sexp>, what: &str) -> std::result::Result<Sexp, ParseError> {
        let mut it = items.into_iter();
        match (it.next(), it.next()) {
            (Some(s), None) => Ok(s),
            (None, _) => Err(self.err(&Pos { line: 1, column: 1 }, format!("expected {what}"))),
            (Some(_), Some(extra)) => Err(self.err(extra.pos(), format!("unexpected input after {what}"))),
        }
    }

    /// A list whose head is the given keyword; returns the remaining items.
    fn form<'s>(&self, s: &'s Sexp, keyword: &str) -> std::result::Result<&'s [Sexp], ParseError> {
        match s {
            Sexp::List(items, pos) => match items.first() {
                Some(Sexp::Symbol(h, _)) if h == keyword => Ok(&items[1..]),
                _ => Err(self.err(pos, format!("expected ({keyword} ...)"))),
            },
            Sexp::Symbol(_, pos) => Err(self.err(pos, format!("expected ({keyword} ...)"))),
        }
    }

    fn head<'s>(&self, s: &'s Sexp) -> Option<(&'s str, &'s [Sexp])> {
        match s {
            Sexp::List(items, _) => match items.first() {
                Some(Sexp::Symbol(h, _)) => Some((h.as_str(), &items[1..])),
                _ => None,
            },
            _ => None,
        }
    }

    fn arity(&self, s: &Sexp, args: &[Sexp], n: usize, what: &str) -> std::result::Result<(), ParseError> {
        if args.len() != n {
            Err(self.err(s.pos(), format!("{what} takes {n} argument(s), found {}", args.len())))
        } else {
            Ok(())
        }
    }

    fn name(&self, s: &Sexp, what: &str) -> std::result::Result<Name, ParseError> {
        match s {
            Sexp::Symbol(t, pos) => {
                if KEYWORDS.contains(&t.as_str()) {
                    return Err(self.err(pos, format!("keyword '{t}' cannot be used as a {what}")));
                }
                if t.starts_with('_') && t != FILLER_INDIVIDUAL {
                    return Err(self.err(pos, format!("names starting with '_' are reserved ({t})")));
                }
                if t.parse::<i128>().is_ok() {
                    return Err(self.err(pos, format!("a number cannot be used as a {what}")));
                }
                Ok(name(t))
            }
            Sexp::List(_, pos) => Err(self.err(pos, format!("expected a {what} name"))),
        }
    }

    fn role(&self, s: &Sexp) -> std::result::Result<Role, ParseError> {
        if let Some(("inv", args)) = self.head(s) {
            self.arity(s, args, 1, "inv")?;
            return Ok(self.role(&args[0])?.inv());
        }
        Ok(Role::from_name(self.name(s, "role")?, false))
    }

    fn role_conj(&self, s: &Sexp) -> std::result::Result<RoleConj, ParseError> {
        if let Some(("rconj", args)) = self.head(s) {
            let roles = args.iter().map(|a| self.role(a)).collect::<std::result::Result<Vec<_>, _>>()?;
            return RoleConj::new(roles).ok_or_else(|| self.err(s.pos(), "empty role conjunction"));
        }
        Ok(RoleConj::single(self.role(s)?))
    }

    fn number(&self, s: &Sexp) -> std::result::Result<u64, ParseError> {
        match s {
            Sexp::Symbol(t, pos) => {
                if t.starts_with('-') {
                    return Err(self.err(pos, "number restrictions need a non-negative count"));
                }
                t.parse::<u64>().map_err(|_| self.err(pos, format!("invalid count '{t}'")))
            }
            Sexp::List(_, pos) => Err(self.err(pos, "expected a count")),
        }
    }

    fn concept(&self, s: &Sexp) -> std::result::Result<Concept, ParseError> {
        match s {
            Sexp::Symbol(t, _) if t == "top" => Ok(Concept::Top),
            Sexp::Symbol(t, _) if t == "bottom" => Ok(Concept::Bottom),
            Sexp::Symbol(..) => Ok(Concept::Atomic(self.name(s, "concept")?)),
            Sexp::List(_, pos) => {
                let (h, args) = self.head(s).ok_or_else(|| self.err(pos, "expected a concept"))?;
                let cs = |args: &[Sexp]| {
                    args.iter().map(|a| self.concept(a)).collect::<std::result::Result<Vec<_>, _>>()
                };
                match h {
                    "not" => {
                        self.arity(s, args, 1, "not")?;
                        Ok(Concept::not(self.concept(&args[0])?))
                    }
                    "and" => Ok(Concept::and(cs(args)?)),
                    "or" => Ok(Concept::or(cs(args)?)),
                    "some" | "all" => {
                        self.arity(s, args, 2, h)?;
                        let w = self.role_conj(&args[0])?;
                        let c = self.concept(&args[1])?;
                        Ok(if h == "some" { Concept::exists(w, c) } else { Concept::forall(w, c) })
                    }
                    "at-least" | "at-most" => {
                        self.arity(s, args, 3, h)?;
                        let n = self.number(&args[0])?;
                        let w = self.role_conj(&args[1])?;
                        let c = self.concept(&args[2])?;
                        Ok(if h == "at-least" {
                            Concept::at_least(n, w, c)
                        } else {
                            Concept::at_most(n, w, c)
                        })
                    }
                    other => Err(self.err(pos, format!("unknown concept constructor '{other}'"))),
                }
            }
        }
    }

    fn kb(&self, s: &Sexp) -> Result<Kb> {
        let sections = self.form(s, "kb")?;
        let mut tbox = Vec::new();
        let mut incl = Vec::new();
        let mut trans = Vec::new();
        let mut abox = Vec::new();
        let mut seen = BTreeSet::new();
        for sec in sections {
            let (h, items) = self.head(sec).ok_or_else(|| self.err(sec.pos(), "expected a kb section"))?;
            if !seen.insert(h.to_string()) {
                return Err(self.err(sec.pos(), format!("duplicate section '{h}'")).into());
            }
            match h {
                "tbox" => {
                    for it in items {
                        let args = self.form(it, "implies")?;
                        self.arity(it, args, 2, "implies")?;
                        tbox.push(Gci::new(self.concept(&args[0])?, self.concept(&args[1])?));
                    }
                }
                "rbox" => {
                    for it in items {
                        match self.head(it) {
                            Some(("subrole", args)) => {
                                self.arity(it, args, 2, "subrole")?;
                                incl.push((self.role(&args[0])?, self.role(&args[1])?));
                            }
                            Some(("transitive", args)) => {
                                self.arity(it, args, 1, "transitive")?;
                                trans.push(self.name(&args[0], "role")?);
                            }
                            _ => {
                                return Err(self
                                    .err(it.pos(), "expected (subrole R S) or (transitive r)")
                                    .into())
                            }
                        }
                    }
                }
                "abox" => {
                    for it in items {
                        abox.push(self.assertion(it)?);
                    }
                }
                other => return Err(self.err(sec.pos(), format!("unknown kb section '{other}'")).into()),
            }
        }
        Kb::new(tbox, RBox::new(incl, trans), abox)
    }

    fn assertion(&self, it: &Sexp) -> std::result::Result<Assertion, ParseError> {
        let ind = |s: &Sexp| self.name(s, "individual");
        match self.head(it) {
            Some(("instance", args)) => {
                self.arity(it, args, 2, "instance")?;
                Ok(Assertion::Instance(ind(&args[0])?, self.concept(&args[1])?))
            }
            Some(("related", args)) => {
                self.arity(it, args, 3, "related")?;
                Ok(Assertion::Related(ind(&args[0])?, ind(&args[1])?, self.role(&args[2])?))
            }
            Some(("not-related", args)) => {
                self.arity(it, args, 3, "not-related")?;
                Ok(Assertion::NotRelated(ind(&args[0])?, ind(&args[1])?, self.role(&args[2])?))
            }
            Some(("distinct", args)) => {
                self.arity(it, args, 2, "distinct")?;
                Ok(Assertion::Distinct(ind(&args[0])?, ind(&args[1])?))
            }
            _ => Err(self.err(it.pos(), "expected an ABox assertion")),
        }
    }

    fn query(&self, s: &Sexp) -> Result<(Query, Option<Vec<Term>>)> {
        let sections = self.form(s, "query")?;
        let mut vars: Option<BTreeSet<Name>> = None;
        let mut answer: Option<Vec<Term>> = None;
        let mut atoms_sec: Option<&[Sexp]> = None;
        for sec in sections {
            match self.head(sec) {
                Some(("vars", items)) if vars.is_none() => {
                    let names = items.iter().map(|i| self.name(i, "variable")).collect::<std::result::Result<BTreeSet<_>, _>>()?;
                    vars = Some(names);
                }
                Some(("answer-vars", items)) if answer.is_none() => {
                    let names = items.iter().map(|i| self.name(i, "variable").map(Term::Var)).collect::<std::result::Result<Vec<_>, _>>()?;
                    answer = Some(names);
                }
                Some(("atoms", items)) if atoms_sec.is_none() => atoms_sec = Some(items),
                _ => return Err(self.err(sec.pos(), "expected (vars ...), (answer-vars ...) or (atoms ...)").into()),
            }
        }
        let vars = vars.unwrap_or_default();
        let atoms_sec = atoms_sec.ok_or_else(|| self.err(s.pos(), "query without (atoms ...)"))?;
        let term = |x: &Sexp| -> std::result::Result<Term, ParseError> {
            let n = self.name(x, "term")?;
            Ok(if vars.contains(&n) { Term::Var(n) } else { Term::Ind(n) })
        };
        let mut atoms = Vec::new();
        for a in atoms_sec {
            let atom = match self.head(a) {
                Some(("concept", args)) => {
                    self.arity(a, args, 2, "concept")?;
                    Atom::Concept(self.concept(&args[0])?, term(&args[1])?)
                }
                Some(("role", args)) => {
                    self.arity(a, args, 3, "role")?;
                    Atom::Role(self.role(&args[0])?, term(&args[1])?, term(&args[2])?)
                }
                Some(("eq", args)) => {
                    self.arity(a, args, 2, "eq")?;
                    Atom::Eq(term(&args[0])?, term(&args[1])?)
                }
                _ => return Err(self.err(a.pos(), "expected (concept C t), (role R t t) or (eq t t)").into()),
            };
            atoms.push(atom);
        }
        if atoms.is_empty() {
            return Err(self.err(s.pos(), "a query needs at least one atom").into());
        }
        let q = Query::new(atoms)?;
        if let Some(unused) = vars.iter().find(|v| !q.contains_term(&Term::Var((*v).clone()))) {
            return Err(self.err(s.pos(), format!("variable '{unused}' does not occur in any atom")).into());
        }
        Ok((q, answer))
    }

    fn parsed_query(&self, s: &Sexp) -> Result<ParsedQuery> {
        if let Some(("ucq", items)) = self.head(s) {
            let mut qs = Vec::new();
            for it in items {
                let (q, ans) = self.query(it)?;
                if ans.is_some() {
                    return Err(self.err(it.pos(), "answer variables are not supported inside (ucq ...)").into());
                }
                qs.push(q);
            }
            return Ok(ParsedQuery::Boolean(Ucq::new(qs)?));
        }
        let (q, ans) = self.query(s)?;
        Ok(match ans {
            Some(vars) => ParsedQuery::Answer(AnswerQuery::new(q, vars)?),
            None => ParsedQuery::Boolean(Ucq::single(q)),
        })
    }
}

pub fn parse_concept(text: &str, file: &str) -> Result<Concept> {
    let p = P { file };
    let s = p.single(read_all(text, file)?, "a concept")?;
    Ok(p.concept(&s)?)
}

pub fn parse_kb(text: &str, file: &str) -> Result<Kb> {
    let p = P { file };
    let s = p.single(read_all(text, file)?, "(kb ...)")?;
    p.kb(&s)
}

pub fn parse_query(text: &str, file: &str) -> Result<ParsedQuery> {
    let p = P { file };
    let s = p.single(read_all(text, file)?, "(query ...) or (ucq ...)")?;
    p.parsed_query(&s)
}

/// Query individuals must be ABox individuals.
pub fn check_query_individuals(kb: &Kb, inds: &BTreeSet<Name>) -> Result<()> {
    let known = kb.individuals();
    match inds.iter().find(|a| !known.contains(*a)) {
        Some(a) => Err(Error::Semantic(format!(
            "query individual '{a}' does not occur in the ABox"
        ))),
        None => Ok(()),
    }
}
