//! Seeded random generators for knowledge bases, queries and
//! interpretations over a small signature.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shiq_core::dl::{name, Assertion, Concept, Gci, Kb, Name, RBox, Role, RoleConj};
use shiq_core::oracle::FiniteInterpretation;
use shiq_core::query::{Atom, Query, Term, Ucq};

pub const CONCEPTS: [&str; 3] = ["A", "B", "C"];
pub const ROLES: [&str; 3] = ["r", "s", "t"];
pub const INDIVIDUALS: [&str; 3] = ["a", "b", "c"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn role(rng: &mut StdRng) -> Role {
    let n = name(ROLES[rng.random_range(0..ROLES.len())]);
    Role::from_name(n, rng.random_bool(0.3))
}

/// A role conjunction of one or two roles; `simple` keeps it usable in
/// number restrictions.
pub fn conj(rng: &mut StdRng, rbox: &RBox, simple: bool) -> Option<RoleConj> {
    let k = if rng.random_bool(0.7) { 1 } else { 2 };
    let roles: Vec<Role> = (0..k).map(|_| role(rng)).collect();
    if simple && roles.iter().any(|r| !rbox.is_simple(r)) {
        return None;
    }
    RoleConj::new(roles)
}

/// An RBox over the signature; `transitive` allows transitivity axioms.
pub fn rbox(rng: &mut StdRng, transitive: bool) -> RBox {
    let mut inclusions = Vec::new();
    for _ in 0..rng.random_range(0..3) {
        let (r, s) = (role(rng), role(rng));
        if r != s {
            inclusions.push((r, s));
        }
    }
    let trans: Vec<Name> = if transitive {
        ROLES.iter().filter(|_| rng.random_bool(0.3)).map(|n| name(n)).collect()
    } else {
        vec![]
    };
    RBox::new(inclusions, trans)
}

/// A concept of the given depth; number restrictions only use simple roles.
pub fn concept(rng: &mut StdRng, rbox: &RBox, depth: usize) -> Concept {
    let atomic = |rng: &mut StdRng| Concept::atomic(CONCEPTS[rng.random_range(0..CONCEPTS.len())]);
    if depth == 0 {
        return match rng.random_range(0..6) {
            0 => Concept::Top,
            1 => Concept::not(atomic(rng)),
            _ => atomic(rng),
        };
    }
    loop {
        let sub = |rng: &mut StdRng| {
            let d = rng.random_range(0..depth);
            concept(rng, rbox, d)
        };
        let c = match rng.random_range(0..8) {
            0 => Concept::not(sub(rng)),
            1 => Concept::and([sub(rng), sub(rng)]),
            2 => Concept::or([sub(rng), sub(rng)]),
            3 => match conj(rng, rbox, false) {
                Some(w) => Concept::exists(w, sub(rng)),
                None => continue,
            },
            4 => match conj(rng, rbox, false) {
                Some(w) => Concept::forall(w, sub(rng)),
                None => continue,
            },
            5 => match conj(rng, rbox, true) {
                Some(w) => Concept::at_least(rng.random_range(1..3), w, sub(rng)),
                None => continue,
            },
            6 => match conj(rng, rbox, true) {
                Some(w) => Concept::at_most(rng.random_range(0..2), w, sub(rng)),
                None => continue,
            },
            _ => atomic(rng),
        };
        return c;
    }
}

/// A concept built only from single roles, as allowed in SHIQ axioms.
pub fn shiq_concept(rng: &mut StdRng, rbox: &RBox, depth: usize) -> Concept {
    loop {
        let c = concept(rng, rbox, depth);
        if single_roles(&c) {
            return c;
        }
    }
}

fn single_roles(c: &Concept) -> bool {
    c.role_slot().is_none_or(|w| w.len() == 1) && c.children().into_iter().all(single_roles)
}

pub fn individual(rng: &mut StdRng, n: usize) -> Name {
    name(INDIVIDUALS[rng.random_range(0..n)])
}

/// A small KB: up to two GCIs and up to three assertions over `n`
/// individuals.
pub fn kb(rng: &mut StdRng, transitive: bool) -> Kb {
    let rb = rbox(rng, transitive);
    let n = rng.random_range(1..=3);
    let tbox: Vec<Gci> = (0..rng.random_range(0..3))
        .map(|_| {
            let sub = if rng.random_bool(0.5) { Concept::atomic(CONCEPTS[rng.random_range(0..3)]) } else { shiq_concept(rng, &rb, 1) };
            Gci::new(sub, shiq_concept(rng, &rb, 2))
        })
        .collect();
    let abox: Vec<Assertion> = (0..rng.random_range(1..=3))
        .map(|_| match rng.random_range(0..3) {
            0 => Assertion::Related(individual(rng, n), individual(rng, n), role(rng)),
            _ => Assertion::Instance(individual(rng, n), shiq_concept(rng, &rb, 1)),
        })
        .collect();
    Kb::new(tbox, rb, abox).expect("generated concepts only restrict simple roles")
}

pub const VARIABLES: [&str; 4] = ["x", "y", "z", "w"];

/// A query with up to `max_atoms` atoms over `vars` variables; individuals
/// are drawn from `inds`.
pub fn query(rng: &mut StdRng, vars: usize, max_atoms: usize, inds: &[Name]) -> Query {
    let term = |rng: &mut StdRng| {
        if !inds.is_empty() && rng.random_bool(0.15) {
            Term::Ind(inds[rng.random_range(0..inds.len())].clone())
        } else {
            Term::var(VARIABLES[rng.random_range(0..vars)])
        }
    };
    let atoms: Vec<Atom> = (0..rng.random_range(1..=max_atoms))
        .map(|_| {
            if rng.random_bool(0.65) {
                Atom::role(Role::named(ROLES[rng.random_range(0..3)]), term(rng), term(rng))
            } else {
                Atom::concept(Concept::atomic(CONCEPTS[rng.random_range(0..3)]), term(rng))
            }
        })
        .collect();
    Query::build(atoms)
}

pub fn ucq(rng: &mut StdRng, kb: &Kb) -> Ucq {
    let inds: Vec<Name> = kb.individuals().into_iter().collect();
    let k = if rng.random_bool(0.8) { 1 } else { 2 };
    Ucq::new((0..k).map(|_| query(rng, 3, 4, &inds)).collect()).expect("non-empty union")
}

/// A random interpretation with `size` elements, closed under `rbox`.
pub fn interpretation(rng: &mut StdRng, size: usize, rbox: &RBox) -> FiniteInterpretation {
    let mut i = FiniteInterpretation { size, ..Default::default() };
    for c in CONCEPTS {
        let ext: BTreeSet<usize> = (0..size).filter(|_| rng.random_bool(0.4)).collect();
        i.concepts.insert(name(c), ext);
    }
    for r in ROLES {
        let ext = (0..size).flat_map(|d| (0..size).map(move |e| (d, e))).filter(|_| rng.random_bool(0.3)).collect();
        i.roles.insert(name(r), ext);
    }
    i.close_under(rbox);
    i
}
