//! Knowledge bases: TBox, RBox and ABox.

use std::collections::{BTreeMap, BTreeSet};

use super::concept::Concept;
use super::rbox::RBox;
use super::role::{name, Name, Role};
use crate::error::Error;

/// General concept inclusion `sub ⊑ sup`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Gci {
    pub sub: Concept,
    pub sup: Concept,
}

impl Gci {
    pub fn new(sub: Concept, sup: Concept) -> Gci {
        Gci { sub, sup }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Assertion {
    Instance(Name, Concept),
    Related(Name, Name, Role),
    NotRelated(Name, Name, Role),
    Distinct(Name, Name),
}

impl Assertion {
    pub fn individuals(&self) -> Vec<&Name> {
        match self {
            Assertion::Instance(a, _) => vec![a],
            Assertion::Related(a, b, _)
            | Assertion::NotRelated(a, b, _)
            | Assertion::Distinct(a, b) => vec![a, b],
        }
    }

    pub fn rename(&self, map: &BTreeMap<Name, Name>) -> Assertion {
        let f = |a: &Name| map.get(a).cloned().unwrap_or_else(|| a.clone());
        match self {
            Assertion::Instance(a, c) => Assertion::Instance(f(a), c.clone()),
            Assertion::Related(a, b, r) => Assertion::Related(f(a), f(b), r.clone()),
            Assertion::NotRelated(a, b, r) => Assertion::NotRelated(f(a), f(b), r.clone()),
            Assertion::Distinct(a, b) => Assertion::Distinct(f(a), f(b)),
        }
    }
}

/// Name of the individual added to ABoxes that mention none.
pub const FILLER_INDIVIDUAL: &str = "_a";

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Kb {
    tbox: BTreeSet<Gci>,
    rbox: RBox,
    abox: BTreeSet<Assertion>,
}

impl Kb {
    /// Validates that number restrictions only use simple roles and makes sure
    /// the ABox names at least one individual.
    pub fn new<T, A>(tbox: T, rbox: RBox, abox: A) -> Result<Kb, Error>
    where
        T: IntoIterator<Item = Gci>,
        A: IntoIterator<Item = Assertion>,
    {
        let tbox: BTreeSet<Gci> = tbox.into_iter().collect();
        let mut abox: BTreeSet<Assertion> = abox.into_iter().collect();
        for g in &tbox {
            check_simple(&g.sub, &rbox)?;
            check_simple(&g.sup, &rbox)?;
        }
        for a in &abox {
            if let Assertion::Instance(_, c) = a {
                check_simple(c, &rbox)?;
            }
        }
        if abox.is_empty() {
            abox.insert(Assertion::Instance(name(FILLER_INDIVIDUAL), Concept::Top));
        }
        Ok(Kb { tbox, rbox, abox })
    }

    pub fn tbox(&self) -> &BTreeSet<Gci> {
        &self.tbox
    }

    pub fn rbox(&self) -> &RBox {
        &self.rbox
    }

    pub fn abox(&self) -> &BTreeSet<Assertion> {
        &self.abox
    }

    /// `Ind_A`, never empty.
    pub fn individuals(&self) -> BTreeSet<Name> {
        self.abox.iter().flat_map(|a| a.individuals().into_iter().cloned()).collect()
    }

    pub fn concept_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for g in &self.tbox {
            g.sub.concept_names(&mut out);
            g.sup.concept_names(&mut out);
        }
        for a in &self.abox {
            if let Assertion::Instance(_, c) = a {
                c.concept_names(&mut out);
            }
        }
        out
    }

    pub fn role_names(&self) -> BTreeSet<Name> {
        let mut out = self.rbox.role_names();
        for g in &self.tbox {
            g.sub.role_names(&mut out);
            g.sup.role_names(&mut out);
        }
        for a in &self.abox {
            match a {
                Assertion::Instance(_, c) => c.role_names(&mut out),
                Assertion::Related(_, _, r) | Assertion::NotRelated(_, _, r) => {
                    out.insert(r.name().clone());
                }
                Assertion::Distinct(..) => {}
            }
        }
        out
    }

    /// Same TBox and RBox with extra GCIs and assertions (no re-validation of
    /// simplicity is needed for NNF negations of valid concepts, but it is
    /// cheap, so it is done anyway).
    pub fn extend<T, A>(&self, tbox: T, abox: A) -> Result<Kb, Error>
    where
        T: IntoIterator<Item = Gci>,
        A: IntoIterator<Item = Assertion>,
    {
        let t = self.tbox.iter().cloned().chain(tbox);
        let a = self.abox.iter().cloned().chain(abox);
        Kb::new(t, self.rbox.clone(), a)
    }

    /// Replaces individual names according to `map` (used for ABox partitions).
    pub fn rename_individuals(&self, map: &BTreeMap<Name, Name>) -> Kb {
        Kb {
            tbox: self.tbox.clone(),
            rbox: self.rbox.clone(),
            abox: self.abox.iter().map(|a| a.rename(map)).collect(),
        }
    }
}

fn check_simple(c: &Concept, rbox: &RBox) -> Result<(), Error> {
    if let Concept::AtLeast(_, w, _) | Concept::AtMost(_, w, _) = c {
        for r in w.roles() {
            if !rbox.is_simple(r) {
                return Err(Error::Semantic(format!(
                    "number restriction over non-simple role {r}"
                )));
            }
        }
    }
    for child in c.children() {
        check_simple(child, rbox)?;
    }
    Ok(())
}
