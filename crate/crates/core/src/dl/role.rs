//! Role names, roles (names or their inverses) and role conjunctions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned-by-sharing identifier used for concept, role and individual names.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A role name or the inverse of a role name. Double inversion is never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    name: Name,
    inverse: bool,
}

impl Role {
    pub fn named(n: &str) -> Role {
        Role { name: name(n), inverse: false }
    }

    pub fn from_name(name: Name, inverse: bool) -> Role {
        Role { name, inverse }
    }

    pub fn inverse_of(n: &str) -> Role {
        Role { name: name(n), inverse: true }
    }

    pub fn name(&self) -> &Name {
        &self.name
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn inv(&self) -> Role {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }
}

/// `Inv(r)`.
pub fn inv(r: &Role) -> Role {
    r.inv()
}

impl fmt::Debug for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}⁻", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// A non-empty set of roles `r1 ⊓ … ⊓ rn`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleConj(BTreeSet<Role>);

impl RoleConj {
    /// Returns `None` for an empty set of roles.
    pub fn new<I: IntoIterator<Item = Role>>(roles: I) -> Option<RoleConj> {
        let set: BTreeSet<Role> = roles.into_iter().collect();
        if set.is_empty() {
            None
        } else {
            Some(RoleConj(set))
        }
    }

    pub fn single(r: Role) -> RoleConj {
        RoleConj(BTreeSet::from([r]))
    }

    pub fn roles(&self) -> &BTreeSet<Role> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The conjunction of the inverses, i.e. the same relation read backwards.
    pub fn inv(&self) -> RoleConj {
        RoleConj(self.0.iter().map(Role::inv).collect())
    }

    pub fn as_single(&self) -> Option<&Role> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }
}

impl From<Role> for RoleConj {
    fn from(r: Role) -> Self {
        RoleConj::single(r)
    }
}

impl fmt::Debug for RoleConj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "{}", parts.join(" ⊓ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_is_an_involution() {
        let r = Role::named("r");
        assert_eq!(inv(&r), Role::inverse_of("r"));
        assert_eq!(inv(&Role::inverse_of("r")), r);
        assert_eq!(inv(&inv(&Role::named("s"))), Role::named("s"));
    }

    #[test]
    fn conjunction_is_a_set() {
        let w = RoleConj::new([Role::named("r"), Role::named("r"), Role::inverse_of("s")]).unwrap();
        assert_eq!(w.len(), 2);
        assert!(RoleConj::new([]).is_none());
        assert_eq!(w.inv().inv(), w);
    }
}
