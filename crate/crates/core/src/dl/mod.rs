//! SHIQ and SHIQ⊓ syntax: roles, role hierarchies, concepts and knowledge bases.

mod concept;
mod kb;
mod rbox;
mod role;

pub use concept::{Concept, RoleSlot};
pub use kb::{Assertion, Gci, Kb, FILLER_INDIVIDUAL};
pub use rbox::RBox;
pub use role::{inv, name, Name, Role, RoleConj};
