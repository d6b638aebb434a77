//! Finite relations over event universes and a small expression language
//! (sequence, union, inverse, option, closure, difference, identity filters
//! and location-bound patterns) evaluated against an environment of atoms.

mod expr;
mod relation;
mod witness;

pub use expr::{eval, Atom, Env, EventClass, EventMeta, Pattern, PatternOptions, RelExpr, Universe};
pub use relation::{EventSet, Relation, MAX_EVENTS};
pub use witness::{reflexive_witness, reflexive_witness_at, shortest_path, Cycle, Hop};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RelError {
    #[error("universe mismatch: {0} vs {1} events")]
    UniverseMismatch(usize, usize),
    #[error("universe of {0} events exceeds the 64-event limit")]
    TooLarge(usize),
    #[error("unbound atom `{0}`")]
    UnboundAtom(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
}
