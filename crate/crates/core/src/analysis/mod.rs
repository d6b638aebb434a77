//! Reasoning about inconsistent executions and about models as a whole:
//! crucial read sets, the reads each rule's cycles depend on, extending
//! executions with missing read sources, constructive unsafety witnesses,
//! cycle shapes, and bounded searches for weakness, soundness,
//! completeness and rule redundancy.

mod cra;
mod crucial;
mod meta;
mod piecewise;
mod shapes;
mod sweep;
mod witness;

pub use cra::{cra_bruteforce, cra_literal, cra_sc_closed_form, sc_rule_body, SC_RULES};
pub use crucial::{crucial_sets, minimal_crucial_sets, CrucialSet};
pub use meta::{
    check_weak, complete_search, corpus_subjects, redundancy_witnesses, EffectKind, Exclusions, Subject,
};
pub use piecewise::{exhaustive_extension, guided_extension, piecewise_extend, Extension, WalkStart, WalkStep};
pub use shapes::{classify_cycle_shapes, shape_instances, Shape, ShapeInstance};
pub use sweep::{check_sound_rr, sweep_programs, SweepBound};
pub use witness::{unsafety_witness, UnsafetyWitness};

use serde::Serialize;
use thiserror::Error;

use crate::execution::ExecError;
use crate::models::ModelError;
use crate::pretrace::PretraceError;
use crate::relalg::RelError;
use crate::transform::TransformError;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown rule `{0}` (expected one of a, b, c, d, e)")]
    UnknownRule(String),
    #[error("{0} read subsets are too many to search")]
    TooManyReads(usize),
    #[error(transparent)]
    Relation(#[from] RelError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Pretrace(#[from] PretraceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaProperty {
    Weak,
    Sound,
    Complete,
    NonRedundant,
}

/// One hit of a search: where it was found and what it shows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub subject: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetaVerdict {
    pub property: MetaProperty,
    pub holds: bool,
    pub counterexamples: Vec<Finding>,
    /// Counterexamples found, including any not listed.
    pub counterexample_count: usize,
    /// Positive evidence, where the property asks for some.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Finding>,
    pub search_bound: String,
    /// Items examined (executions, effects or programs).
    pub checked: usize,
}
