//! Unsafety from crucial sets: a crucial set of a target execution that no
//! crucial set of a comparable source execution fits inside yields a
//! consistent target execution without a consistent source counterpart.
//!
//! Inconsistent target executions are tried first. A consistent target
//! execution counts as having the empty crucial set, which any crucial set
//! of an inconsistent source fails to fit inside; that case is the
//! definition of unsafety itself.

use std::sync::Arc;

use super::{minimal_crucial_sets, piecewise_extend, AnalysisError, CrucialSet};
use crate::execution::{candidates, CandidateOptions, Execution, MoMode};
use crate::models::{is_consistent, MemoryModel};
use crate::pretrace::PreTrace;
use crate::relalg::EventSet;
use crate::transform::{apply_effect, TransformationEffect};

#[derive(Clone, Debug)]
pub struct UnsafetyWitness {
    /// Inconsistent source execution comparable to `target`.
    pub source: Execution,
    /// Inconsistent target execution the construction starts from.
    pub target: Execution,
    /// The crucial set of `target` whose edges are replaced; empty when
    /// `target` is already consistent.
    pub target_crucial: EventSet,
    /// Minimal crucial sets of `source`, restricted to reads the target keeps.
    pub source_crucial: Vec<EventSet>,
    /// The consistent target execution no consistent source execution matches.
    pub extended: Execution,
}

/// Source reads named by their target indices; reads the target lacks drop out.
fn restrict_to_target(set: EventSet, src: &PreTrace, dst: &PreTrace) -> EventSet {
    set.iter().filter_map(|r| dst.index_of(src.label(r))).collect()
}

/// Searches comparable inconsistent pairs for the crucial-set construction
/// and returns the first witness it can certify by enumeration. `None`
/// when no pair yields one; the effect may still be unsafe.
pub fn unsafety_witness(
    p: &PreTrace,
    tr: &TransformationEffect,
    m: &MemoryModel,
    limit: usize,
) -> Result<Option<UnsafetyWitness>, AnalysisError> {
    if tr.eliminates_writes(p) {
        return Err(AnalysisError::Precondition("the construction does not cover write elimination".into()));
    }
    let q = Arc::new(apply_effect(p, tr)?);
    let p = Arc::new(p.clone());
    let mo = if m.forces_inits_first() { MoMode::InitsFirst } else { MoMode::Full };
    let opts = CandidateOptions { limit, mo };
    let mut sources = Vec::new();
    for e in candidates(&p, opts)? {
        let ok = is_consistent(m, &e)?;
        sources.push((e, ok));
    }
    let certified = |t: &Execution| sources.iter().all(|(s, ok)| !ok || !s.comparable(t));
    let mut targets: Vec<(Execution, Vec<CrucialSet>)> = Vec::new();
    let mut consistent_targets = Vec::new();
    for t in candidates(&q, opts)? {
        if !t.mo_is_total() {
            continue;
        }
        if is_consistent(m, &t)? {
            let empty = CrucialSet { reads: EventSet::EMPTY, repaired: t.clone() };
            consistent_targets.push((t, vec![empty]));
        } else {
            let sets = minimal_crucial_sets(&t, m)?;
            if !sets.is_empty() {
                targets.push((t, sets));
            }
        }
    }
    targets.extend(consistent_targets);
    for (t, target_sets) in targets {
        for (s, _) in sources.iter().filter(|(s, ok)| !ok && s.comparable(&t)) {
            let source_crucial: Vec<EventSet> = minimal_crucial_sets(s, m)?
                .into_iter()
                .map(|c| restrict_to_target(c.reads, &p, &q))
                .collect();
            for cr in &target_sets {
                let fits = !source_crucial.is_empty() && source_crucial.iter().all(|c| c.is_subset(cr.reads));
                if fits {
                    continue;
                }
                let Some(extended) = piecewise_extend(&cr.repaired, m)? else { continue };
                if certified(&extended) {
                    return Ok(Some(UnsafetyWitness {
                        source: s.clone(),
                        target: t.clone(),
                        target_crucial: cr.reads,
                        source_crucial,
                        extended,
                    }));
                }
            }
        }
    }
    Ok(None)
}
