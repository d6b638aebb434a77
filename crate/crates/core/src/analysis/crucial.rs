use super::AnalysisError;
use crate::execution::Execution;
use crate::models::{is_consistent, MemoryModel};
use crate::relalg::EventSet;

/// Reads whose `rf` edges, once deleted, leave a consistent execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrucialSet {
    pub reads: EventSet,
    /// The source execution without those edges; not well formed.
    pub repaired: Execution,
}

impl CrucialSet {
    pub fn labels(&self) -> Vec<String> {
        self.reads.iter().map(|r| self.repaired.label(r).to_string()).collect()
    }
}

const MAX_SOURCED_READS: usize = 20;

/// Subsets of `set` in order of size, then by bits.
fn subsets_by_size(set: EventSet) -> Vec<EventSet> {
    let elems: Vec<usize> = set.iter().collect();
    let mut out: Vec<EventSet> = (0u64..1 << elems.len())
        .map(|mask| elems.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect())
        .collect();
    out.sort_by_key(|s: &EventSet| (s.len(), s.0));
    out
}

fn search(e: &Execution, m: &MemoryModel, minimal: bool) -> Result<Vec<CrucialSet>, AnalysisError> {
    if is_consistent(m, e)? {
        return Err(AnalysisError::Precondition("crucial sets need an inconsistent execution".into()));
    }
    let sourced: EventSet = e.pretrace().reads().iter().filter(|&r| e.rf_source(r).is_some()).collect();
    if sourced.len() > MAX_SOURCED_READS {
        return Err(AnalysisError::TooManyReads(sourced.len()));
    }
    let mut out: Vec<CrucialSet> = Vec::new();
    for s in subsets_by_size(sourced) {
        if s.is_empty() || (minimal && out.iter().any(|c| c.reads.is_subset(s))) {
            continue;
        }
        let repaired = e.without_rf(s);
        if is_consistent(m, &repaired)? {
            out.push(CrucialSet { reads: s, repaired });
        }
    }
    Ok(out)
}

/// Every crucial set, smallest first.
pub fn crucial_sets(e: &Execution, m: &MemoryModel) -> Result<Vec<CrucialSet>, AnalysisError> {
    search(e, m, false)
}

/// Crucial sets with no crucial proper subset.
pub fn minimal_crucial_sets(e: &Execution, m: &MemoryModel) -> Result<Vec<CrucialSet>, AnalysisError> {
    search(e, m, true)
}
