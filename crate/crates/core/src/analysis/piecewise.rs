//! Completing an execution whose reads are partly unsourced without
//! touching `mo`.

use serde::Serialize;

use super::AnalysisError;
use crate::execution::Execution;
use crate::models::{builtin_model, is_consistent, MemoryModel};

/// Where the walk over a location's writes begins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WalkStart {
    /// The `mo`-first write (the init write).
    #[default]
    MoMin,
    MoMax,
}

/// One attempted source for one read.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkStep {
    pub read: String,
    pub write: String,
    pub accepted: bool,
    /// On rejection: 2 when the read reaches itself through `rb;mo?;hb`
    /// (the walk moves `mo`-later), otherwise 1 (it moves `mo`-earlier).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub execution: Execution,
    pub trace: Vec<WalkStep>,
}

fn check_pre(e: &Execution, m: &MemoryModel) -> Result<(), AnalysisError> {
    if !e.mo_is_total() {
        return Err(AnalysisError::Precondition("mo must be total".into()));
    }
    for r in e.missing_rf().iter() {
        if candidates_for(e, r).is_empty() {
            let msg = format!("{} has no write to its location", e.label(r));
            return Err(AnalysisError::Precondition(msg));
        }
    }
    if !is_consistent(m, e)? {
        return Err(AnalysisError::Precondition("the partial execution must be consistent".into()));
    }
    Ok(())
}

/// Same-location writes other than the read itself, in `mo` order.
fn candidates_for(e: &Execution, r: usize) -> Vec<usize> {
    let mut ws: Vec<usize> = e.pretrace().same_loc_writes(r).iter().filter(|&w| w != r).collect();
    ws.sort_by_key(|&w| e.mo().column(w).len());
    ws
}

fn reaches_itself_through_rb(e: &Execution, r: usize) -> Result<bool, AnalysisError> {
    let d = e.derive();
    let path = d.rb.compose(&d.mo.reflexive())?.compose(&d.hb)?;
    Ok(path.contains(r, r))
}

/// The walk that moves `mo`-earlier past a cycle closing through the new
/// edge and `mo`-later past a cycle leaving the read through `rb`. Reads
/// are completed one at a time in event order; `None` when a walk leaves
/// the location's writes or revisits one.
pub fn guided_extension(e: &Execution, m: &MemoryModel, start: WalkStart) -> Result<Option<Extension>, AnalysisError> {
    check_pre(e, m)?;
    let mut cur = e.clone();
    let mut trace = Vec::new();
    for r in e.missing_rf().iter() {
        let ws = candidates_for(e, r);
        let mut visited = vec![false; ws.len()];
        let mut k = match start {
            WalkStart::MoMin => 0isize,
            WalkStart::MoMax => ws.len() as isize - 1,
        };
        loop {
            if k < 0 || k as usize >= ws.len() || visited[k as usize] {
                return Ok(None);
            }
            visited[k as usize] = true;
            let w = ws[k as usize];
            let next = cur.with_rf(r, w);
            let mut step =
                WalkStep { read: e.label(r).to_string(), write: e.label(w).to_string(), accepted: true, case: None };
            if is_consistent(m, &next)? {
                trace.push(step);
                cur = next;
                break;
            }
            step.accepted = false;
            if reaches_itself_through_rb(&next, r)? {
                step.case = Some(2);
                k += 1;
            } else {
                step.case = Some(1);
                k -= 1;
            }
            trace.push(step);
        }
    }
    Ok(Some(Extension { execution: cur, trace }))
}

/// First consistent completion over all source choices, in `mo` order per
/// read with the lowest-numbered read varying slowest.
pub fn exhaustive_extension(e: &Execution, m: &MemoryModel) -> Result<Option<Execution>, AnalysisError> {
    check_pre(e, m)?;
    let reads: Vec<usize> = e.missing_rf().iter().collect();
    let choices: Vec<Vec<usize>> = reads.iter().map(|&r| candidates_for(e, r)).collect();
    let mut idx = vec![0usize; reads.len()];
    loop {
        let mut cand = e.clone();
        for (k, &r) in reads.iter().enumerate() {
            cand = cand.with_rf(r, choices[k][idx[k]]);
        }
        if is_consistent(m, &cand)? {
            return Ok(Some(cand));
        }
        let mut pos = reads.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// A consistent well-formed completion with the same `mo`. Uses the guided
/// walk for SC and exhaustive search for every other model.
pub fn piecewise_extend(e: &Execution, m: &MemoryModel) -> Result<Option<Execution>, AnalysisError> {
    if e.is_well_formed() {
        check_pre(e, m)?;
        return Ok(Some(e.clone()));
    }
    if m.rules == builtin_model("sc")?.rules {
        Ok(guided_extension(e, m, WalkStart::MoMin)?.map(|x| x.execution))
    } else {
        exhaustive_extension(e, m)
    }
}
