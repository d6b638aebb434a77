use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{apply_effect, diff_effect, TransformError, TransformationEffect};
use crate::execution::{candidates, CandidateOptions, Execution, MoMode};
use crate::frontend::Program;
use crate::models::{is_consistent, MemoryModel};
use crate::pretrace::{enumerate_pretraces, pretraces_comparable, PreTrace, PretraceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SafetyOptions {
    pub candidate_limit: usize,
    pub pretraces: PretraceOptions,
    pub semantic_guards: bool,
    /// Check effects whose target has candidates with no comparable source
    /// candidate instead of refusing them.
    pub force: bool,
}

impl Default for SafetyOptions {
    fn default() -> Self {
        SafetyOptions {
            candidate_limit: 1_000_000,
            pretraces: PretraceOptions::default(),
            semantic_guards: false,
            force: false,
        }
    }
}

/// Why an effect or program transformation is unsafe.
#[derive(Clone, Debug)]
pub enum SafetyWitness {
    /// A consistent target execution whose comparable source executions are
    /// all inconsistent (possibly none exist). When the model forces init
    /// writes first, only source candidates ordered that way are listed.
    Execution { transformed: Execution, comparable: Vec<Execution> },
    /// A target pre-trace with no comparable source pre-trace.
    NoComparablePretrace { transformed: PreTrace },
}

#[derive(Clone, Debug)]
pub struct SafetyReport {
    pub safe: bool,
    pub witness: Option<SafetyWitness>,
    /// Pre-trace pairs examined.
    pub checked_pairs: usize,
    /// The effect of the failing pair, when there is one.
    pub effect: Option<TransformationEffect>,
}

impl SafetyReport {
    fn safe(checked_pairs: usize) -> Self {
        SafetyReport { safe: true, witness: None, checked_pairs, effect: None }
    }
}

/// Summary of a witness for reports.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub kind: &'static str,
    pub outcome: Option<String>,
    pub execution: Option<String>,
    pub comparable: Vec<String>,
    pub branches: Vec<String>,
}

impl SafetyWitness {
    pub fn summary(&self) -> WitnessSummary {
        match self {
            SafetyWitness::Execution { transformed, comparable } => WitnessSummary {
                kind: "inconsistent_source",
                outcome: Some(transformed.outcome().to_string()),
                execution: Some(transformed.to_string()),
                comparable: comparable.iter().map(|e| e.to_string()).collect(),
                branches: Vec::new(),
            },
            SafetyWitness::NoComparablePretrace { transformed } => WitnessSummary {
                kind: "no_comparable_pretrace",
                outcome: None,
                execution: None,
                comparable: Vec::new(),
                branches: transformed
                    .branches()
                    .iter()
                    .map(|b| format!("{}={}", b.id, if b.taken { "then" } else { "else" }))
                    .collect(),
            },
        }
    }
}

/// Matches executions of two pre-traces on what comparability looks at:
/// the source label of every common read and the coherence order of the
/// common writes.
struct KeyMap {
    p_reads: Vec<usize>,
    q_reads: Vec<usize>,
    p_writes: Vec<usize>,
    q_writes: Vec<usize>,
}

type Key = (Vec<Option<u16>>, Vec<u16>);

impl KeyMap {
    fn new(p: &PreTrace, q: &PreTrace) -> Self {
        let mut km = KeyMap { p_reads: vec![], q_reads: vec![], p_writes: vec![], q_writes: vec![] };
        for r in p.reads().iter() {
            if let Some(r2) = q.index_of(p.label(r)).filter(|&r2| q.reads().contains(r2)) {
                km.p_reads.push(r);
                km.q_reads.push(r2);
            }
        }
        for w in p.writes().iter() {
            if let Some(w2) = q.index_of(p.label(w)).filter(|&w2| q.writes().contains(w2)) {
                km.p_writes.push(w);
                km.q_writes.push(w2);
            }
        }
        km
    }

    /// Sources are named by their position among `p`'s events, with
    /// writes absent from `p` mapped past the end.
    fn key(&self, e: &Execution, reads: &[usize], writes: &[usize], p: &PreTrace) -> Key {
        let pre = e.pretrace();
        let src = reads
            .iter()
            .map(|&r| {
                e.rf_source(r).map(|w| match p.index_of(pre.label(w)) {
                    Some(i) => i as u16,
                    None => u16::MAX - w as u16,
                })
            })
            .collect();
        let mut ws: Vec<(usize, u16)> =
            writes.iter().enumerate().map(|(k, &w)| (e.mo().column(w).len(), k as u16)).collect();
        ws.sort_unstable();
        (src, ws.into_iter().map(|(_, k)| k).collect())
    }

    fn p_key(&self, e: &Execution) -> Key {
        self.key(e, &self.p_reads, &self.p_writes, e.pretrace())
    }

    fn q_key(&self, e: &Execution, p: &PreTrace) -> Key {
        self.key(e, &self.q_reads, &self.q_writes, p)
    }
}

fn mo_mode(m: Option<&MemoryModel>) -> MoMode {
    match m {
        Some(m) if m.forces_inits_first() => MoMode::InitsFirst,
        _ => MoMode::Full,
    }
}

/// Every candidate of `q` has a comparable candidate of `p`. Exact; when
/// `q` adds no write the answer is yes without enumeration, since each
/// candidate of `q` restricts to common events and extends to `p`.
pub fn check_no_new_writes(p: &PreTrace, q: &PreTrace, limit: usize) -> Result<bool, TransformError> {
    let adds_write = q.writes().iter().any(|w| p.index_of(q.label(w)).is_none());
    if !adds_write {
        return Ok(true);
    }
    let (p, q) = (Arc::new(p.clone()), Arc::new(q.clone()));
    let km = KeyMap::new(&p, &q);
    let opts = CandidateOptions { limit, mo: MoMode::Full };
    let keys: HashSet<Key> = candidates(&p, opts)?.map(|e| km.p_key(&e)).collect();
    for e in candidates(&q, opts)? {
        if !keys.contains(&km.q_key(&e, &p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every `m`-consistent candidate of the transformed pre-trace has a
/// comparable `m`-consistent candidate of `p`.
pub fn effect_safe(
    m: &MemoryModel,
    p: &PreTrace,
    tr: &TransformationEffect,
    opts: SafetyOptions,
) -> Result<SafetyReport, TransformError> {
    let q = apply_effect(p, tr)?;
    let mut report = pair_safe(m, p, &q, opts)?;
    if !report.safe {
        report.effect = Some(tr.clone());
    }
    Ok(report)
}

fn pair_safe(m: &MemoryModel, p: &PreTrace, q: &PreTrace, opts: SafetyOptions) -> Result<SafetyReport, TransformError> {
    if !opts.force && !check_no_new_writes(p, q, opts.candidate_limit)? {
        log::warn!("the transformed pre-trace can read values the source cannot produce");
        return Err(TransformError::NewWrites);
    }
    let (p, q) = (Arc::new(p.clone()), Arc::new(q.clone()));
    let km = KeyMap::new(&p, &q);
    let copts = CandidateOptions { limit: opts.candidate_limit, mo: mo_mode(Some(m)) };
    let mut consistent_keys: HashMap<Key, bool> = HashMap::new();
    for e in candidates(&p, copts)? {
        let ok = is_consistent(m, &e)?;
        let slot = consistent_keys.entry(km.p_key(&e)).or_insert(false);
        *slot |= ok;
    }
    for e in candidates(&q, copts)? {
        if consistent_keys.get(&km.q_key(&e, &p)) == Some(&true) || !is_consistent(m, &e)? {
            continue;
        }
        let comparable: Vec<Execution> = candidates(&p, copts)?.filter(|c| e.comparable(c)).collect();
        return Ok(SafetyReport {
            safe: false,
            witness: Some(SafetyWitness::Execution { transformed: e, comparable }),
            checked_pairs: 1,
            effect: None,
        });
    }
    Ok(SafetyReport::safe(1))
}

/// Checks a program transformation: every pre-trace of `after` needs a
/// comparable pre-trace of `before`, and the effect between every
/// comparable pair must be safe. Reports the first failure in enumeration
/// order.
pub fn transformation_safe(
    m: &MemoryModel,
    before: &Program,
    after: &Program,
    opts: SafetyOptions,
) -> Result<SafetyReport, TransformError> {
    let ps = enumerate_pretraces(before, opts.pretraces)?;
    let qs = enumerate_pretraces(after, opts.pretraces)?;
    let mut pairs = Vec::new();
    for q in &qs {
        let matching: Vec<&PreTrace> =
            ps.iter().filter(|p| pretraces_comparable(p, q, opts.semantic_guards)).collect();
        if matching.is_empty() {
            return Ok(SafetyReport {
                safe: false,
                witness: Some(SafetyWitness::NoComparablePretrace { transformed: q.clone() }),
                checked_pairs: pairs.len(),
                effect: None,
            });
        }
        pairs.extend(matching.into_iter().map(|p| (p, q)));
    }
    let results: Vec<Result<(SafetyReport, TransformationEffect), TransformError>> = pairs
        .par_iter()
        .map(|(p, q)| {
            let tr = diff_effect(p, q)?;
            Ok((pair_safe(m, p, q, opts)?, tr))
        })
        .collect();
    let checked = pairs.len();
    for r in results {
        let (mut report, tr) = r?;
        if !report.safe {
            report.checked_pairs = checked;
            report.effect = Some(tr);
            return Ok(report);
        }
    }
    Ok(SafetyReport::safe(checked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::models::builtin_model;
    use crate::transform::{make_effect, EffectSpec};

    fn pt(src: &str) -> PreTrace {
        enumerate_pretraces(&parse_program(src).unwrap(), PretraceOptions::default()).unwrap().remove(0)
    }

    const SB: &str = "init { x = 0; y = 0; } thread 1 { W1: x = 1; R1: a = y; } thread 2 { W2: y = 1; R2: b = x; }";

    #[test]
    fn store_buffering_reorder_is_unsafe_under_sc() {
        let p = pt(SB);
        let tr = make_effect(&p, &EffectSpec::Reorder("W1".into(), "R1".into())).unwrap();
        let r = effect_safe(&builtin_model("sc").unwrap(), &p, &tr, SafetyOptions::default()).unwrap();
        assert!(!r.safe);
        let Some(SafetyWitness::Execution { transformed, .. }) = r.witness else { panic!() };
        assert_eq!(transformed.outcome().to_string(), "a=0 b=0");
        let r = effect_safe(&builtin_model("tso").unwrap(), &p, &tr, SafetyOptions::default()).unwrap();
        assert!(r.safe);
    }

    #[test]
    fn removing_a_write_adds_no_writes() {
        let p = pt(SB);
        let tr = make_effect(&p, &EffectSpec::Eliminate("W1".into())).unwrap();
        let q = apply_effect(&p, &tr).unwrap();
        assert!(check_no_new_writes(&p, &q, 1_000_000).unwrap());
    }

    #[test]
    fn observable_fresh_write_is_detected() {
        let p = pt("init { x = 0; } thread 1 { A: a = x; } thread 2 { B: b = x; }");
        let spec = EffectSpec::Introduce { label: "N".into(), loc: "x".into(), value: 7, after: Some("A".into()), before: None };
        let tr = make_effect(&p, &spec).unwrap();
        let q = apply_effect(&p, &tr).unwrap();
        assert!(!check_no_new_writes(&p, &q, 1_000_000).unwrap());
        let err = effect_safe(&builtin_model("sc").unwrap(), &p, &tr, SafetyOptions::default()).unwrap_err();
        assert_eq!(err, TransformError::NewWrites);
    }
}
