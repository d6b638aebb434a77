//! Bounded searches over the corpus for properties relating two models.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{AnalysisError, Finding, MetaProperty, MetaVerdict};
use crate::corpus;
use crate::execution::Execution;
use crate::frontend::{Tid, FINAL_TID, INIT_TID};
use crate::models::{violated_rules, MemoryModel};
use crate::pretrace::{enumerate_pretraces, PreTrace, PretraceOptions};
use crate::transform::{effect_safe, make_effect, EffectSpec, SafetyOptions, TransformError};

/// Counterexamples listed per subject; the rest are only counted.
const LISTED_PER_SUBJECT: usize = 3;

fn push_capped(out: &mut Vec<Finding>, per: &mut BTreeMap<String, usize>, f: Finding) {
    let n = per.entry(f.subject.clone()).or_default();
    *n += 1;
    if *n <= LISTED_PER_SUBJECT {
        out.push(f);
    }
}

/// Every execution `b` accepts, `w` accepts too.
pub fn check_weak(w: &MemoryModel, b: &MemoryModel, corpus: &[(String, Execution)]) -> Result<MetaVerdict, AnalysisError> {
    let hits: Vec<Option<Finding>> = corpus
        .par_iter()
        .map(|(name, e)| {
            let b_ok = violated_rules(b, e)?.is_empty();
            if b_ok && !violated_rules(w, e)?.is_empty() {
                let detail = format!("{e} is {}-consistent, {}-inconsistent", b.name, w.name);
                return Ok(Some(Finding { subject: name.clone(), detail, outcome: Some(e.outcome().to_string()) }));
            }
            Ok(None)
        })
        .collect::<Result<_, AnalysisError>>()?;
    let mut counterexamples = Vec::new();
    let mut per = BTreeMap::new();
    let mut count = 0;
    for f in hits.into_iter().flatten() {
        count += 1;
        push_capped(&mut counterexamples, &mut per, f);
    }
    Ok(MetaVerdict {
        property: MetaProperty::Weak,
        holds: count == 0,
        counterexamples,
        counterexample_count: count,
        witnesses: Vec::new(),
        search_bound: format!("{} executions", corpus.len()),
        checked: corpus.len(),
    })
}

/// For every ordered pair of distinct rules, an execution violating the
/// first and not the second. Unwitnessed pairs are the counterexamples.
pub fn redundancy_witnesses(m: &MemoryModel, corpus: &[(String, Execution)]) -> Result<MetaVerdict, AnalysisError> {
    let violated: Vec<BTreeSet<String>> = corpus
        .par_iter()
        .map(|(_, e)| Ok(violated_rules(m, e)?.into_iter().collect()))
        .collect::<Result<_, AnalysisError>>()?;
    let mut witnesses = Vec::new();
    let mut counterexamples = Vec::new();
    for a in &m.rules {
        for b in &m.rules {
            if a.name == b.name {
                continue;
            }
            let hit = violated.iter().position(|v| v.contains(&a.name) && !v.contains(&b.name));
            let detail = format!("{} without {}", a.name, b.name);
            match hit {
                Some(i) => witnesses.push(Finding {
                    subject: corpus[i].0.clone(),
                    detail,
                    outcome: Some(corpus[i].1.to_string()),
                }),
                None => counterexamples.push(Finding { subject: m.name.clone(), detail, outcome: None }),
            }
        }
    }
    Ok(MetaVerdict {
        property: MetaProperty::NonRedundant,
        holds: counterexamples.is_empty(),
        counterexample_count: counterexamples.len(),
        counterexamples,
        witnesses,
        search_bound: format!("{} executions", corpus.len()),
        checked: corpus.len(),
    })
}

/// A named pre-trace to search effects on.
#[derive(Clone, Debug)]
pub struct Subject {
    pub name: String,
    pub pretrace: PreTrace,
}

/// Every pre-trace of every bundled litmus test.
pub fn corpus_subjects(opts: PretraceOptions) -> Result<Vec<Subject>, AnalysisError> {
    let mut out = Vec::new();
    for (name, _) in corpus::LITMUS {
        for p in enumerate_pretraces(&corpus::program(name), opts)? {
            out.push(Subject { name: name.to_string(), pretrace: p });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Reorder,
    ReorderRr,
    Eliminate,
    Inline,
}

impl EffectKind {
    pub const ALL: [EffectKind; 4] = [EffectKind::Reorder, EffectKind::ReorderRr, EffectKind::Eliminate, EffectKind::Inline];

    pub fn name(self) -> &'static str {
        match self {
            EffectKind::Reorder => "reorder",
            EffectKind::ReorderRr => "reorder_rr",
            EffectKind::Eliminate => "eliminate",
            EffectKind::Inline => "inline",
        }
    }

    pub fn parse(s: &str) -> Option<EffectKind> {
        match s {
            "reorder" => Some(EffectKind::Reorder),
            "reorder_rr" => Some(EffectKind::ReorderRr),
            "eliminate" => Some(EffectKind::Eliminate),
            "inline" => Some(EffectKind::Inline),
            _ => None,
        }
    }

    /// Every edit of this kind that names events of `p`; some may still
    /// fail their preconditions.
    pub fn specs(self, p: &PreTrace) -> Vec<EffectSpec> {
        let thread_events = || (0..p.len()).filter(|&i| !p.event(i).is_init() && !p.event(i).is_final());
        let label = |i: usize| p.label(i).to_string();
        match self {
            EffectKind::Reorder | EffectKind::ReorderRr => thread_events()
                .filter_map(|i| p.po_next(i).map(|j| (i, j)))
                .filter(|&(_, j)| !p.event(j).is_final())
                .map(|(i, j)| {
                    if self == EffectKind::Reorder {
                        EffectSpec::Reorder(label(i), label(j))
                    } else {
                        EffectSpec::ReorderRr(label(i), label(j))
                    }
                })
                .collect(),
            EffectKind::Eliminate => thread_events().map(|i| EffectSpec::Eliminate(label(i))).collect(),
            EffectKind::Inline => {
                let threads: Vec<Tid> = program_threads(p);
                let mut out = Vec::new();
                for &a in &threads {
                    for &b in &threads {
                        if a != b {
                            out.push(EffectSpec::Inline(a, b));
                        }
                    }
                }
                out
            }
        }
    }
}

fn program_threads(p: &PreTrace) -> Vec<Tid> {
    p.threads().into_iter().filter(|&t| t != INIT_TID && t != FINAL_TID && !p.thread_events(t).is_empty()).collect()
}

/// Effects left out of a completeness search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Exclusions {
    /// Skip effects that remove a write.
    pub write_elimination: bool,
}

struct Tally {
    findings: Vec<Finding>,
    checked: usize,
    skipped: usize,
}

fn search_subject(
    m: &MemoryModel,
    b: &MemoryModel,
    s: &Subject,
    kinds: &[EffectKind],
    exclusions: Exclusions,
    opts: SafetyOptions,
) -> Result<Tally, AnalysisError> {
    let mut t = Tally { findings: Vec::new(), checked: 0, skipped: 0 };
    for kind in kinds {
        for spec in kind.specs(&s.pretrace) {
            let tr = match make_effect(&s.pretrace, &spec) {
                Ok(tr) => tr,
                Err(_) => continue,
            };
            if exclusions.write_elimination && tr.eliminates_writes(&s.pretrace) {
                t.skipped += 1;
                continue;
            }
            let base = match effect_safe(b, &s.pretrace, &tr, opts) {
                Ok(r) => r,
                Err(TransformError::NewWrites) | Err(TransformError::Pretrace(_)) => {
                    t.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            t.checked += 1;
            if !base.safe {
                continue;
            }
            let relaxed = effect_safe(m, &s.pretrace, &tr, opts)?;
            if !relaxed.safe {
                let outcome = relaxed.witness.and_then(|w| w.summary().outcome);
                t.findings.push(Finding { subject: s.name.clone(), detail: spec.to_string(), outcome });
            }
        }
    }
    Ok(t)
}

/// Looks for effects safe under `b` but unsafe under `m`. Assumes every
/// `b`-consistent execution is `m`-consistent; check that with
/// [`check_weak`] first.
pub fn complete_search(
    m: &MemoryModel,
    b: &MemoryModel,
    subjects: &[Subject],
    kinds: &[EffectKind],
    exclusions: Exclusions,
    opts: SafetyOptions,
) -> Result<MetaVerdict, AnalysisError> {
    let tallies: Vec<Tally> = subjects
        .par_iter()
        .map(|s| search_subject(m, b, s, kinds, exclusions, opts))
        .collect::<Result<_, _>>()?;
    let mut counterexamples = Vec::new();
    let (mut checked, mut skipped) = (0, 0);
    for t in tallies {
        checked += t.checked;
        skipped += t.skipped;
        counterexamples.extend(t.findings);
    }
    let kinds: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
    let mut bound = format!("{} pre-traces, effects: {}", subjects.len(), kinds.join(" "));
    if exclusions.write_elimination {
        bound.push_str(", write elimination excluded");
    }
    if skipped > 0 {
        bound.push_str(&format!(", {skipped} effects skipped"));
    }
    Ok(MetaVerdict {
        property: MetaProperty::Complete,
        holds: counterexamples.is_empty(),
        counterexample_count: counterexamples.len(),
        counterexamples,
        witnesses: Vec::new(),
        search_bound: bound,
        checked,
    })
}
