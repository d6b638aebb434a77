//! Exhaustive soundness check of read-read reordering over small
//! branch-free programs.
//!
//! Programs are enumerated up to thread permutation and location renaming.
//! Written values do not affect consistency or comparability, so every
//! write stores 1.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;

use super::{AnalysisError, Finding, MetaProperty, MetaVerdict};
use crate::execution::{candidates, CandidateOptions, Execution, MoMode};
use crate::frontend::parse_program;
use crate::models::{is_consistent, MemoryModel};
use crate::pretrace::{enumerate_pretraces, PretraceOptions};
use crate::transform::{apply_effect, make_effect, EffectSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepBound {
    pub threads: usize,
    /// Memory events over all threads, init writes not counted.
    pub events: usize,
    pub locations: usize,
}

impl Default for SweepBound {
    fn default() -> Self {
        SweepBound { threads: 3, events: 6, locations: 3 }
    }
}

impl fmt::Display for SweepBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "≤{} threads, ≤{} memory events, ≤{} locations, written values {{0,1}} (all writes store 1)",
            self.threads, self.events, self.locations
        )
    }
}

/// A memory access: location index and whether it reads.
type Access = (u8, bool);

/// A branch-free program of plain reads and writes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SweepProgram {
    pub threads: Vec<Vec<Access>>,
}

const LOCS: [&str; 3] = ["x", "y", "z"];

impl SweepProgram {
    fn key(threads: &[Vec<Access>]) -> Vec<Vec<Access>> {
        let mut t = threads.to_vec();
        t.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        t
    }

    /// Smallest form over thread orders and location renamings.
    pub fn canonical(&self, locations: usize) -> SweepProgram {
        let mut best: Option<Vec<Vec<Access>>> = None;
        for perm in (0..locations as u8).permutations(locations) {
            let renamed: Vec<Vec<Access>> = self
                .threads
                .iter()
                .map(|t| t.iter().map(|&(l, r)| (perm[l as usize], r)).collect())
                .collect();
            let k = Self::key(&renamed);
            if best.as_ref().is_none_or(|b| k < *b) {
                best = Some(k);
            }
        }
        SweepProgram { threads: best.unwrap_or_default() }
    }

    fn has_read_pair(&self) -> bool {
        self.threads.iter().any(|t| t.windows(2).any(|w| w[0].1 && w[1].1 && w[0].0 != w[1].0))
    }

    fn label(t: usize, k: usize, read: bool) -> String {
        format!("{}{}_{}", if read { "R" } else { "W" }, t + 1, k + 1)
    }

    pub fn source(&self) -> String {
        let used: std::collections::BTreeSet<u8> = self.threads.iter().flatten().map(|a| a.0).collect();
        let init: Vec<String> = used.iter().map(|&l| format!("{} = 0;", LOCS[l as usize])).collect();
        let mut s = format!("init {{ {} }}\n", init.join(" "));
        for (t, th) in self.threads.iter().enumerate() {
            let body: Vec<String> = th
                .iter()
                .enumerate()
                .map(|(k, &(l, r))| {
                    let loc = LOCS[l as usize];
                    if r {
                        format!("{}: r{}_{} = {loc};", Self::label(t, k, true), t + 1, k + 1)
                    } else {
                        format!("{}: {loc} = 1;", Self::label(t, k, false))
                    }
                })
                .collect();
            s.push_str(&format!("thread {} {{ {} }}\n", t + 1, body.join(" ")));
        }
        s
    }

    /// The adjacent pairs of plain reads of different locations.
    pub fn read_pairs(&self) -> Vec<EffectSpec> {
        let mut out = Vec::new();
        for (t, th) in self.threads.iter().enumerate() {
            for k in 1..th.len() {
                let (a, b) = (th[k - 1], th[k]);
                if a.1 && b.1 && a.0 != b.0 {
                    out.push(EffectSpec::ReorderRr(Self::label(t, k - 1, true), Self::label(t, k, true)));
                }
            }
        }
        out
    }
}

impl fmt::Display for SweepProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let threads: Vec<String> = self
            .threads
            .iter()
            .map(|t| t.iter().map(|&(l, r)| format!("{}{}", if r { "R" } else { "W" }, LOCS[l as usize])).join(" "))
            .collect();
        write!(f, "{}", threads.join(" || "))
    }
}

fn sequences(max_len: usize, locations: usize) -> Vec<Vec<Access>> {
    let alphabet: Vec<Access> = (0..locations as u8).flat_map(|l| [(l, false), (l, true)]).collect();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Access>> = vec![Vec::new()];
    for _ in 0..max_len {
        let next: Vec<Vec<Access>> = frontier
            .iter()
            .flat_map(|s| alphabet.iter().map(move |&a| [s.as_slice(), &[a]].concat()))
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Canonical programs within the bound that have a read pair to swap.
pub fn sweep_programs(bound: SweepBound) -> Vec<SweepProgram> {
    let seqs = sequences(bound.events, bound.locations);
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize)> = (0..seqs.len()).map(|i| (vec![i], seqs[i].len())).collect();
    while let Some((picked, total)) = stack.pop() {
        let threads: Vec<Vec<Access>> = picked.iter().map(|&i| seqs[i].clone()).collect();
        let prog = SweepProgram { threads: SweepProgram::key(&threads) };
        if prog.has_read_pair() && prog.canonical(bound.locations) == prog {
            out.push(prog);
        }
        if picked.len() < bound.threads {
            let last = *picked.last().unwrap();
            for (j, s) in seqs.iter().enumerate().skip(last) {
                if total + s.len() <= bound.events {
                    let mut next = picked.clone();
                    next.push(j);
                    stack.push((next, total + s.len()));
                }
            }
        }
    }
    out.sort();
    out
}

/// Unsafe read pairs of one program under `m`, with a witness outcome each.
/// Swapping keeps every event, so comparable executions share `rf` and `mo`
/// by label and each target candidate is checked against its one source
/// candidate.
fn unsafe_pairs(prog: &SweepProgram, m: &MemoryModel) -> Result<Vec<(EffectSpec, String)>, AnalysisError> {
    let program = parse_program(&prog.source()).map_err(|e| AnalysisError::Precondition(e.to_string()))?;
    let p = Arc::new(enumerate_pretraces(&program, PretraceOptions::default())?.remove(0));
    let mode = if m.forces_inits_first() { MoMode::InitsFirst } else { MoMode::Full };
    let sources: Vec<(Execution, bool)> = candidates(&p, CandidateOptions { limit: usize::MAX, mo: mode })?
        .map(|e| {
            let ok = is_consistent(m, &e)?;
            Ok((e, ok))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let mut out = Vec::new();
    for spec in prog.read_pairs() {
        let q = Arc::new(apply_effect(&p, &make_effect(&p, &spec)?)?);
        let map: Vec<Option<usize>> = (0..p.len()).map(|i| q.index_of(p.label(i))).collect();
        for (s, ok) in &sources {
            if *ok {
                continue;
            }
            let t = Execution::new_unchecked(q.clone(), s.rf().remap(q.len(), &map), s.mo().remap(q.len(), &map));
            if is_consistent(m, &t)? {
                out.push((spec.clone(), t.outcome().to_string()));
                break;
            }
        }
    }
    Ok(out)
}

/// Every swap of adjacent reads of different locations, in every program
/// within the bound, is safe under `m`.
pub fn check_sound_rr(m: &MemoryModel, bound: SweepBound) -> Result<MetaVerdict, AnalysisError> {
    const LISTED: usize = 50;
    let programs = sweep_programs(bound);
    let effects: usize = programs.iter().map(|p| p.read_pairs().len()).sum();
    let found: Vec<Vec<Finding>> = programs
        .par_iter()
        .map(|prog| {
            Ok(unsafe_pairs(prog, m)?
                .into_iter()
                .map(|(spec, outcome)| Finding { subject: prog.to_string(), detail: spec.to_string(), outcome: Some(outcome) })
                .collect())
        })
        .collect::<Result<_, AnalysisError>>()?;
    let all: Vec<Finding> = found.into_iter().flatten().collect();
    Ok(MetaVerdict {
        property: MetaProperty::Sound,
        holds: all.is_empty(),
        counterexample_count: all.len(),
        counterexamples: all.into_iter().take(LISTED).collect(),
        witnesses: Vec::new(),
        search_bound: format!("{bound}; {} programs, {effects} effects", programs.len()),
        checked: effects,
    })
}
