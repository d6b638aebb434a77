//! Transformation effects on pre-traces: removed and added events, removed
//! and added program-order pairs, and an optional thread renaming.
//!
//! Program order is handled as a closed relation. Applying an effect takes
//! the closed order of the source, drops the `po_minus` pairs and every pair
//! touching a removed event, adds `po_plus`, orders new events after the
//! init writes and before the final reads, and closes again. A removed pair
//! survives if the remaining pairs still imply it.

mod parse;
mod safety;

pub use parse::{parse_effects, EffectSpec};
pub use safety::{
    check_no_new_writes, effect_safe, transformation_safe, SafetyOptions, SafetyReport, SafetyWitness,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::execution::ExecError;
use crate::frontend::{Tid, FINAL_TID, INIT_TID};
use crate::pretrace::{Event, EventKind, PreTrace, PretraceError, Step};
use crate::relalg::{RelError, Relation};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("added event `{0}` clashes with an existing label")]
    LabelClash(String),
    #[error("label `{0}` names different events in the two pre-traces")]
    LabelConflict(String),
    #[error("thread {0} is mapped to both {1} and {2}")]
    RemapConflict(Tid, Tid, Tid),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("{0} and {1} are not adjacent in program order")]
    NotAdjacent(String, String),
    #[error("{0} and {1} access the same location")]
    SameLocation(String, String),
    #[error("{0} is not a plain read")]
    NotRead(String),
    #[error("thread {0} does not exist")]
    UnknownThread(Tid),
    #[error("cannot inline thread {0} into itself")]
    SelfInline(Tid),
    #[error("effect syntax: {0}")]
    Syntax(String),
    #[error("the transformed pre-trace has executions with no comparable source candidate (new writes are observable); pass force to check anyway")]
    NewWrites,
    #[error(transparent)]
    Pretrace(#[from] PretraceError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Relation(#[from] RelError),
}

type LabelPair = (String, String);

/// An edit of one pre-trace. Pairs are event labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransformationEffect {
    pub st_minus: BTreeSet<String>,
    pub st_plus: Vec<Event>,
    pub po_minus: BTreeSet<(String, String)>,
    pub po_plus: BTreeSet<(String, String)>,
    pub tid_remap: BTreeMap<Tid, Tid>,
}

impl TransformationEffect {
    pub fn is_empty(&self) -> bool {
        self.st_minus.is_empty()
            && self.st_plus.is_empty()
            && self.po_minus.is_empty()
            && self.po_plus.is_empty()
            && self.tid_remap.is_empty()
    }

    /// Removes at least one write of the source.
    pub fn eliminates_writes(&self, p: &PreTrace) -> bool {
        self.st_minus.iter().any(|l| p.index_of(l).is_some_and(|i| p.event(i).is_write()))
    }

    /// Adds at least one write.
    pub fn introduces_writes(&self) -> bool {
        self.st_plus.iter().any(Event::is_write)
    }

    /// `po_minus` and `po_plus` without the pairs implied by transitivity.
    pub fn reduced(&self) -> (Vec<LabelPair>, Vec<LabelPair>) {
        (reduce_pairs(&self.po_minus), reduce_pairs(&self.po_plus))
    }

    /// Pairs `(r, w)` of `po_minus` with `r` a read and `w` a write in `p`.
    pub fn removes_read_write_order(&self, p: &PreTrace) -> bool {
        self.po_minus.iter().any(|(a, b)| {
            match (p.index_of(a), p.index_of(b)) {
                (Some(a), Some(b)) => p.event(a).is_read() && p.event(b).is_write(),
                _ => false,
            }
        })
    }
}

fn reduce_pairs(pairs: &BTreeSet<(String, String)>) -> Vec<(String, String)> {
    let labels: Vec<&String> = pairs.iter().flat_map(|(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
    let ix = |l: &String| labels.iter().position(|x| *x == l).unwrap();
    let rel = Relation::from_pairs(labels.len(), pairs.iter().map(|(a, b)| (ix(a), ix(b))));
    let closed = rel.transitive_closure();
    // a pair is implied when some path of two or more steps inside the set
    // produces it; only drop those when the set is itself acyclic
    if !closed.is_irreflexive() {
        return pairs.iter().cloned().collect();
    }
    let keep = closed.transitive_reduction();
    pairs.iter().filter(|(a, b)| keep.contains(ix(a), ix(b))).cloned().collect()
}

impl fmt::Display for TransformationEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (minus, plus) = self.reduced();
        let pairs = |v: &[(String, String)]| v.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ");
        let minus_ev: Vec<&str> = self.st_minus.iter().map(String::as_str).collect();
        let plus_ev: Vec<String> = self.st_plus.iter().map(|e| e.to_string()).collect();
        writeln!(f, "st-: {{{}}}", minus_ev.join(", "))?;
        writeln!(f, "st+: {{{}}}", plus_ev.join(", "))?;
        writeln!(f, "po-: {{{}}}", pairs(&minus))?;
        writeln!(f, "po+: {{{}}}", pairs(&plus))?;
        if !self.tid_remap.is_empty() {
            let m: Vec<String> = self.tid_remap.iter().map(|(a, b)| format!("T{a}->T{b}")).collect();
            writeln!(f, "threads: {}", m.join(" "))?;
        }
        Ok(())
    }
}

fn po_pairs(p: &PreTrace) -> BTreeSet<(String, String)> {
    p.po().pairs().map(|(a, b)| (p.label(a).to_string(), p.label(b).to_string())).collect()
}

/// Applies `tr` to `p`. The result is validated as a pre-trace: program
/// order must stay acyclic and total within each thread.
pub fn apply_effect(p: &PreTrace, tr: &TransformationEffect) -> Result<PreTrace, TransformError> {
    for l in &tr.st_minus {
        if p.index_of(l).is_none() {
            return Err(TransformError::UnknownEvent(l.clone()));
        }
    }
    let mut events: Vec<Event> = p.events().iter().filter(|e| !tr.st_minus.contains(&e.id)).cloned().collect();
    for e in &tr.st_plus {
        if events.iter().any(|x| x.id == e.id) {
            return Err(TransformError::LabelClash(e.id.clone()));
        }
        events.push(e.clone());
    }
    for e in events.iter_mut() {
        if let Some(&t) = tr.tid_remap.get(&e.tid) {
            e.tid = t;
        }
    }
    let index: BTreeMap<&str, usize> = events.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let ix = |l: &str| index.get(l).copied().ok_or_else(|| TransformError::UnknownEvent(l.to_string()));
    let mut po = Relation::empty(events.len());
    for (a, b) in po_pairs(p) {
        if tr.po_minus.contains(&(a.clone(), b.clone())) {
            continue;
        }
        if let (Some(&a), Some(&b)) = (index.get(a.as_str()), index.get(b.as_str())) {
            po.insert(a, b);
        }
    }
    for (a, b) in &tr.po_plus {
        po.insert(ix(a)?, ix(b)?);
    }
    for (i, a) in events.iter().enumerate() {
        for (j, b) in events.iter().enumerate() {
            let auto = (a.is_init() && !b.is_init()) || (!a.is_final() && b.is_final());
            if auto {
                po.insert(i, j);
            }
        }
    }
    let script = apply_to_script(p, tr);
    PreTrace::new(events, po, p.branches().to_vec(), script).map_err(|e| match e {
        PretraceError::NotStrict(a, b) => TransformError::InvalidEffect(format!("program order has a cycle through ({a}, {b})")),
        PretraceError::NotTotal(a, b, t) => {
            TransformError::InvalidEffect(format!("events {a} and {b} of thread {t} are left unordered"))
        }
        other => other.into(),
    })
}

fn apply_to_script(p: &PreTrace, tr: &TransformationEffect) -> BTreeMap<Tid, Vec<Step>> {
    let mut script: BTreeMap<Tid, Vec<Step>> = BTreeMap::new();
    for (tid, steps) in p.script() {
        let t = tr.tid_remap.get(tid).copied().unwrap_or(*tid);
        let kept = steps.iter().filter(|s| !matches!(s, Step::Mem(l) if tr.st_minus.contains(l))).cloned();
        script.entry(t).or_default().extend(kept);
    }
    for e in tr.st_plus.iter().filter(|e| e.dest.is_some() && e.tid != FINAL_TID) {
        let t = tr.tid_remap.get(&e.tid).copied().unwrap_or(e.tid);
        script.entry(t).or_default().push(Step::Mem(e.id.clone()));
    }
    script
}

fn same_event(a: &Event, b: &Event) -> bool {
    a.kind == b.kind && a.loc == b.loc && a.value == b.value
}

/// The effect taking `p` to `q`, matching events by label. Program-order
/// differences are stored closed; see [`TransformationEffect::reduced`].
pub fn diff_effect(p: &PreTrace, q: &PreTrace) -> Result<TransformationEffect, TransformError> {
    let mut tr = TransformationEffect::default();
    for e in p.events() {
        match q.index_of(&e.id) {
            None => {
                tr.st_minus.insert(e.id.clone());
            }
            Some(j) => {
                let f = q.event(j);
                if !same_event(e, f) {
                    return Err(TransformError::LabelConflict(e.id.clone()));
                }
                if e.tid != f.tid && e.tid != INIT_TID && e.tid != FINAL_TID {
                    if let Some(&prev) = tr.tid_remap.get(&e.tid) {
                        if prev != f.tid {
                            return Err(TransformError::RemapConflict(e.tid, prev, f.tid));
                        }
                    }
                    tr.tid_remap.insert(e.tid, f.tid);
                }
            }
        }
    }
    tr.st_plus = q.events().iter().filter(|e| p.index_of(&e.id).is_none()).cloned().collect();
    let pp = po_pairs(p);
    let qq = po_pairs(q);
    let common = |l: &str| p.index_of(l).is_some() && q.index_of(l).is_some();
    tr.po_minus = pp.iter().filter(|(a, b)| common(a) && common(b) && !qq.contains(&(a.clone(), b.clone()))).cloned().collect();
    tr.po_plus = qq.difference(&pp).cloned().collect();
    Ok(tr)
}

/// Same events (by label, kind, location, value and thread) and the same
/// closed program order.
pub fn same_pretrace_shape(a: &PreTrace, b: &PreTrace) -> bool {
    let ev = |p: &PreTrace| {
        p.events().iter().map(|e| (e.id.clone(), e.tid, e.kind, e.loc.clone(), e.value)).collect::<BTreeSet<_>>()
    };
    ev(a) == ev(b) && po_pairs(a) == po_pairs(b)
}

/// Builds the effect for one edit of `p`.
pub fn make_effect(p: &PreTrace, spec: &EffectSpec) -> Result<TransformationEffect, TransformError> {
    let ix = |l: &str| p.index_of(l).ok_or_else(|| TransformError::UnknownEvent(l.to_string()));
    let mut tr = TransformationEffect::default();
    match spec {
        EffectSpec::Reorder(a, b) | EffectSpec::ReorderRr(a, b) => {
            let (i, j) = (ix(a)?, ix(b)?);
            if p.event(i).is_init() || p.event(i).is_final() || p.po_next(i) != Some(j) {
                return Err(TransformError::NotAdjacent(a.clone(), b.clone()));
            }
            if matches!(spec, EffectSpec::ReorderRr(..)) {
                for (k, l) in [(i, a), (j, b)] {
                    if p.event(k).kind != EventKind::Read {
                        return Err(TransformError::NotRead(l.clone()));
                    }
                }
                if p.event(i).loc == p.event(j).loc {
                    return Err(TransformError::SameLocation(a.clone(), b.clone()));
                }
            }
            tr.po_minus.insert((a.clone(), b.clone()));
            tr.po_plus.insert((b.clone(), a.clone()));
        }
        EffectSpec::Eliminate(l) => {
            let i = ix(l)?;
            if p.event(i).is_init() || p.event(i).is_final() {
                return Err(TransformError::InvalidEffect(format!("{l} cannot be eliminated")));
            }
            tr.st_minus.insert(l.clone());
            for (a, b) in p.po().pairs().filter(|&(a, b)| a == i || b == i) {
                tr.po_minus.insert((p.label(a).to_string(), p.label(b).to_string()));
            }
        }
        EffectSpec::Introduce { label, loc, value, after, before } => {
            if p.index_of(label).is_some() {
                return Err(TransformError::LabelClash(label.clone()));
            }
            let anchor = after.as_ref().or(before.as_ref()).ok_or_else(|| {
                TransformError::Syntax("introduce needs `after L` or `before L`".into())
            })?;
            let a = ix(anchor)?;
            let tid = p.event(a).tid;
            if tid == INIT_TID || tid == FINAL_TID {
                return Err(TransformError::InvalidEffect(format!("{anchor} is not a thread event")));
            }
            if !p.locations().contains(loc) {
                return Err(TransformError::InvalidEffect(format!("location `{loc}` is not in the pre-trace")));
            }
            tr.st_plus.push(Event::write(label.clone(), tid, loc.clone(), *value));
            let after_ix = match after {
                Some(l) => Some(ix(l)?),
                None => before.as_ref().and_then(|b| po_prev(p, p.index_of(b).unwrap())),
            };
            let before_ix = match before {
                Some(l) => Some(ix(l)?),
                None => after_ix.and_then(|a| p.po_next(a)),
            };
            if let Some(a) = after_ix {
                tr.po_plus.insert((p.label(a).to_string(), label.clone()));
            }
            if let Some(b) = before_ix {
                tr.po_plus.insert((label.clone(), p.label(b).to_string()));
            }
        }
        EffectSpec::Inline(ta, tb) => {
            if ta == tb {
                return Err(TransformError::SelfInline(*ta));
            }
            for t in [ta, tb] {
                if !p.threads().contains(t) {
                    return Err(TransformError::UnknownThread(*t));
                }
            }
            for &a in &p.thread_events(*ta) {
                for &b in &p.thread_events(*tb) {
                    tr.po_plus.insert((p.label(a).to_string(), p.label(b).to_string()));
                }
            }
            tr.tid_remap.insert(*tb, *ta);
        }
    }
    Ok(tr)
}

fn po_prev(p: &PreTrace, i: usize) -> Option<usize> {
    let tid = p.event(i).tid;
    p.po().column(i).iter().filter(|&j| p.event(j).tid == tid).max_by_key(|&j| p.po().column(j).len())
}

/// Applies a sequence of edits one after another and returns the combined
/// effect on `p` with the resulting pre-trace.
pub fn make_effects(p: &PreTrace, specs: &[EffectSpec]) -> Result<(TransformationEffect, PreTrace), TransformError> {
    let mut cur = p.clone();
    for s in specs {
        let tr = make_effect(&cur, s)?;
        cur = apply_effect(&cur, &tr)?;
    }
    Ok((diff_effect(p, &cur)?, cur))
}
