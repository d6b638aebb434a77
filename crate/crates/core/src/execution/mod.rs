//! Candidate executions: a pre-trace plus reads-from and coherence order.

mod enumerate;
mod outcome;
mod raw;

pub use enumerate::{candidate_count, candidates, enumerate_candidates, CandidateIter, CandidateOptions, MoMode};
pub use outcome::{eval_predicate, unassigned_locals, Outcome};
pub use raw::{load_execution, RawError, RawExecution};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::pretrace::{PreTrace, PretraceError};
use crate::relalg::{Atom, Env, EventSet, PatternOptions, RelError, Relation};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("{0} candidate executions exceed the limit of {1}")]
    Explosion(u128, usize),
    #[error("rf edge {0} -> {1} does not go from a write to a read of the same location")]
    BadRf(String, String),
    #[error("read {0} has more than one rf source")]
    MultipleRf(String),
    #[error("mo edge {0} -> {1} is not between writes")]
    BadMo(String, String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("raw executions must be branch-free")]
    Branching,
    #[error(transparent)]
    Pretrace(#[from] PretraceError),
    #[error(transparent)]
    Relation(#[from] RelError),
}

/// A pre-trace with `rf` (write to read) and `mo` (over writes).
#[derive(Clone, PartialEq, Eq)]
pub struct Execution {
    pretrace: Arc<PreTrace>,
    rf: Relation,
    mo: Relation,
}

/// Relations computed from an execution.
#[derive(Clone, Debug)]
pub struct Derived {
    pub po: Relation,
    pub rf: Relation,
    pub rfi: Relation,
    pub rfe: Relation,
    pub mo: Relation,
    pub mo_loc: Relation,
    pub rb: Relation,
    pub hb: Relation,
}

impl Derived {
    pub fn env<'u>(&self, exec: &'u Execution, options: PatternOptions) -> Env<'u> {
        let mut env = Env::new(exec.pretrace.universe());
        env.options = options;
        for (a, r) in [
            (Atom::Po, &self.po),
            (Atom::Rf, &self.rf),
            (Atom::Rfi, &self.rfi),
            (Atom::Rfe, &self.rfe),
            (Atom::Mo, &self.mo),
            (Atom::MoLoc, &self.mo_loc),
            (Atom::Rb, &self.rb),
            (Atom::Hb, &self.hb),
        ] {
            env.bind(a, r.clone()).expect("derived relations share the universe");
        }
        env
    }
}

impl Execution {
    /// Checks that `rf` edges go write to same-location read with at most one
    /// source per read, and that `mo` relates writes only. Neither totality
    /// of `mo` nor an `rf` source for every read is required.
    pub fn new(pretrace: Arc<PreTrace>, rf: Relation, mo: Relation) -> Result<Self, ExecError> {
        let u = pretrace.universe();
        for (w, r) in rf.pairs() {
            if !u.writes().contains(w) || !u.reads().contains(r) || !u.same_loc(w, r) || w == r {
                return Err(ExecError::BadRf(pretrace.label(w).into(), pretrace.label(r).into()));
            }
        }
        for r in u.reads().iter() {
            if rf.column(r).len() > 1 {
                return Err(ExecError::MultipleRf(pretrace.label(r).into()));
            }
        }
        for (a, b) in mo.pairs() {
            if !u.writes().contains(a) || !u.writes().contains(b) {
                return Err(ExecError::BadMo(pretrace.label(a).into(), pretrace.label(b).into()));
            }
        }
        Ok(Execution { pretrace, rf, mo })
    }

    pub(crate) fn new_unchecked(pretrace: Arc<PreTrace>, rf: Relation, mo: Relation) -> Self {
        Execution { pretrace, rf, mo }
    }

    pub fn pretrace(&self) -> &PreTrace {
        &self.pretrace
    }

    pub fn pretrace_arc(&self) -> &Arc<PreTrace> {
        &self.pretrace
    }

    pub fn rf(&self) -> &Relation {
        &self.rf
    }

    pub fn mo(&self) -> &Relation {
        &self.mo
    }

    pub fn label(&self, i: usize) -> &str {
        self.pretrace.label(i)
    }

    pub fn rf_source(&self, r: usize) -> Option<usize> {
        self.rf.column(r).iter().next()
    }

    /// Every read has an `rf` source.
    pub fn is_well_formed(&self) -> bool {
        self.pretrace.reads().iter().all(|r| self.rf_source(r).is_some())
    }

    /// Reads without an `rf` source.
    pub fn missing_rf(&self) -> EventSet {
        self.pretrace.reads().iter().filter(|&r| self.rf_source(r).is_none()).collect()
    }

    /// `mo` is a strict total order on the writes.
    pub fn mo_is_total(&self) -> bool {
        self.mo.is_strict_total_order(self.pretrace.writes())
    }

    /// The same execution with the `rf` edges into `reads` deleted.
    pub fn without_rf(&self, reads: EventSet) -> Execution {
        let rf = self.rf.filter(|_, r| !reads.contains(r));
        Execution { pretrace: self.pretrace.clone(), rf, mo: self.mo.clone() }
    }

    /// The same execution with `r` reading from `w`.
    pub fn with_rf(&self, r: usize, w: usize) -> Execution {
        let mut rf = self.rf.filter(|_, x| x != r);
        rf.insert(w, r);
        Execution { pretrace: self.pretrace.clone(), rf, mo: self.mo.clone() }
    }

    pub fn derive(&self) -> Derived {
        let p = &*self.pretrace;
        let u = p.universe();
        let po = p.po().clone();
        let rf = self.rf.clone();
        let rfi = rf.filter(|w, r| p.event(w).tid == p.event(r).tid);
        let rfe = rf.difference(&rfi).expect("same universe");
        let mo = self.mo.clone();
        let mo_loc = mo.filter(|a, b| u.same_loc(a, b));
        let rb = rf
            .inverse()
            .compose(&mo_loc)
            .expect("same universe")
            .filter(|a, b| a != b);
        let hb = po.union(&rf).expect("same universe").transitive_closure();
        Derived { po, rf, rfi, rfe, mo, mo_loc, rb, hb }
    }

    pub fn outcome(&self) -> Outcome {
        Outcome::of(self)
    }

    /// `rf` sources by read label.
    pub fn rf_labels(&self) -> Vec<(String, String)> {
        self.rf.pairs().map(|(w, r)| (self.label(w).to_string(), self.label(r).to_string())).collect()
    }

    /// Writes in `mo` order (by number of predecessors, then canonical index).
    pub fn mo_sequence(&self) -> Vec<usize> {
        let mut ws: Vec<usize> = self.pretrace.writes().iter().collect();
        ws.sort_by_key(|&w| (self.mo.column(w).len(), w));
        ws
    }

    /// Common reads read from the same-labelled write, and `mo` agrees on
    /// every pair of common writes in both directions.
    pub fn comparable(&self, other: &Execution) -> bool {
        let (p, q) = (self.pretrace(), other.pretrace());
        for r in p.reads().iter() {
            let Some(r2) = q.index_of(p.label(r)) else { continue };
            if !q.reads().contains(r2) {
                continue;
            }
            let a = self.rf_source(r).map(|w| p.label(w));
            let b = other.rf_source(r2).map(|w| q.label(w));
            if a != b {
                return false;
            }
        }
        let common: Vec<(usize, usize)> = p
            .writes()
            .iter()
            .filter_map(|w| q.index_of(p.label(w)).filter(|&w2| q.writes().contains(w2)).map(|w2| (w, w2)))
            .collect();
        for &(a, a2) in &common {
            for &(b, b2) in &common {
                if self.mo.contains(a, b) != other.mo.contains(a2, b2) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Debug for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rf: Vec<String> = self.rf_labels().iter().map(|(w, r)| format!("{w}->{r}")).collect();
        let mo: Vec<&str> = self.mo_sequence().iter().map(|&w| self.label(w)).collect();
        write!(f, "rf [{}] mo [{}]", rf.join(", "), mo.join(" < "))
    }
}

/// Executions of `a` each have a comparable member of `b`.
pub fn set_contained(a: &[Execution], b: &[Execution]) -> bool {
    a.iter().all(|x| b.iter().any(|y| x.comparable(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::pretrace::{enumerate_pretraces, PretraceOptions};

    fn sb() -> Arc<PreTrace> {
        let p = parse_program("init { x = 0; y = 0; } thread 1 { x = 1; a = y; } thread 2 { y = 1; b = x; }").unwrap();
        Arc::new(enumerate_pretraces(&p, PretraceOptions::default()).unwrap().remove(0))
    }

    #[test]
    fn derived_relations_split_rf_by_thread() {
        let p = sb();
        let ix = |l: &str| p.index_of(l).unwrap();
        let rf = Relation::from_pairs(p.len(), [(ix("init_y"), ix("A2")), (ix("A1"), ix("A4"))]);
        let mo = Relation::from_pairs(p.len(), [(ix("init_x"), ix("A1")), (ix("init_y"), ix("A3"))]);
        let e = Execution::new(p.clone(), rf, mo).unwrap();
        let d = e.derive();
        assert!(d.rfe.contains(ix("A1"), ix("A4")));
        assert!(d.rfi.is_empty());
        assert!(d.rb.contains(ix("A2"), ix("A3")));
        assert!(d.hb.contains(ix("A1"), ix("A4")));
    }

    #[test]
    fn rf_must_match_locations() {
        let p = sb();
        let ix = |l: &str| p.index_of(l).unwrap();
        let rf = Relation::from_pairs(p.len(), [(ix("init_x"), ix("A2"))]);
        assert!(matches!(Execution::new(p, rf, Relation::empty(6)), Err(ExecError::BadRf(..))));
    }

    #[test]
    fn rb_excludes_self_for_rmw() {
        let p = parse_program("init { x = 0; } thread 1 { rmw(a, x, 1); }").unwrap();
        let p = Arc::new(enumerate_pretraces(&p, PretraceOptions::default()).unwrap().remove(0));
        let rf = Relation::from_pairs(2, [(0, 1)]);
        let mo = Relation::from_pairs(2, [(0, 1)]);
        let e = Execution::new(p, rf, mo).unwrap();
        assert!(e.derive().rb.is_empty());
    }
}
