use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{check_consistent, is_consistent, violated_rules, MemoryModel, ModelError};
use crate::execution::{candidates, eval_predicate, CandidateOptions, Execution, MoMode, Outcome};
use crate::frontend::{AssertKind, Expectation, Program};
use crate::pretrace::{enumerate_pretraces, PreTrace, PretraceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BehaviourOptions {
    pub pretraces: PretraceOptions,
    pub candidate_limit: usize,
    /// Skip coherence orders that place a thread write before an init
    /// write when the model rejects all of them anyway. Changes the
    /// partition counts but not the set of allowed outcomes.
    pub prune: bool,
}

impl Default for BehaviourOptions {
    fn default() -> Self {
        BehaviourOptions { pretraces: PretraceOptions::default(), candidate_limit: 1_000_000, prune: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeRow {
    pub outcome: Outcome,
    pub allowed: bool,
    pub consistent: usize,
    pub candidates: usize,
}

/// Consistent and inconsistent candidates of a program under one model.
#[derive(Clone, Debug)]
pub struct Behaviours {
    pub pretraces: Vec<Arc<PreTrace>>,
    pub consistent: usize,
    pub inconsistent: usize,
    pub outcomes: Vec<OutcomeRow>,
}

fn mode(model: &MemoryModel, opts: &BehaviourOptions) -> MoMode {
    if opts.prune && model.forces_inits_first() {
        MoMode::InitsFirst
    } else {
        MoMode::Full
    }
}

fn pretraces(program: &Program, opts: &BehaviourOptions) -> Result<Vec<Arc<PreTrace>>, ModelError> {
    Ok(enumerate_pretraces(program, opts.pretraces)?.into_iter().map(Arc::new).collect())
}

/// Partitions every candidate and tabulates outcomes.
pub fn behaviours(program: &Program, model: &MemoryModel, opts: BehaviourOptions) -> Result<Behaviours, ModelError> {
    let pts = pretraces(program, &opts)?;
    let copts = CandidateOptions { limit: opts.candidate_limit, mo: mode(model, &opts) };
    let mut table: BTreeMap<Outcome, OutcomeRow> = BTreeMap::new();
    let (mut consistent, mut inconsistent) = (0, 0);
    for p in &pts {
        for e in candidates(p, copts)? {
            let ok = is_consistent(model, &e)?;
            if ok {
                consistent += 1;
            } else {
                inconsistent += 1;
            }
            let o = e.outcome();
            let row = table.entry(o.clone()).or_insert(OutcomeRow { outcome: o, allowed: false, consistent: 0, candidates: 0 });
            row.candidates += 1;
            if ok {
                row.consistent += 1;
                row.allowed = true;
            }
        }
    }
    Ok(Behaviours { pretraces: pts, consistent, inconsistent, outcomes: table.into_values().collect() })
}

/// Result of testing a program's assertion under one model.
#[derive(Clone, Debug)]
pub struct AssertionCheck {
    /// What the test says should happen, from its `expect` block or, failing
    /// that, the assertion keyword. `None` without an assertion.
    pub expected: Option<Expectation>,
    /// Some consistent candidate satisfies the predicate.
    pub allowed: bool,
    /// A consistent candidate satisfying the predicate.
    pub witness: Option<Execution>,
    /// Rules violated by candidates satisfying the predicate, with counts.
    pub blocking_rules: BTreeMap<String, usize>,
    /// One inconsistent candidate satisfying the predicate, for display.
    pub blocked_example: Option<(Execution, super::Verdict)>,
}

impl AssertionCheck {
    pub fn observed(&self) -> Expectation {
        if self.allowed {
            Expectation::Allowed
        } else {
            Expectation::Forbidden
        }
    }

    /// The expectation holds, or there is nothing to check.
    pub fn met(&self) -> bool {
        self.expected.as_ref().is_none_or(|e| *e == self.observed())
    }
}

/// Evaluates the program's `exists`/`forbidden` predicate under `model`.
pub fn check_assertion(program: &Program, model: &MemoryModel, opts: BehaviourOptions) -> Result<AssertionCheck, ModelError> {
    let Some(pred) = &program.assertion else {
        return Ok(AssertionCheck {
            expected: None,
            allowed: true,
            witness: None,
            blocking_rules: BTreeMap::new(),
            blocked_example: None,
        });
    };
    let expected = program.expect.get(&model.name).cloned().or(Some(match pred.kind {
        AssertKind::Exists => Expectation::Allowed,
        AssertKind::Forbidden => Expectation::Forbidden,
    }));
    let copts = CandidateOptions { limit: opts.candidate_limit, mo: mode(model, &opts) };
    let mut check =
        AssertionCheck { expected, allowed: false, witness: None, blocking_rules: BTreeMap::new(), blocked_example: None };
    for p in pretraces(program, &opts)? {
        for e in candidates(&p, copts)? {
            if !eval_predicate(&e.outcome(), pred) {
                continue;
            }
            let rules = violated_rules(model, &e)?;
            if rules.is_empty() {
                check.allowed = true;
                check.witness = Some(e);
                return Ok(check);
            }
            for r in rules {
                *check.blocking_rules.entry(r).or_default() += 1;
            }
            if check.blocked_example.is_none() {
                let v = check_consistent(model, &e)?;
                check.blocked_example = Some((e, v));
            }
        }
    }
    Ok(check)
}
