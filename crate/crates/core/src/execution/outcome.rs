use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::Execution;
use crate::frontend::{Assertion, LocalValue, PredAtom};
use crate::pretrace::Step;

/// Final values of locals (`a`) and final-state reads (`x@final`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Outcome(pub BTreeMap<String, i64>);

impl Outcome {
    /// Replays each thread's path: reads take the value of their rf source,
    /// local assignments copy constants or other locals. Reads without a
    /// source leave their local untouched.
    pub fn of(exec: &Execution) -> Outcome {
        let p = exec.pretrace();
        let value_of = |label: &str| -> Option<i64> {
            let r = p.index_of(label)?;
            exec.rf_source(r).and_then(|w| p.event(w).value)
        };
        let mut out = BTreeMap::new();
        for steps in p.script().values() {
            let mut locals: BTreeMap<String, i64> = BTreeMap::new();
            for s in steps {
                match s {
                    Step::Mem(label) => {
                        let Some(i) = p.index_of(label) else { continue };
                        if let Some(dest) = &p.event(i).dest {
                            if let Some(v) = value_of(label) {
                                locals.insert(dest.clone(), v);
                            }
                        }
                    }
                    Step::Assign { dest, value } => {
                        let v = match value {
                            LocalValue::Const(c) => *c,
                            LocalValue::Local(src) => locals.get(src).copied().unwrap_or(0),
                        };
                        locals.insert(dest.clone(), v);
                    }
                }
            }
            out.extend(locals);
        }
        for e in p.events().iter().filter(|e| e.is_final()) {
            if let (Some(dest), Some(v)) = (&e.dest, value_of(&e.id)) {
                out.insert(dest.clone(), v);
            }
        }
        Outcome(out)
    }

    pub fn get(&self, key: &str) -> Option<i64> {
        self.0.get(key).copied()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if parts.is_empty() {
            write!(f, "(no observations)")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

fn key(atom: &PredAtom) -> (String, i64) {
    match atom {
        PredAtom::Local(l, v) => (l.clone(), *v),
        PredAtom::Final(l, v) => (crate::frontend::final_dest(l), *v),
    }
}

/// Locals or final reads the predicate mentions that the outcome lacks.
pub fn unassigned_locals(outcome: &Outcome, pred: &Assertion) -> Vec<String> {
    pred.atoms.iter().map(|a| key(a).0).filter(|k| outcome.get(k).is_none()).collect()
}

/// Conjunction of the atoms; a name the outcome lacks reads as 0, with a
/// warning.
pub fn eval_predicate(outcome: &Outcome, pred: &Assertion) -> bool {
    pred.atoms.iter().all(|a| {
        let (k, v) = key(a);
        let actual = outcome.get(&k).unwrap_or_else(|| {
            log::warn!("`{k}` is not assigned on this path; reading it as 0");
            0
        });
        actual == v
    })
}
