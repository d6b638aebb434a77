use std::collections::{BTreeMap, BTreeSet};

use crate::relalg::Relation;

/// Thread identifier. `0` is reserved for initial writes.
pub type Tid = u32;

pub const INIT_TID: Tid = 0;
pub const FINAL_TID: Tid = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalValue {
    Const(i64),
    Local(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cond {
    True,
    False,
    Eq(String, i64),
    Ne(String, i64),
}

impl Cond {
    pub fn local(&self) -> Option<&str> {
        match self {
            Cond::Eq(l, _) | Cond::Ne(l, _) => Some(l),
            _ => None,
        }
    }

    /// Value of the guard when its local holds `value`.
    pub fn eval(&self, value: i64) -> bool {
        match self {
            Cond::True => true,
            Cond::False => false,
            Cond::Eq(_, v) => value == *v,
            Cond::Ne(_, v) => value != *v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Read { label: String, dest: String, loc: String },
    Write { label: String, loc: String, value: i64 },
    Rmw { label: String, dest: String, loc: String, value: i64 },
    Fence { label: String },
    Local { label: Option<String>, dest: String, value: LocalValue },
    If { label: String, cond: Cond, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
}

impl Stmt {
    pub fn label(&self) -> Option<&str> {
        match self {
            Stmt::Read { label, .. }
            | Stmt::Write { label, .. }
            | Stmt::Rmw { label, .. }
            | Stmt::Fence { label }
            | Stmt::If { label, .. } => Some(label),
            Stmt::Local { label, .. } => label.as_deref(),
        }
    }

    pub fn is_memory(&self) -> bool {
        matches!(self, Stmt::Read { .. } | Stmt::Write { .. } | Stmt::Rmw { .. } | Stmt::Fence { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread {
    pub tid: Tid,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssertKind {
    Exists,
    Forbidden,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredAtom {
    Local(String, i64),
    Final(String, i64),
}

/// A conjunction of atoms, tagged with the polarity it was declared with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub kind: AssertKind,
    pub atoms: Vec<PredAtom>,
}

/// Declared verdict under one model: reachability of the asserted outcome
/// for litmus tests, consistency for raw executions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Allowed,
    Forbidden,
    Consistent,
    Inconsistent,
    /// Inconsistent, violating exactly these rules.
    Violates(Vec<String>),
}

impl std::fmt::Display for Expectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expectation::Allowed => write!(f, "allowed"),
            Expectation::Forbidden => write!(f, "forbidden"),
            Expectation::Consistent => write!(f, "consistent"),
            Expectation::Inconsistent => write!(f, "inconsistent"),
            Expectation::Violates(rules) => write!(f, "violates({})", rules.join(", ")),
        }
    }
}

/// Explicit reads-from and coherence edges of a raw execution file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionEdges {
    pub rf: Vec<(String, String)>,
    pub mo: Vec<(String, String)>,
}

/// A parsed litmus test with every memory statement and branch labelled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub init: Vec<(String, i64)>,
    pub threads: Vec<Thread>,
    pub finals: Vec<String>,
    pub assertion: Option<Assertion>,
    pub expect: BTreeMap<String, Expectation>,
}

pub fn init_label(loc: &str) -> String {
    format!("init_{loc}")
}

pub fn final_label(loc: &str) -> String {
    format!("final_{loc}")
}

pub fn final_dest(loc: &str) -> String {
    format!("{loc}@final")
}

impl Program {
    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.init.iter().map(|(l, _)| l.as_str())
    }

    pub fn init_value(&self, loc: &str) -> Option<i64> {
        self.init.iter().find(|(l, _)| l == loc).map(|(_, v)| *v)
    }

    pub fn thread(&self, tid: Tid) -> Option<&Thread> {
        self.threads.iter().find(|t| t.tid == tid)
    }

    /// Labels of every memory statement, in textual order, init writes first.
    pub fn memory_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.locations().map(init_label).collect();
        fn walk(stmts: &[Stmt], out: &mut Vec<String>) {
            for s in stmts {
                match s {
                    Stmt::If { then_branch, else_branch, .. } => {
                        walk(then_branch, out);
                        walk(else_branch, out);
                    }
                    s if s.is_memory() => out.push(s.label().unwrap().to_string()),
                    _ => {}
                }
            }
        }
        for t in &self.threads {
            walk(&t.body, &mut out);
        }
        out
    }

    /// Syntactic program order over [`Program::memory_labels`]: init writes
    /// precede everything, and within a thread `a` precedes `b` when `a`
    /// appears first and the two are not in opposite arms of one conditional.
    pub fn po_prog(&self) -> (Vec<String>, Relation) {
        let labels = self.memory_labels();
        let index = |l: &str| labels.iter().position(|x| x == l).unwrap();
        let n_init = self.init.len();
        let mut rel = Relation::empty(labels.len());
        for i in 0..n_init {
            for j in n_init..labels.len() {
                rel.insert(i, j);
            }
        }
        fn walk(stmts: &[Stmt], before: &mut Vec<usize>, rel: &mut Relation, index: &dyn Fn(&str) -> usize) {
            for s in stmts {
                match s {
                    Stmt::If { then_branch, else_branch, .. } => {
                        let mut t = before.clone();
                        walk(then_branch, &mut t, rel, index);
                        let mut e = before.clone();
                        walk(else_branch, &mut e, rel, index);
                        let mut merged: BTreeSet<usize> = t.into_iter().collect();
                        merged.extend(e);
                        *before = merged.into_iter().collect();
                    }
                    s if s.is_memory() => {
                        let e = index(s.label().unwrap());
                        for &b in before.iter() {
                            rel.insert(b, e);
                        }
                        before.push(e);
                    }
                    _ => {}
                }
            }
        }
        for t in &self.threads {
            walk(&t.body, &mut Vec::new(), &mut rel, &index);
        }
        (labels, rel)
    }
}
