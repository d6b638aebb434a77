//! Pre-traces: the memory events of one control-flow path through every
//! thread, with their program order and the branch decisions that select
//! the path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::{final_dest, final_label, init_label, Cond, LocalValue, Program, Stmt, Tid, FINAL_TID, INIT_TID};
use crate::relalg::{EventMeta, EventSet, RelError, Relation, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Read,
    Write,
    Rmw,
    FenceRr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Event {
    pub id: String,
    pub tid: Tid,
    pub kind: EventKind,
    pub loc: Option<String>,
    /// Written value for writes and read-modify-writes.
    pub value: Option<i64>,
    /// Local receiving the value for reads and read-modify-writes.
    pub dest: Option<String>,
}

impl Event {
    pub fn is_read(&self) -> bool {
        matches!(self.kind, EventKind::Read | EventKind::Rmw)
    }

    pub fn is_write(&self) -> bool {
        matches!(self.kind, EventKind::Write | EventKind::Rmw)
    }

    pub fn is_init(&self) -> bool {
        self.tid == INIT_TID
    }

    pub fn is_final(&self) -> bool {
        self.tid == FINAL_TID
    }

    pub fn write(id: impl Into<String>, tid: Tid, loc: impl Into<String>, value: i64) -> Self {
        Event { id: id.into(), tid, kind: EventKind::Write, loc: Some(loc.into()), value: Some(value), dest: None }
    }

    pub fn read(id: impl Into<String>, tid: Tid, loc: impl Into<String>, dest: impl Into<String>) -> Self {
        Event { id: id.into(), tid, kind: EventKind::Read, loc: Some(loc.into()), value: None, dest: Some(dest.into()) }
    }

    pub fn rmw(id: impl Into<String>, tid: Tid, loc: impl Into<String>, dest: impl Into<String>, value: i64) -> Self {
        Event { id: id.into(), tid, kind: EventKind::Rmw, loc: Some(loc.into()), value: Some(value), dest: Some(dest.into()) }
    }

    pub fn fence(id: impl Into<String>, tid: Tid) -> Self {
        Event { id: id.into(), tid, kind: EventKind::FenceRr, loc: None, value: None, dest: None }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc = self.loc.as_deref().unwrap_or("");
        match self.kind {
            EventKind::Read => write!(f, "{}: {} = {}", self.id, self.dest.as_deref().unwrap_or("_"), loc),
            EventKind::Write => write!(f, "{}: {} = {}", self.id, loc, self.value.unwrap_or(0)),
            EventKind::Rmw => write!(
                f,
                "{}: rmw({}, {}, {})",
                self.id,
                self.dest.as_deref().unwrap_or("_"),
                loc,
                self.value.unwrap_or(0)
            ),
            EventKind::FenceRr => write!(f, "{}: fence.rr", self.id),
        }
    }
}

/// One resolved conditional on a path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BranchChoice {
    pub id: String,
    pub guard: Cond,
    pub taken: bool,
    /// Guard value when the tested local held a known constant at the branch.
    pub resolved: Option<bool>,
}

impl Serialize for Cond {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Per-thread replay script used to compute final local values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Mem(String),
    Assign { dest: String, value: LocalValue },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PretraceError {
    #[error("program order is not a strict partial order at ({0}, {1})")]
    NotStrict(String, String),
    #[error("events {0} and {1} of thread {2} are unordered")]
    NotTotal(String, String, Tid),
    #[error("initial write {0} is not program-ordered before {1}")]
    InitNotFirst(String, String),
    #[error("duplicate event label `{0}`")]
    DuplicateLabel(String),
    #[error("{0} pre-traces exceed the limit of {1}")]
    Explosion(u128, usize),
    #[error(transparent)]
    Relation(#[from] RelError),
}

/// Events of one path, in canonical order (init writes, then threads by id in
/// program order, then final reads), and their transitively closed program order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreTrace {
    events: Vec<Event>,
    po: Relation,
    branches: Vec<BranchChoice>,
    script: BTreeMap<Tid, Vec<Step>>,
    universe: Universe,
}

impl PreTrace {
    /// Builds a pre-trace, closing `po`, checking its invariants and sorting
    /// events canonically.
    pub fn new(
        events: Vec<Event>,
        po: Relation,
        branches: Vec<BranchChoice>,
        script: BTreeMap<Tid, Vec<Step>>,
    ) -> Result<Self, PretraceError> {
        let mut seen = BTreeSet::new();
        for e in &events {
            if !seen.insert(e.id.as_str()) {
                return Err(PretraceError::DuplicateLabel(e.id.clone()));
            }
        }
        let po = po.transitive_closure();
        if let Some(i) = po.reflexive_points().iter().next() {
            let j = po.row(i).iter().find(|&j| po.contains(j, i) && j != i).unwrap_or(i);
            return Err(PretraceError::NotStrict(events[i].id.clone(), events[j].id.clone()));
        }
        for (i, a) in events.iter().enumerate() {
            for (j, b) in events.iter().enumerate() {
                if a.is_init() && !b.is_init() && !po.contains(i, j) {
                    return Err(PretraceError::InitNotFirst(a.id.clone(), b.id.clone()));
                }
                if i < j && a.tid == b.tid && !a.is_init() && !po.contains(i, j) && !po.contains(j, i) {
                    return Err(PretraceError::NotTotal(a.id.clone(), b.id.clone(), a.tid));
                }
            }
        }
        // canonical order: by thread, then by number of po-predecessors
        let mut order: Vec<usize> = (0..events.len()).collect();
        order.sort_by_key(|&i| (events[i].tid, po.column(i).len(), events[i].id.clone()));
        let mut map = vec![None; events.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = Some(new);
        }
        let po = po.remap(events.len(), &map);
        let events: Vec<Event> = order.iter().map(|&i| events[i].clone()).collect();
        let universe = build_universe(&events)?;
        Ok(PreTrace { events, po, branches, script, universe })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, i: usize) -> &Event {
        &self.events[i]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn po(&self) -> &Relation {
        &self.po
    }

    pub fn branches(&self) -> &[BranchChoice] {
        &self.branches
    }

    pub fn script(&self) -> &BTreeMap<Tid, Vec<Step>> {
        &self.script
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.events.iter().position(|e| e.id == id)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.events[i].id
    }

    pub fn reads(&self) -> EventSet {
        self.universe.reads()
    }

    pub fn writes(&self) -> EventSet {
        self.universe.writes()
    }

    /// Writes to the location of event `i`.
    pub fn same_loc_writes(&self, i: usize) -> EventSet {
        self.writes().iter().filter(|&w| self.universe.same_loc(w, i)).collect()
    }

    pub fn threads(&self) -> BTreeSet<Tid> {
        self.events.iter().map(|e| e.tid).filter(|&t| t != INIT_TID && t != FINAL_TID).collect()
    }

    /// Events of `tid` in program order.
    pub fn thread_events(&self, tid: Tid) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.events[i].tid == tid).collect()
    }

    /// Immediate program-order successor within the same thread.
    pub fn po_next(&self, i: usize) -> Option<usize> {
        let tid = self.events[i].tid;
        self.po.row(i).iter().filter(|&j| self.events[j].tid == tid).min_by_key(|&j| self.po.column(j).len())
    }

    pub fn locations(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.events.iter().filter_map(|e| e.loc.as_deref()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Adds a final-state read per location, program-ordered after every
    /// existing event; final reads are chained in the given order.
    pub fn attach_final_reads(&self, locs: &[String]) -> Result<PreTrace, PretraceError> {
        let n = self.len();
        let mut events = self.events.clone();
        for loc in locs {
            events.push(Event::read(final_label(loc), FINAL_TID, loc.clone(), final_dest(loc)));
        }
        let mut po = self.po.remap(events.len(), &(0..n).map(Some).collect::<Vec<_>>());
        for k in n..events.len() {
            for i in 0..k {
                po.insert(i, k);
            }
        }
        PreTrace::new(events, po, self.branches.clone(), self.script.clone())
    }
}

fn build_universe(events: &[Event]) -> Result<Universe, RelError> {
    let locs: BTreeSet<&str> = events.iter().filter_map(|e| e.loc.as_deref()).collect();
    let loc_id = |l: &str| locs.iter().position(|x| *x == l).unwrap() as u32;
    Universe::new(
        events
            .iter()
            .map(|e| EventMeta {
                label: e.id.clone(),
                tid: e.tid,
                loc: e.loc.as_deref().map(loc_id),
                is_read: e.is_read(),
                is_write: e.is_write(),
                is_rmw: e.kind == EventKind::Rmw,
                is_fence: e.kind == EventKind::FenceRr,
                is_final: e.is_final(),
            })
            .collect(),
    )
}

impl fmt::Display for PreTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let choices: Vec<String> =
            self.branches.iter().map(|b| format!("{}={}", b.id, if b.taken { "then" } else { "else" })).collect();
        if !choices.is_empty() {
            writeln!(f, "branches: {}", choices.join(" "))?;
        }
        let mut tids: Vec<Tid> = self.events.iter().map(|e| e.tid).collect();
        tids.dedup();
        for t in tids {
            let evs: Vec<String> = self.thread_events(t).iter().map(|&i| self.events[i].to_string()).collect();
            let name = match t {
                INIT_TID => "init".to_string(),
                FINAL_TID => "final".to_string(),
                t => format!("T{t}"),
            };
            writeln!(f, "{name}: {}", evs.join("; "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PretraceOptions {
    /// Drop paths that contradict constant locals or repeat a guard on an
    /// unmodified local with a different decision.
    pub filter: bool,
    /// Attach final-state reads for the program's `final` clause.
    pub final_reads: bool,
    pub limit: usize,
}

impl Default for PretraceOptions {
    fn default() -> Self {
        PretraceOptions { filter: true, final_reads: true, limit: 1_000_000 }
    }
}

#[derive(Clone, Default)]
struct PathState {
    events: Vec<Event>,
    steps: Vec<Step>,
    choices: Vec<BranchChoice>,
    /// Known constant value per local; `None` once it holds a loaded value.
    locals: BTreeMap<String, Option<i64>>,
    /// Decisions already taken on guards whose local is unchanged since.
    memo: BTreeMap<String, Vec<(Cond, bool)>>,
}

impl PathState {
    fn known(&self, local: &str) -> Option<i64> {
        match self.locals.get(local) {
            None => Some(0),
            Some(v) => *v,
        }
    }

    fn assign(&mut self, dest: &str, value: Option<i64>) {
        self.locals.insert(dest.to_string(), value);
        self.memo.remove(dest);
    }
}

fn walk_thread(tid: Tid, mut work: Vec<&[Stmt]>, mut st: PathState, filter: bool, out: &mut Vec<PathState>) {
    loop {
        let Some(top) = work.last_mut() else {
            out.push(st);
            return;
        };
        let Some((s, rest)) = top.split_first() else {
            work.pop();
            continue;
        };
        *top = rest;
        match s {
            Stmt::Read { label, dest, loc } => {
                st.events.push(Event::read(label.clone(), tid, loc.clone(), dest.clone()));
                st.steps.push(Step::Mem(label.clone()));
                st.assign(dest, None);
            }
            Stmt::Rmw { label, dest, loc, value } => {
                st.events.push(Event::rmw(label.clone(), tid, loc.clone(), dest.clone(), *value));
                st.steps.push(Step::Mem(label.clone()));
                st.assign(dest, None);
            }
            Stmt::Write { label, loc, value } => {
                st.events.push(Event::write(label.clone(), tid, loc.clone(), *value));
                st.steps.push(Step::Mem(label.clone()));
            }
            Stmt::Fence { label } => {
                st.events.push(Event::fence(label.clone(), tid));
                st.steps.push(Step::Mem(label.clone()));
            }
            Stmt::Local { dest, value, .. } => {
                let v = match value {
                    LocalValue::Const(c) => Some(*c),
                    LocalValue::Local(src) => st.known(src),
                };
                st.steps.push(Step::Assign { dest: dest.clone(), value: value.clone() });
                st.assign(dest, v);
            }
            Stmt::If { label, cond, then_branch, else_branch } => {
                let resolved = match cond {
                    Cond::True => Some(true),
                    Cond::False => Some(false),
                    Cond::Eq(l, _) | Cond::Ne(l, _) => st.known(l).map(|v| cond.eval(v)),
                };
                let remembered = cond
                    .local()
                    .and_then(|l| st.memo.get(l))
                    .and_then(|m| m.iter().find(|(c, _)| c == cond).map(|(_, t)| *t));
                let options: Vec<bool> = match (filter, resolved, remembered) {
                    (true, Some(b), _) => vec![b],
                    (true, None, Some(b)) => vec![b],
                    _ => vec![true, false],
                };
                for taken in options {
                    let mut st2 = st.clone();
                    st2.choices.push(BranchChoice { id: label.clone(), guard: cond.clone(), taken, resolved });
                    if let Some(l) = cond.local() {
                        st2.memo.entry(l.to_string()).or_default().push((cond.clone(), taken));
                    }
                    let mut work2 = work.clone();
                    work2.push(if taken { then_branch } else { else_branch });
                    walk_thread(tid, work2, st2, filter, out);
                }
                return;
            }
        }
    }
}

/// All pre-traces of `program`, in lexicographic order of branch decisions
/// (threads by id, then-arm before else-arm).
pub fn enumerate_pretraces(program: &Program, opts: PretraceOptions) -> Result<Vec<PreTrace>, PretraceError> {
    let per_thread: Vec<(Tid, Vec<PathState>)> = program
        .threads
        .iter()
        .map(|t| {
            let mut out = Vec::new();
            walk_thread(t.tid, vec![&t.body[..]], PathState::default(), opts.filter, &mut out);
            (t.tid, out)
        })
        .collect();
    let total: u128 = per_thread.iter().map(|(_, v)| v.len() as u128).product();
    if total > opts.limit as u128 {
        return Err(PretraceError::Explosion(total, opts.limit));
    }
    let mut combos: Vec<Vec<&PathState>> = vec![vec![]];
    for (_, paths) in &per_thread {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                paths.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    let finals: Vec<String> = if opts.final_reads { program.finals.clone() } else { Vec::new() };
    combos
        .into_iter()
        .map(|combo| {
            let mut events: Vec<Event> =
                program.init.iter().map(|(l, v)| Event::write(init_label(l), INIT_TID, l.clone(), *v)).collect();
            let n_init = events.len();
            let mut chains = Vec::new();
            let mut branches = Vec::new();
            let mut script = BTreeMap::new();
            for ((tid, _), st) in per_thread.iter().zip(&combo) {
                let start = events.len();
                events.extend(st.events.iter().cloned());
                chains.push(start..events.len());
                branches.extend(st.choices.iter().cloned());
                script.insert(*tid, st.steps.clone());
            }
            let mut po = Relation::empty(events.len());
            for i in 0..n_init {
                for j in n_init..events.len() {
                    po.insert(i, j);
                }
            }
            for c in chains {
                for i in c.clone() {
                    for j in (i + 1)..c.end {
                        po.insert(i, j);
                    }
                }
            }
            let p = PreTrace::new(events, po, branches, script)?;
            if finals.is_empty() {
                Ok(p)
            } else {
                p.attach_final_reads(&finals)
            }
        })
        .collect()
}

/// Branch decisions agree wherever both pre-traces resolve the same branch
/// with an equal guard. With `semantic`, guards that both evaluate to the
/// same known constant count as equal.
pub fn pretraces_comparable(p: &PreTrace, q: &PreTrace, semantic: bool) -> bool {
    p.branches.iter().all(|a| match q.branches.iter().find(|b| b.id == a.id) {
        None => true,
        Some(b) => {
            let equal_guard = a.guard == b.guard || (semantic && a.resolved.is_some() && a.resolved == b.resolved);
            !equal_guard || a.taken == b.taken
        }
    })
}
