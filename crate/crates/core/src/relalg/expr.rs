use std::collections::BTreeMap;
use std::fmt;

use super::{EventSet, RelError, Relation, MAX_EVENTS};

/// What the relation layer needs to know about one event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventMeta {
    pub label: String,
    pub tid: u32,
    pub loc: Option<u32>,
    pub is_read: bool,
    pub is_write: bool,
    pub is_rmw: bool,
    pub is_fence: bool,
    pub is_final: bool,
}

/// The event universe an environment ranges over, with cached class sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    events: Vec<EventMeta>,
    reads: EventSet,
    writes: EventSet,
    rmws: EventSet,
    fences: EventSet,
    finals: EventSet,
}

impl Universe {
    pub fn new(events: Vec<EventMeta>) -> Result<Self, RelError> {
        if events.len() > MAX_EVENTS {
            return Err(RelError::TooLarge(events.len()));
        }
        let set = |f: &dyn Fn(&EventMeta) -> bool| {
            events.iter().enumerate().filter(|(_, e)| f(e)).map(|(i, _)| i).collect::<EventSet>()
        };
        Ok(Universe {
            reads: set(&|e| e.is_read),
            writes: set(&|e| e.is_write),
            rmws: set(&|e| e.is_rmw),
            fences: set(&|e| e.is_fence),
            finals: set(&|e| e.is_final),
            events,
        })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event(&self, i: usize) -> &EventMeta {
        &self.events[i]
    }

    pub fn events(&self) -> &[EventMeta] {
        &self.events
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.events.iter().position(|e| e.label == label)
    }

    pub fn reads(&self) -> EventSet {
        self.reads
    }

    pub fn writes(&self) -> EventSet {
        self.writes
    }

    pub fn rmws(&self) -> EventSet {
        self.rmws
    }

    pub fn fences(&self) -> EventSet {
        self.fences
    }

    pub fn finals(&self) -> EventSet {
        self.finals
    }

    /// Reads that are neither read-modify-writes nor final-state reads.
    pub fn plain_reads(&self) -> EventSet {
        self.reads.minus(self.rmws).minus(self.finals)
    }

    pub fn same_loc(&self, a: usize, b: usize) -> bool {
        let (x, y) = (self.events[a].loc, self.events[b].loc);
        x.is_some() && x == y
    }

    pub fn class(&self, class: &EventClass) -> Result<EventSet, RelError> {
        Ok(match class {
            EventClass::Read => self.reads,
            EventClass::Write => self.writes,
            EventClass::Rmw => self.rmws,
            EventClass::FenceRr => self.fences,
            EventClass::Final => self.finals,
            EventClass::PlainRead => self.plain_reads(),
            EventClass::Labels(labels) => {
                let mut s = EventSet::EMPTY;
                for l in labels {
                    s.insert(self.index_of(l).ok_or_else(|| RelError::UnknownEvent(l.clone()))?);
                }
                s
            }
        })
    }
}

/// Operand of an identity filter `[..]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EventClass {
    Read,
    Write,
    Rmw,
    FenceRr,
    Final,
    PlainRead,
    Labels(Vec<String>),
}

/// Base relations an environment can bind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Po,
    Rf,
    Rfi,
    Rfe,
    Mo,
    MoLoc,
    Rb,
    Hb,
    Named(String),
}

impl Atom {
    const BUILTIN: [Atom; 8] =
        [Atom::Po, Atom::Rf, Atom::Rfi, Atom::Rfe, Atom::Mo, Atom::MoLoc, Atom::Rb, Atom::Hb];

    pub fn name(&self) -> &str {
        match self {
            Atom::Po => "po",
            Atom::Rf => "rf",
            Atom::Rfi => "rfi",
            Atom::Rfe => "rfe",
            Atom::Mo => "mo",
            Atom::MoLoc => "mo_loc",
            Atom::Rb => "rb",
            Atom::Hb => "hb",
            Atom::Named(n) => n,
        }
    }

    pub fn from_name(name: &str) -> Atom {
        Atom::BUILTIN
            .iter()
            .find(|a| a.name() == name)
            .cloned()
            .unwrap_or_else(|| Atom::Named(name.to_string()))
    }

    fn slot(&self) -> Option<usize> {
        Atom::BUILTIN.iter().position(|a| a == self)
    }
}

/// Built-in patterns whose evaluation binds the locations of two reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// `rb;mo?;hb?;rfe;[r_x];hb;[r_y]` with `r_x`, `r_y` plain reads of distinct locations.
    ARr,
    /// `rb;mo;rfe;[r_x];po;[frr];po;[r_y]` with `r_x`, `r_y` plain reads of distinct locations.
    AFrr,
    /// `rb;mo?;[rmw];po;[R]`.
    RmwMid,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::ARr => "a_rr",
            Pattern::AFrr => "a_frr",
            Pattern::RmwMid => "rmw_mid",
        }
    }
}

/// Knobs for pattern evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PatternOptions {
    /// Let final-state reads match the read filters of `a_rr` and `a_frr`.
    pub final_reads_in_filters: bool,
    /// Evaluate `a_frr` as `rb;mo?;hb?;rfe;[r_x];po;[frr];po;[r_y]`.
    pub frr_generalized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Atom(Atom),
    Id(EventClass),
    Seq(Vec<RelExpr>),
    Alt(Vec<RelExpr>),
    Inverse(Box<RelExpr>),
    Opt(Box<RelExpr>),
    Plus(Box<RelExpr>),
    Diff(Box<RelExpr>, Box<RelExpr>),
    Pattern(Pattern),
}

impl RelExpr {
    pub fn atom(a: Atom) -> Self {
        RelExpr::Atom(a)
    }

    pub fn seq(parts: impl IntoIterator<Item = RelExpr>) -> Self {
        let mut v: Vec<RelExpr> = parts.into_iter().collect();
        if v.len() == 1 {
            v.pop().unwrap()
        } else {
            RelExpr::Seq(v)
        }
    }

    pub fn alt(parts: impl IntoIterator<Item = RelExpr>) -> Self {
        let mut v: Vec<RelExpr> = parts.into_iter().collect();
        if v.len() == 1 {
            v.pop().unwrap()
        } else {
            RelExpr::Alt(v)
        }
    }

    pub fn opt(self) -> Self {
        RelExpr::Opt(Box::new(self))
    }

    pub fn plus(self) -> Self {
        RelExpr::Plus(Box::new(self))
    }

    pub fn inverse(self) -> Self {
        RelExpr::Inverse(Box::new(self))
    }

    pub fn minus(self, other: RelExpr) -> Self {
        RelExpr::Diff(Box::new(self), Box::new(other))
    }

    /// Top-level sequential parts.
    pub fn parts(&self) -> Vec<RelExpr> {
        match self {
            RelExpr::Seq(v) => v.clone(),
            e => vec![e.clone()],
        }
    }

    /// Atoms mentioned anywhere in the expression.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            RelExpr::Atom(a) => out.push(a.clone()),
            RelExpr::Id(_) => {}
            RelExpr::Seq(v) | RelExpr::Alt(v) => v.iter().for_each(|e| e.collect_atoms(out)),
            RelExpr::Inverse(e) | RelExpr::Opt(e) | RelExpr::Plus(e) => e.collect_atoms(out),
            RelExpr::Diff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            RelExpr::Pattern(Pattern::ARr) => {
                out.extend([Atom::Rb, Atom::Mo, Atom::Hb, Atom::Rfe]);
            }
            RelExpr::Pattern(Pattern::AFrr) => {
                out.extend([Atom::Rb, Atom::Mo, Atom::Hb, Atom::Rfe, Atom::Po]);
            }
            RelExpr::Pattern(Pattern::RmwMid) => out.extend([Atom::Rb, Atom::Mo, Atom::Po]),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            RelExpr::Alt(_) => 1,
            RelExpr::Diff(..) => 2,
            RelExpr::Seq(_) => 3,
            RelExpr::Inverse(_) | RelExpr::Opt(_) | RelExpr::Plus(_) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            RelExpr::Atom(a) => write!(f, "{}", a.name()),
            RelExpr::Id(c) => match c {
                EventClass::Read => write!(f, "[R]"),
                EventClass::Write => write!(f, "[W]"),
                EventClass::Rmw => write!(f, "[rmw]"),
                EventClass::FenceRr => write!(f, "[frr]"),
                EventClass::Final => write!(f, "[final]"),
                EventClass::PlainRead => write!(f, "[plain]"),
                EventClass::Labels(ls) => write!(f, "[{{{}}}]", ls.join(",")),
            },
            RelExpr::Seq(v) => join(f, v, ";", 4),
            RelExpr::Alt(v) => join(f, v, " | ", 2),
            RelExpr::Diff(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " \\ ")?;
                b.fmt_prec(f, 3)
            }
            RelExpr::Inverse(e) => {
                e.fmt_prec(f, 5)?;
                write!(f, "^-1")
            }
            RelExpr::Opt(e) => {
                e.fmt_prec(f, 5)?;
                write!(f, "?")
            }
            RelExpr::Plus(e) => {
                e.fmt_prec(f, 5)?;
                write!(f, "+")
            }
            RelExpr::Pattern(p) => write!(f, "{}", p.name()),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, v: &[RelExpr], sep: &str, min: u8) -> fmt::Result {
    for (i, e) in v.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        e.fmt_prec(f, min)?;
    }
    Ok(())
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Bindings for atoms over a fixed universe.
#[derive(Clone, Debug)]
pub struct Env<'u> {
    universe: &'u Universe,
    base: [Option<Relation>; 8],
    named: BTreeMap<String, Relation>,
    pub options: PatternOptions,
}

impl<'u> Env<'u> {
    pub fn new(universe: &'u Universe) -> Self {
        Env { universe, base: Default::default(), named: BTreeMap::new(), options: PatternOptions::default() }
    }

    pub fn universe(&self) -> &'u Universe {
        self.universe
    }

    pub fn bind(&mut self, atom: Atom, rel: Relation) -> Result<(), RelError> {
        if rel.size() != self.universe.len() {
            return Err(RelError::UniverseMismatch(rel.size(), self.universe.len()));
        }
        match atom.slot() {
            Some(i) => self.base[i] = Some(rel),
            None => {
                self.named.insert(atom.name().to_string(), rel);
            }
        }
        Ok(())
    }

    pub fn get(&self, atom: &Atom) -> Result<&Relation, RelError> {
        let found = match atom.slot() {
            Some(i) => self.base[i].as_ref(),
            None => self.named.get(atom.name()),
        };
        found.ok_or_else(|| RelError::UnboundAtom(atom.name().to_string()))
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }
}

/// Evaluates `expr` in `env`.
pub fn eval(expr: &RelExpr, env: &Env<'_>) -> Result<Relation, RelError> {
    let n = env.size();
    Ok(match expr {
        RelExpr::Atom(a) => env.get(a)?.clone(),
        RelExpr::Id(c) => Relation::identity_on(n, env.universe.class(c)?),
        RelExpr::Seq(v) => {
            let mut acc = Relation::identity(n);
            for e in v {
                acc = acc.compose(&eval(e, env)?)?;
            }
            acc
        }
        RelExpr::Alt(v) => {
            let mut acc = Relation::empty(n);
            for e in v {
                acc = acc.union(&eval(e, env)?)?;
            }
            acc
        }
        RelExpr::Inverse(e) => eval(e, env)?.inverse(),
        RelExpr::Opt(e) => eval(e, env)?.reflexive(),
        RelExpr::Plus(e) => eval(e, env)?.transitive_closure(),
        RelExpr::Diff(a, b) => eval(a, env)?.difference(&eval(b, env)?)?,
        RelExpr::Pattern(p) => eval_pattern(*p, env)?,
    })
}

fn pattern_reads(env: &Env<'_>) -> EventSet {
    let u = env.universe;
    if env.options.final_reads_in_filters {
        u.reads().minus(u.rmws())
    } else {
        u.plain_reads()
    }
}

/// `{(a, r_y) | (a, r_x) ∈ pre, (r_x, r_y) ∈ mid, loc(r_x) ≠ loc(r_y)}` over pattern reads.
fn loc_bound(env: &Env<'_>, pre: &Relation, mid: &Relation) -> Relation {
    let u = env.universe;
    let reads = pattern_reads(env);
    let mut out = Relation::empty(env.size());
    for a in 0..env.size() {
        for rx in pre.row(a).intersection(reads).iter() {
            for ry in mid.row(rx).intersection(reads).iter() {
                if !u.same_loc(rx, ry) {
                    out.insert(a, ry);
                }
            }
        }
    }
    out
}

fn eval_pattern(p: Pattern, env: &Env<'_>) -> Result<Relation, RelError> {
    let rb = env.get(&Atom::Rb)?;
    let mo = env.get(&Atom::Mo)?;
    match p {
        Pattern::ARr => {
            let hb = env.get(&Atom::Hb)?;
            let pre = rb.compose(&mo.reflexive())?.compose(&hb.reflexive())?.compose(env.get(&Atom::Rfe)?)?;
            Ok(loc_bound(env, &pre, hb))
        }
        Pattern::AFrr => {
            let rfe = env.get(&Atom::Rfe)?;
            let po = env.get(&Atom::Po)?;
            let pre = if env.options.frr_generalized {
                rb.compose(&mo.reflexive())?.compose(&env.get(&Atom::Hb)?.reflexive())?.compose(rfe)?
            } else {
                rb.compose(mo)?.compose(rfe)?
            };
            let frr = Relation::identity_on(env.size(), env.universe.fences());
            let mid = po.compose(&frr)?.compose(po)?;
            Ok(loc_bound(env, &pre, &mid))
        }
        Pattern::RmwMid => {
            let po = env.get(&Atom::Po)?;
            let u = env.universe;
            Ok(rb
                .compose(&mo.reflexive())?
                .compose(&Relation::identity_on(u.len(), u.rmws()))?
                .compose(po)?
                .compose(&Relation::identity_on(u.len(), u.reads()))?)
        }
    }
}
