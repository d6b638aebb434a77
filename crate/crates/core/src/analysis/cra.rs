//! Reads whose `rf` edge a rule's cycles depend on.
//!
//! The brute-force oracle compares the execution with a copy missing one
//! read's `rf` edge and asks whether some reflexive pair of the body is
//! realised through a lost edge. Composition tracks two relations per
//! subterm: every pair, and the pairs reachable through a lost edge. `hb`
//! is unfolded to `(po | rf)+` whose lost steps are the read's incoming
//! `rf` edge, except a same-thread edge that `po` already provides. Edges
//! from init writes count as lost steps even though `po` also orders the
//! init writes first.

use super::AnalysisError;
use crate::execution::{Derived, Execution};
use crate::models::builtin_model;
use crate::relalg::{eval, Atom, Env, EventSet, PatternOptions, RelExpr, Relation};

pub const SC_RULES: [&str; 5] = ["a", "b", "c", "d", "e"];

struct Tracked {
    all: Relation,
    lost: Relation,
}

struct Ctx<'a> {
    env: Env<'a>,
    env_r: Env<'a>,
    /// `rf` steps into the read that `po` does not duplicate.
    hb_lost: Relation,
}

fn star(r: &Relation) -> Relation {
    r.transitive_closure().reflexive()
}

fn track(expr: &RelExpr, cx: &Ctx<'_>) -> Result<Tracked, AnalysisError> {
    let n = cx.env.size();
    let pairwise = |expr: &RelExpr| -> Result<Tracked, AnalysisError> {
        let all = eval(expr, &cx.env)?;
        let lost = all.difference(&eval(expr, &cx.env_r)?)?;
        Ok(Tracked { all, lost })
    };
    Ok(match expr {
        RelExpr::Atom(Atom::Hb) => {
            let all = cx.env.get(&Atom::Hb)?.clone();
            let s = star(&all);
            let lost = s.compose(&cx.hb_lost)?.compose(&s)?;
            Tracked { all, lost }
        }
        RelExpr::Atom(_) | RelExpr::Pattern(_) => pairwise(expr)?,
        RelExpr::Id(_) => Tracked { all: eval(expr, &cx.env)?, lost: Relation::empty(n) },
        RelExpr::Seq(v) => {
            let mut acc = Tracked { all: Relation::identity(n), lost: Relation::empty(n) };
            for part in v {
                let t = track(part, cx)?;
                let lost = acc.lost.compose(&t.all)?.union(&acc.all.compose(&t.lost)?)?;
                acc = Tracked { all: acc.all.compose(&t.all)?, lost };
            }
            acc
        }
        RelExpr::Alt(v) => {
            let mut acc = Tracked { all: Relation::empty(n), lost: Relation::empty(n) };
            for part in v {
                let t = track(part, cx)?;
                acc = Tracked { all: acc.all.union(&t.all)?, lost: acc.lost.union(&t.lost)? };
            }
            acc
        }
        RelExpr::Inverse(e) => {
            let t = track(e, cx)?;
            Tracked { all: t.all.inverse(), lost: t.lost.inverse() }
        }
        RelExpr::Opt(e) => {
            let t = track(e, cx)?;
            Tracked { all: t.all.reflexive(), lost: t.lost }
        }
        RelExpr::Plus(e) => {
            let t = track(e, cx)?;
            let s = star(&t.all);
            Tracked { all: t.all.transitive_closure(), lost: s.compose(&t.lost)?.compose(&s)? }
        }
        RelExpr::Diff(a, b) => {
            let t = track(a, cx)?;
            let all = t.all.difference(&eval(b, &cx.env)?)?;
            let lost = t.lost.intersection(&all)?;
            Tracked { all, lost }
        }
    })
}

fn sourced_reads(e: &Execution) -> impl Iterator<Item = usize> + '_ {
    e.pretrace().reads().iter().filter(|&r| e.rf_source(r).is_some())
}

/// Reads `r` such that some reflexive pair of `body` is realised through
/// `r`'s `rf` edge. Empty when `body` is irreflexive.
pub fn cra_bruteforce(body: &RelExpr, e: &Execution) -> Result<EventSet, AnalysisError> {
    let opts = PatternOptions::default();
    let d = e.derive();
    let env = d.env(e, opts);
    if eval(body, &env)?.is_irreflexive() {
        return Ok(EventSet::EMPTY);
    }
    let mut out = EventSet::EMPTY;
    for r in sourced_reads(e) {
        let without = e.without_rf(EventSet::singleton(r));
        let d_r = without.derive();
        let hb_lost = d.rf.filter(|w, x| x == r && !(d.rfi.contains(w, x) && d.po.contains(w, x)));
        let cx = Ctx { env: env.clone(), env_r: d_r.env(e, opts), hb_lost };
        if !track(body, &cx)?.lost.is_irreflexive() {
            out.insert(r);
        }
    }
    Ok(out)
}

/// Reads whose `rf` removal alone makes `body` irreflexive.
pub fn cra_literal(body: &RelExpr, e: &Execution) -> Result<EventSet, AnalysisError> {
    let opts = PatternOptions::default();
    if eval(body, &e.derive().env(e, opts))?.is_irreflexive() {
        return Ok(EventSet::EMPTY);
    }
    let mut out = EventSet::EMPTY;
    for r in sourced_reads(e) {
        let without = e.without_rf(EventSet::singleton(r));
        if eval(body, &without.derive().env(e, opts))?.is_irreflexive() {
            out.insert(r);
        }
    }
    Ok(out)
}

/// Reads `r` with `x pre r` and `r hb x` for some `x`.
fn closes(pre: &Relation, hb: &Relation, reads: EventSet) -> EventSet {
    reads.iter().filter(|&r| !pre.column(r).intersection(hb.row(r)).is_empty()).collect()
}

fn rules_closed_form(rule: &str, d: &Derived, reads: EventSet) -> Result<EventSet, AnalysisError> {
    let hb_opt = d.hb.reflexive();
    Ok(match rule {
        "a" => EventSet::EMPTY,
        "b" => {
            let back: EventSet = reads
                .iter()
                .filter(|&r| d.rfi.column(r).iter().any(|w| d.po.contains(r, w)))
                .collect();
            closes(&d.rfe, &d.hb, reads).union(back)
        }
        // an rmw can close the cycle itself, so the last step may be empty
        "c" => closes(&d.mo.compose(&hb_opt)?.compose(&d.rfe)?, &hb_opt, reads),
        "d" => {
            let own = d.rb.compose(&d.hb)?.reflexive_points().intersection(reads);
            closes(&d.rb.compose(&hb_opt)?.compose(&d.rfe)?, &d.hb, reads).union(own)
        }
        "e" => {
            let rb_mo = d.rb.compose(&d.mo)?;
            let own = rb_mo.compose(&d.hb)?.reflexive_points().intersection(reads);
            closes(&rb_mo.compose(&hb_opt)?.compose(&d.rfe)?, &d.hb, reads).union(own)
        }
        other => return Err(AnalysisError::UnknownRule(other.to_string())),
    })
}

/// The pattern characterisation of the crucial reads of each SC rule,
/// evaluated directly on the execution's relations.
pub fn cra_sc_closed_form(rule: &str, e: &Execution) -> Result<EventSet, AnalysisError> {
    rules_closed_form(rule, &e.derive(), e.pretrace().reads())
}

/// The body of an SC rule, with totality read as `mo` irreflexivity.
pub fn sc_rule_body(rule: &str) -> Result<RelExpr, AnalysisError> {
    let sc = builtin_model("sc")?;
    match sc.rule(rule).map(|r| r.body().cloned()) {
        Some(Some(b)) => Ok(b),
        Some(None) => Ok(RelExpr::Atom(Atom::Mo)),
        None => Err(AnalysisError::UnknownRule(rule.to_string())),
    }
}
