use std::collections::VecDeque;
use std::fmt;

use super::{eval, Atom, Env, EventSet, RelError, RelExpr, Relation};

/// One labelled edge of a witness path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hop {
    pub label: String,
    pub to: usize,
}

/// A closed path `start -l1-> e1 -l2-> ... -> start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub start: usize,
    pub hops: Vec<Hop>,
}

impl Cycle {
    /// Alternating event labels and edge labels, starting and ending at `start`.
    pub fn render(&self, label: impl Fn(usize) -> String) -> Vec<String> {
        let mut out = vec![label(self.start)];
        for h in &self.hops {
            out.push(h.label.clone());
            out.push(label(h.to));
        }
        out
    }

    pub fn events(&self) -> Vec<usize> {
        std::iter::once(self.start).chain(self.hops.iter().map(|h| h.to)).collect()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for h in &self.hops {
            write!(f, " -{}-> {}", h.label, h.to)?;
        }
        Ok(())
    }
}

/// Shortest cycle through the lowest-indexed event `e` with `(e, e)` in
/// `parts[0] ; ... ; parts[k]`, each part expanded into named hops.
pub fn reflexive_witness(parts: &[RelExpr], env: &Env<'_>) -> Result<Option<Cycle>, RelError> {
    let whole = eval(&RelExpr::seq(parts.iter().cloned()), env)?;
    match whole.reflexive_points().iter().next() {
        None => Ok(None),
        Some(e) => reflexive_witness_at(parts, env, e),
    }
}

/// Like [`reflexive_witness`] but anchored at `start`.
pub fn reflexive_witness_at(parts: &[RelExpr], env: &Env<'_>, start: usize) -> Result<Option<Cycle>, RelError> {
    let whole = eval(&RelExpr::seq(parts.iter().cloned()), env)?;
    if !whole.contains(start, start) {
        return Ok(None);
    }
    let hops = seq_path(parts, env, start, start)?;
    Ok(Some(Cycle { start, hops }))
}

fn seq_path(parts: &[RelExpr], env: &Env<'_>, a: usize, b: usize) -> Result<Vec<Hop>, RelError> {
    match parts {
        [] => Ok(vec![]),
        [only] => expand(only, env, a, b),
        [first, rest @ ..] => {
            let head = eval(first, env)?;
            let tail = eval(&RelExpr::seq(rest.iter().cloned()), env)?;
            let mid = head
                .row(a)
                .iter()
                .find(|&c| tail.contains(c, b))
                .expect("pair must be derivable through the composition");
            let mut hops = expand(first, env, a, mid)?;
            hops.extend(seq_path(rest, env, mid, b)?);
            Ok(hops)
        }
    }
}

/// Hops justifying `(a, b) ∈ eval(expr)`.
fn expand(expr: &RelExpr, env: &Env<'_>, a: usize, b: usize) -> Result<Vec<Hop>, RelError> {
    match expr {
        RelExpr::Atom(Atom::Hb) if env.get(&Atom::Po).is_ok() && env.get(&Atom::Rf).is_ok() => {
            hb_path(env, a, b)
        }
        RelExpr::Atom(atom) => Ok(vec![Hop { label: atom.name().to_string(), to: b }]),
        RelExpr::Id(_) => Ok(vec![]),
        RelExpr::Seq(v) => seq_path(v, env, a, b),
        RelExpr::Alt(v) => {
            for e in v {
                if eval(e, env)?.contains(a, b) {
                    return expand(e, env, a, b);
                }
            }
            unreachable!("pair not in any alternative")
        }
        RelExpr::Opt(e) => {
            if a == b {
                Ok(vec![])
            } else {
                expand(e, env, a, b)
            }
        }
        RelExpr::Plus(e) => {
            let step = eval(e, env)?;
            let path = shortest_path(&step, a, b).expect("pair in closure has a path");
            let mut hops = Vec::new();
            let mut from = a;
            for to in path {
                hops.extend(expand(e, env, from, to)?);
                from = to;
            }
            Ok(hops)
        }
        RelExpr::Diff(l, _) => expand(l, env, a, b),
        RelExpr::Inverse(_) | RelExpr::Pattern(_) => Ok(vec![Hop { label: expr.to_string(), to: b }]),
    }
}

/// Breadth-first shortest path of at least one edge; returns the visited
/// events after `a`, ending with `b`. Ties go to lower indices.
pub fn shortest_path(step: &Relation, a: usize, b: usize) -> Option<Vec<usize>> {
    let n = step.size();
    let mut prev = vec![usize::MAX; n];
    let mut seen = EventSet::EMPTY;
    let mut queue = VecDeque::new();
    for s in step.row(a).iter() {
        if !seen.contains(s) {
            seen.insert(s);
            prev[s] = a;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if u == b {
            let mut path = vec![b];
            let mut cur = b;
            while prev[cur] != a {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for v in step.row(u).iter() {
            if !seen.contains(v) {
                seen.insert(v);
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

fn hb_path(env: &Env<'_>, a: usize, b: usize) -> Result<Vec<Hop>, RelError> {
    let po = env.get(&Atom::Po)?;
    let rf = env.get(&Atom::Rf)?;
    let rfi = env.get(&Atom::Rfi).ok();
    let step = po.union(rf)?;
    let path = shortest_path(&step, a, b).expect("hb pair has a po/rf path");
    let mut from = a;
    let mut hops = Vec::new();
    for to in path {
        let label = if po.contains(from, to) {
            "po"
        } else if rfi.is_some_and(|r| r.contains(from, to)) {
            "rfi"
        } else if rfi.is_some() {
            "rfe"
        } else {
            "rf"
        };
        hops.push(Hop { label: label.to_string(), to });
        from = to;
    }
    Ok(hops)
}
