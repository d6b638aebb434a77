//! Axiomatic memory models: named rules over execution relations, built-in
//! models, a text format for custom models, and consistency checking.

mod behaviour;
mod dsl;

pub use behaviour::{behaviours, check_assertion, AssertionCheck, BehaviourOptions, Behaviours, OutcomeRow};
pub use dsl::{parse_expr, parse_model};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::execution::{Derived, Execution};
use crate::relalg::{
    eval, reflexive_witness_at, Atom, Env, EventSet, Pattern, PatternOptions, RelError, RelExpr, Relation,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown model `{0}` (built-in: sc, tso, sc_rr, sc_rr_ext, porf)")]
    UnknownModel(String),
    #[error("model file line {0}: {1}")]
    Parse(usize, String),
    #[error(transparent)]
    Relation(#[from] RelError),
    #[error(transparent)]
    Pretrace(#[from] crate::pretrace::PretraceError),
    #[error(transparent)]
    Exec(#[from] crate::execution::ExecError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// The body relation has no `(e, e)` pair.
    Irreflexive(RelExpr),
    /// `mo` is a strict total order over all writes.
    MoTotal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub kind: RuleKind,
}

impl Rule {
    pub fn irreflexive(name: &str, body: RelExpr) -> Self {
        Rule { name: name.into(), kind: RuleKind::Irreflexive(body) }
    }

    pub fn body(&self) -> Option<&RelExpr> {
        match &self.kind {
            RuleKind::Irreflexive(b) => Some(b),
            RuleKind::MoTotal => None,
        }
    }
}

/// How `body \ a_rr` is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExcuseMode {
    /// A reflexive pair of `body` at a plain read `r` is excused only when
    /// every cycle through `r` enters a plain read of another location by an
    /// external read-from edge.
    #[default]
    PerPath,
    /// Plain relational difference: `(r, r)` is excused when any `a_rr` path
    /// links `r` to itself, whatever cycle made `body` reflexive.
    Pairwise,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryModel {
    pub name: String,
    pub rules: Vec<Rule>,
    pub excuse: ExcuseMode,
    pub patterns: PatternOptions,
}

impl MemoryModel {
    pub fn new(name: &str, rules: Vec<Rule>) -> Self {
        MemoryModel { name: name.into(), rules, excuse: ExcuseMode::PerPath, patterns: PatternOptions::default() }
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Keeps only the named rules, in their original order.
    pub fn restricted(&self, names: &[&str]) -> MemoryModel {
        let mut m = self.clone();
        m.rules.retain(|r| names.contains(&r.name.as_str()));
        m
    }

    /// The model includes `mo;hb` irreflexivity, so any execution placing a
    /// thread write `mo`-before an init write is inconsistent.
    pub fn forces_inits_first(&self) -> bool {
        let target = RelExpr::seq([RelExpr::Atom(Atom::Mo), RelExpr::Atom(Atom::Hb)]);
        self.rules.iter().any(|r| r.body() == Some(&target))
    }
}

impl fmt::Display for MemoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {}", self.name)?;
        if self.excuse == ExcuseMode::Pairwise {
            writeln!(f, "option pairwise")?;
        }
        if self.patterns.final_reads_in_filters {
            writeln!(f, "option final_reads_in_filters")?;
        }
        if self.patterns.frr_generalized {
            writeln!(f, "option frr_generalized")?;
        }
        for r in &self.rules {
            match &r.kind {
                RuleKind::MoTotal => writeln!(f, "{} : mo_total", r.name)?,
                RuleKind::Irreflexive(b) => writeln!(f, "{} : irreflexive {b}", r.name)?,
            }
        }
        Ok(())
    }
}

const SC: &str = "model sc
a : mo_total
b : irreflexive hb
c : irreflexive mo;hb
d : irreflexive rb;hb
e : irreflexive rb;mo;hb
";

const TSO: &str = "model tso
a : mo_total
b : irreflexive hb
c : irreflexive mo;hb
d : irreflexive rb;hb
e : irreflexive rb;mo;rfe;po
";

const SC_RR: &str = "model sc_rr
a : mo_total
b : irreflexive hb
c : irreflexive mo;hb
d : irreflexive rb;hb \\ a_rr
e : irreflexive rb;mo;hb \\ a_rr
";

const SC_RR_EXT: &str = "model sc_rr_ext
a : mo_total
b : irreflexive hb
c : irreflexive mo;hb
d : irreflexive rb;hb \\ a_rr
e : irreflexive rb;mo;hb \\ a_rr
f : irreflexive rb;mo
g : irreflexive a_frr
";

const PORF: &str = "model porf
porf : irreflexive (po | rf)+
";

pub const BUILTIN_MODELS: [&str; 5] = ["sc", "tso", "sc_rr", "sc_rr_ext", "porf"];

pub fn builtin_model(name: &str) -> Result<MemoryModel, ModelError> {
    let src = match name {
        "sc" => SC,
        "tso" => TSO,
        "sc_rr" => SC_RR,
        "sc_rr_ext" => SC_RR_EXT,
        "porf" => PORF,
        other => return Err(ModelError::UnknownModel(other.to_string())),
    };
    parse_model(src, name)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    /// Alternating event and edge labels, first event repeated at the end;
    /// empty for `mo_total` violations.
    pub cycle: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub consistent: bool,
    pub violations: Vec<Violation>,
}

/// Evaluation context for one execution under one model.
pub struct Checker<'e> {
    exec: &'e Execution,
    derived: Derived,
    env: Env<'e>,
    excuse: ExcuseMode,
}

fn is_arr_difference(body: &RelExpr) -> Option<&RelExpr> {
    match body {
        RelExpr::Diff(lhs, rhs) if **rhs == RelExpr::Pattern(Pattern::ARr) => Some(lhs),
        _ => None,
    }
}

impl<'e> Checker<'e> {
    pub fn new(model: &MemoryModel, exec: &'e Execution) -> Self {
        let derived = exec.derive();
        let env = derived.env(exec, model.patterns);
        Checker { exec, derived, env, excuse: model.excuse }
    }

    pub fn env(&self) -> &Env<'e> {
        &self.env
    }

    pub fn derived(&self) -> &Derived {
        &self.derived
    }

    /// The environment with external read-from edges into plain reads of
    /// locations other than that of `anchor` removed.
    fn excusing_env(&self, anchor: usize) -> Env<'e> {
        let u = self.exec.pretrace().universe();
        let reads = if self.env.options.final_reads_in_filters { u.reads().minus(u.rmws()) } else { u.plain_reads() };
        let drop = |w: usize, r: usize| self.derived.rfe.contains(w, r) && reads.contains(r) && !u.same_loc(r, anchor);
        let rf = self.derived.rf.filter(|w, r| !drop(w, r));
        let rfe = self.derived.rfe.filter(|w, r| !drop(w, r));
        let hb = self.derived.po.union(&rf).expect("same universe").transitive_closure();
        let mut env = self.env.clone();
        env.bind(Atom::Rf, rf).expect("same universe");
        env.bind(Atom::Rfe, rfe).expect("same universe");
        env.bind(Atom::Hb, hb).expect("same universe");
        env
    }

    /// Events `e` at which the rule's body is reflexive after excusals.
    pub fn violating_points(&self, rule: &Rule) -> Result<EventSet, RelError> {
        let body = match &rule.kind {
            RuleKind::MoTotal => {
                return Ok(if self.exec.mo_is_total() { EventSet::EMPTY } else { EventSet::full(1) });
            }
            RuleKind::Irreflexive(b) => b,
        };
        match (self.excuse, is_arr_difference(body)) {
            (ExcuseMode::PerPath, Some(lhs)) => {
                let points = eval(lhs, &self.env)?.reflexive_points();
                let u = self.exec.pretrace().universe();
                let reads =
                    if self.env.options.final_reads_in_filters { u.reads().minus(u.rmws()) } else { u.plain_reads() };
                let mut out = EventSet::EMPTY;
                for e in points.iter() {
                    if !reads.contains(e) || eval(lhs, &self.excusing_env(e))?.contains(e, e) {
                        out.insert(e);
                    }
                }
                Ok(out)
            }
            _ => Ok(eval(body, &self.env)?.reflexive_points()),
        }
    }

    pub fn rule_holds(&self, rule: &Rule) -> Result<bool, RelError> {
        Ok(self.violating_points(rule)?.is_empty())
    }

    /// Shortest cycle at the lowest violating event, rendered with labels.
    pub fn witness(&self, rule: &Rule) -> Result<Option<Vec<String>>, RelError> {
        let points = self.violating_points(rule)?;
        let Some(e) = points.iter().next() else { return Ok(None) };
        let body = match &rule.kind {
            RuleKind::MoTotal => return Ok(Some(self.mo_witness())),
            RuleKind::Irreflexive(b) => b,
        };
        let label = |i: usize| self.exec.label(i).to_string();
        let cycle = match (self.excuse, is_arr_difference(body)) {
            (ExcuseMode::PerPath, Some(lhs)) => {
                let env = self.excusing_env(e);
                let env = if eval(lhs, &env)?.contains(e, e) { env } else { self.env.clone() };
                reflexive_witness_at(&lhs.parts(), &env, e)?
            }
            (ExcuseMode::Pairwise, Some(lhs)) => reflexive_witness_at(&lhs.parts(), &self.env, e)?,
            _ => reflexive_witness_at(&body.parts(), &self.env, e)?,
        };
        Ok(cycle.map(|c| c.render(label)))
    }

    fn mo_witness(&self) -> Vec<String> {
        let mo = self.exec.mo();
        let writes = self.exec.pretrace().writes();
        if let Some(w) = mo.reflexive_points().iter().next() {
            return vec![self.exec.label(w).into(), "mo".into(), self.exec.label(w).into()];
        }
        if let Some((a, b)) = mo.missing_pair(writes) {
            return vec![format!("{} unordered with {}", self.exec.label(a), self.exec.label(b))];
        }
        Vec::new()
    }
}

/// Fast yes/no consistency.
pub fn is_consistent(model: &MemoryModel, exec: &Execution) -> Result<bool, RelError> {
    let c = Checker::new(model, exec);
    for r in &model.rules {
        if !c.rule_holds(r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Names of the rules the execution violates.
pub fn violated_rules(model: &MemoryModel, exec: &Execution) -> Result<Vec<String>, RelError> {
    let c = Checker::new(model, exec);
    let mut out = Vec::new();
    for r in &model.rules {
        if !c.rule_holds(r)? {
            out.push(r.name.clone());
        }
    }
    Ok(out)
}

/// Consistency with a witness cycle for every violated rule.
pub fn check_consistent(model: &MemoryModel, exec: &Execution) -> Result<Verdict, RelError> {
    let c = Checker::new(model, exec);
    let mut violations = Vec::new();
    for r in &model.rules {
        if let Some(cycle) = c.witness(r)? {
            violations.push(Violation { rule: r.name.clone(), cycle });
        }
    }
    Ok(Verdict { consistent: violations.is_empty(), violations })
}

/// Evaluates a rule body (pairwise semantics) for inspection.
pub fn eval_body(model: &MemoryModel, exec: &Execution, body: &RelExpr) -> Result<Relation, RelError> {
    let c = Checker::new(model, exec);
    eval(body, c.env())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_print_back() {
        for name in BUILTIN_MODELS {
            let m = builtin_model(name).unwrap();
            assert_eq!(m.name, name);
            assert_eq!(parse_model(&m.to_string(), "x").unwrap(), m);
        }
        assert_eq!(builtin_model("sc").unwrap().rules.len(), 5);
        assert_eq!(builtin_model("sc_rr_ext").unwrap().rules.len(), 7);
        assert!(matches!(builtin_model("arm"), Err(ModelError::UnknownModel(_))));
    }

    #[test]
    fn rule_c_models_force_inits_first() {
        assert!(builtin_model("sc").unwrap().forces_inits_first());
        assert!(builtin_model("tso").unwrap().forces_inits_first());
        assert!(!builtin_model("porf").unwrap().forces_inits_first());
    }
}
