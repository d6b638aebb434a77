use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::AnalysisError;
use crate::execution::{candidates, CandidateOptions, Execution, MoMode};
use crate::models::{is_consistent, MemoryModel};
use crate::pretrace::PreTrace;
use crate::relalg::Relation;
use crate::transform::{apply_effect, TransformationEffect};

/// Small cycles that SC forbids and that survive read-read relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `rfi;po`
    A,
    /// `mo;po`
    B,
    /// `mo;rfe;po`
    C,
    /// `rb;mo?;po`
    D,
    /// `rb;rfe;po`
    E,
    /// `mo;rf`, only possible through a read-modify-write.
    MoRf,
    /// `rb;mo`
    RbMo,
    /// `rb;mo;rfe;po;[frr];po`
    RbMoRfeFence,
}

impl Shape {
    pub const ALL: [Shape; 8] =
        [Shape::A, Shape::B, Shape::C, Shape::D, Shape::E, Shape::MoRf, Shape::RbMo, Shape::RbMoRfeFence];

    /// One of the five shapes every relevant SC-only violation reduces to.
    pub fn is_core(self) -> bool {
        matches!(self, Shape::A | Shape::B | Shape::C | Shape::D | Shape::E)
    }

    pub fn relation(self) -> &'static str {
        match self {
            Shape::A => "rfi;po",
            Shape::B => "mo;po",
            Shape::C => "mo;rfe;po",
            Shape::D => "rb;mo?;po",
            Shape::E => "rb;rfe;po",
            Shape::MoRf => "mo;rf",
            Shape::RbMo => "rb;mo",
            Shape::RbMoRfeFence => "rb;mo;rfe;po;[frr];po",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::A | Shape::B | Shape::C | Shape::D | Shape::E => write!(f, "{:?}: {}", self, self.relation()),
            _ => write!(f, "{}", self.relation()),
        }
    }
}

fn seq(rels: &[&Relation]) -> Relation {
    let mut acc = Relation::identity(rels[0].size());
    for r in rels {
        acc = acc.compose(r).expect("one universe");
    }
    acc
}

/// Every shape whose relation has a reflexive pair in `e`.
pub fn classify_cycle_shapes(e: &Execution) -> BTreeSet<Shape> {
    let d = e.derive();
    let fences = Relation::identity_on(d.po.size(), e.pretrace().universe().fences());
    let mo_opt = d.mo.reflexive();
    let rel = |s: Shape| match s {
        Shape::A => seq(&[&d.rfi, &d.po]),
        Shape::B => seq(&[&d.mo, &d.po]),
        Shape::C => seq(&[&d.mo, &d.rfe, &d.po]),
        Shape::D => seq(&[&d.rb, &mo_opt, &d.po]),
        Shape::E => seq(&[&d.rb, &d.rfe, &d.po]),
        Shape::MoRf => seq(&[&d.mo, &d.rf]),
        Shape::RbMo => seq(&[&d.rb, &d.mo]),
        Shape::RbMoRfeFence => seq(&[&d.rb, &d.mo, &d.rfe, &d.po, &fences, &d.po]),
    };
    Shape::ALL.into_iter().filter(|&s| !rel(s).is_irreflexive()).collect()
}

/// A target execution allowed by the relaxed model but not the base
/// model, all of whose comparable source executions the relaxed model
/// rejects, paired with one such source execution.
#[derive(Clone, Debug)]
pub struct ShapeInstance {
    pub source: Execution,
    pub transformed: Execution,
    pub shapes: BTreeSet<Shape>,
}

impl ShapeInstance {
    pub fn covered(&self) -> bool {
        self.shapes.iter().any(|s| s.is_core())
    }

    /// The source has an `rfi;po` or `mo;rfe;po` cycle.
    pub fn needs_read_write_reorder(&self) -> bool {
        self.shapes.contains(&Shape::A) || self.shapes.contains(&Shape::C)
    }
}

/// All pairs the completeness argument for `relaxed` against `base` has to
/// handle for this effect.
pub fn shape_instances(
    p: &PreTrace,
    tr: &TransformationEffect,
    relaxed: &MemoryModel,
    base: &MemoryModel,
    limit: usize,
) -> Result<Vec<ShapeInstance>, AnalysisError> {
    let q = Arc::new(apply_effect(p, tr)?);
    let p = Arc::new(p.clone());
    let opts = CandidateOptions { limit, mo: MoMode::Full };
    let sources: Vec<(Execution, bool)> = candidates(&p, opts)?
        .map(|e| {
            let ok = is_consistent(relaxed, &e)?;
            Ok((e, ok))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let mut out = Vec::new();
    for t in candidates(&q, opts)? {
        if !is_consistent(relaxed, &t)? || is_consistent(base, &t)? {
            continue;
        }
        let comparable: Vec<&(Execution, bool)> = sources.iter().filter(|(s, _)| s.comparable(&t)).collect();
        if comparable.iter().any(|(_, ok)| *ok) {
            continue;
        }
        for (s, _) in comparable {
            out.push(ShapeInstance { source: s.clone(), transformed: t.clone(), shapes: classify_cycle_shapes(s) });
        }
    }
    Ok(out)
}
