//! The bundled litmus tests, raw executions and model files.

use std::sync::Arc;

use crate::execution::{enumerate_candidates, load_execution, CandidateOptions, Execution, RawExecution};
use crate::frontend::{parse_program, Program};
use crate::models::{parse_model, MemoryModel};
use crate::pretrace::{enumerate_pretraces, PretraceOptions};

macro_rules! fixtures {
    ($($name:literal => $file:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../fixtures/", $file)))),*]
    };
}

/// Litmus programs by name.
pub const LITMUS: &[(&str, &str)] = fixtures! {
    "sb" => "sb.lit",
    "sb_ro" => "sb_ro.lit",
    "mp" => "mp.lit",
    "mp_rr" => "mp_rr.lit",
    "mp_f" => "mp_f.lit",
    "mp_fs" => "mp_fs.lit",
    "mp_fs_t" => "mp_fs_t.lit",
    "inline4" => "inline4.lit",
    "inline4_t" => "inline4_t.lit",
    "welim" => "welim.lit",
    "welim_t" => "welim_t.lit",
    "rmw_atom" => "rmw_atom.lit",
    "rmw_mid" => "rmw_mid.lit",
    "lb" => "lb.lit",
    "corr" => "corr.lit",
    "empty" => "empty.lit",
    "branchy" => "branchy.lit",
    "filter" => "filter.lit",
    "regspill" => "regspill.lit",
    "regspill_t" => "regspill_t.lit",
    "condeq" => "condeq.lit",
    "condeq_t" => "condeq_t.lit",
    "reord" => "reord.lit",
    "reord_t" => "reord_t.lit",
    "reord_r" => "reord_r.lit",
    "reord_r_t" => "reord_r_t.lit",
    "codemotion" => "codemotion.lit",
    "codemotion_t" => "codemotion_t.lit",
};

/// Raw executions by name.
pub const RAW: &[(&str, &str)] = fixtures! {
    "porf_cyc" => "porf_cyc.exec",
    "sc_a" => "sc_a.exec",
    "sc_b" => "sc_b.exec",
    "sc_c" => "sc_c.exec",
    "sc_d" => "sc_d.exec",
    "sc_e" => "sc_e.exec",
    "po_mo" => "po_mo.exec",
};

/// Model files by name.
pub const MODELS: &[(&str, &str)] = fixtures! {
    "po_mo" => "po_mo.cat",
};

/// A program transformation in the corpus: source, target, and the edits
/// that produce the target's single pre-trace where there is one.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub before: &'static str,
    pub after: &'static str,
    pub effect: Option<&'static str>,
}

pub const PAIRS: &[Pair] = &[
    Pair { before: "sb", after: "sb_ro", effect: Some("reorder W1 R1") },
    Pair { before: "mp", after: "mp_rr", effect: Some("reorder_rr R1 R2") },
    Pair { before: "mp_fs", after: "mp_fs_t", effect: Some("eliminate W1, eliminate W2") },
    Pair { before: "inline4", after: "inline4_t", effect: Some("inline 3 1") },
    Pair { before: "welim", after: "welim_t", effect: Some("eliminate WZ") },
    Pair { before: "codemotion", after: "codemotion_t", effect: Some("reorder_rr R1 R2, reorder_rr R1 R3") },
    Pair { before: "regspill", after: "regspill_t", effect: None },
    Pair { before: "condeq", after: "condeq_t", effect: None },
    Pair { before: "reord", after: "reord_t", effect: None },
    Pair { before: "reord_r", after: "reord_r_t", effect: None },
];

pub fn litmus_source(name: &str) -> Option<&'static str> {
    LITMUS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a bundled litmus program. Panics on unknown names.
pub fn program(name: &str) -> Program {
    let src = litmus_source(name).unwrap_or_else(|| panic!("no bundled litmus test `{name}`"));
    parse_program(src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Loads a bundled raw execution. Panics on unknown names.
pub fn raw(name: &str) -> RawExecution {
    let src = RAW.iter().find(|(n, _)| *n == name).map(|(_, s)| *s);
    let src = src.unwrap_or_else(|| panic!("no bundled execution `{name}`"));
    load_execution(src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model(name: &str) -> MemoryModel {
    let src = MODELS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s);
    parse_model(src.unwrap_or_else(|| panic!("no bundled model `{name}`")), name).unwrap()
}

/// Every candidate of every pre-trace of every bundled litmus test, then
/// the raw executions. Tests whose candidate count exceeds `limit` are
/// skipped.
pub fn executions(opts: CandidateOptions) -> Vec<(String, Execution)> {
    let mut out = Vec::new();
    for (name, _) in LITMUS {
        let prog = program(name);
        for p in enumerate_pretraces(&prog, PretraceOptions::default()).expect("bundled programs are small") {
            let p = Arc::new(p);
            if let Ok(all) = enumerate_candidates(&p, opts) {
                out.extend(all.into_iter().map(|e| (name.to_string(), e)));
            }
        }
    }
    for (name, _) in RAW {
        out.push((name.to_string(), raw(name).execution));
    }
    out
}
