//! Stable renderings of executions: graphviz and JSON.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::execution::Execution;
use crate::frontend::{FINAL_TID, INIT_TID};
use crate::relalg::Relation;

fn quote(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn edges(out: &mut String, rel: &Relation, name: &str, style: &str) {
    for (a, b) in rel.pairs() {
        writeln!(out, "  e{a} -> e{b} [label=\"{name}\" {style}];").unwrap();
    }
}

fn render(out: &mut String, k: usize, e: &Execution) {
    let p = e.pretrace();
    let d = e.derive();
    writeln!(out, "digraph exec{k} {{").unwrap();
    writeln!(out, "  rankdir=TB;").unwrap();
    writeln!(out, "  label=\"{}\";", quote(&e.outcome().to_string())).unwrap();
    writeln!(out, "  node [shape=box fontname=monospace];").unwrap();
    let mut tids: Vec<_> = p.events().iter().map(|ev| ev.tid).collect();
    tids.dedup();
    for t in tids {
        let name = match t {
            INIT_TID => "init".to_string(),
            FINAL_TID => "final".to_string(),
            t => format!("T{t}"),
        };
        writeln!(out, "  subgraph cluster_{name} {{").unwrap();
        writeln!(out, "    label=\"{name}\";").unwrap();
        for i in p.thread_events(t) {
            writeln!(out, "    e{i} [label=\"{}\"];", quote(&p.event(i).to_string())).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    edges(out, &d.po.transitive_reduction(), "po", "");
    edges(out, &d.rf, "rf", "color=red fontcolor=red");
    edges(out, &d.mo.transitive_reduction(), "mo", "color=blue fontcolor=blue constraint=false");
    edges(out, &d.rb, "rb", "color=orange fontcolor=orange style=dashed constraint=false");
    writeln!(out, "}}").unwrap();
}

/// One `digraph` per execution, events grouped by thread and laid out
/// along program order.
pub fn to_dot(execs: &[Execution]) -> String {
    let mut out = String::new();
    for (k, e) in execs.iter().enumerate() {
        render(&mut out, k, e);
    }
    out
}

pub fn execution_json(e: &Execution) -> Value {
    let rf: Vec<Value> = e.rf_labels().into_iter().map(|(w, r)| json!([w, r])).collect();
    let mo: Vec<&str> = e.mo_sequence().into_iter().map(|w| e.label(w)).collect();
    json!({ "rf": rf, "mo": mo, "outcome": e.outcome() })
}

pub fn executions_json(execs: &[Execution]) -> Value {
    Value::Array(execs.iter().map(execution_json).collect())
}
