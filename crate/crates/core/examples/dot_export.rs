//! Renders the consistent executions of a litmus test as graphviz.
//!
//!     cargo run --example dot_export -- sb sc | dot -Tsvg > sb.svg

use std::sync::Arc;

use memtrans::cli::to_dot;
use memtrans::corpus;
use memtrans::execution::{candidates, CandidateOptions, MoMode};
use memtrans::models::{builtin_model, is_consistent};
use memtrans::pretrace::{enumerate_pretraces, PretraceOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sb".into());
    let model = builtin_model(&std::env::args().nth(2).unwrap_or_else(|| "sc".into()))?;
    let opts = CandidateOptions { mo: MoMode::InitsFirst, ..Default::default() };
    let mut keep = Vec::new();
    for p in enumerate_pretraces(&corpus::program(&name), PretraceOptions::default())? {
        for e in candidates(&Arc::new(p), opts)? {
            if is_consistent(&model, &e)? {
                keep.push(e);
            }
        }
    }
    print!("{}", to_dot(&keep));
    Ok(())
}
