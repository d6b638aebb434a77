//! Checks a litmus test's assertion under every built-in model and prints
//! its outcome table.
//!
//!     cargo run --example litmus_check -- [file.lit]

use memtrans::corpus;
use memtrans::frontend::parse_program;
use memtrans::models::{behaviours, builtin_model, check_assertion, BehaviourOptions, BUILTIN_MODELS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prog = match std::env::args().nth(1) {
        Some(path) => parse_program(&std::fs::read_to_string(path)?)?,
        None => corpus::program("sb"),
    };
    print!("{prog}");
    for name in BUILTIN_MODELS {
        let m = builtin_model(name)?;
        let check = check_assertion(&prog, &m, BehaviourOptions::default())?;
        let b = behaviours(&prog, &m, BehaviourOptions::default())?;
        println!("\n{name}: assertion {} ({} consistent of {})", check.observed(), b.consistent, b.consistent + b.inconsistent);
        for row in &b.outcomes {
            let mark = if row.allowed { "allowed" } else { "forbidden" };
            println!("  {:<24} {mark}", row.outcome.to_string());
        }
        if !check.blocking_rules.is_empty() {
            println!("  blocked by {:?}", check.blocking_rules);
        }
    }
    Ok(())
}
