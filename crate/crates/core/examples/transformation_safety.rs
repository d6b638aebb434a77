//! Safety of single edits, and the crucial-set construction behind an
//! unsafe verdict.
//!
//!     cargo run --example transformation_safety -- [litmus] [effect] [model]

use memtrans::analysis::unsafety_witness;
use memtrans::corpus;
use memtrans::models::builtin_model;
use memtrans::pretrace::{enumerate_pretraces, PretraceOptions};
use memtrans::transform::{effect_safe, make_effects, parse_effects, SafetyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("mp", String::as_str);
    let spec = args.get(1).map_or("reorder_rr R1 R2", String::as_str);
    let models: Vec<&str> = match args.get(2) {
        Some(m) => vec![m.as_str()],
        None => vec!["sc", "tso", "sc_rr"],
    };
    let p = enumerate_pretraces(&corpus::program(name), PretraceOptions::default())?.remove(0);
    let (tr, q) = make_effects(&p, &parse_effects(spec)?)?;
    println!("{name}: {spec}\nbefore:\n{p}\nafter:\n{q}");
    for m in models {
        let model = builtin_model(m)?;
        let report = effect_safe(&model, &p, &tr, SafetyOptions::default())?;
        if report.safe {
            println!("{m}: safe");
            continue;
        }
        let w = report.witness.unwrap().summary();
        println!("{m}: unsafe, new outcome {}", w.outcome.unwrap_or_default());
        if tr.eliminates_writes(&p) {
            continue;
        }
        if let Some(c) = unsafety_witness(&p, &tr, &model, 1_000_000)? {
            let labels = |s: memtrans::relalg::EventSet| s.iter().map(|i| c.target.label(i).to_string()).collect::<Vec<_>>();
            println!("  target {}", c.target);
            println!("  repaired reads {:?}; source crucial sets {:?}", labels(c.target_crucial), c.source_crucial.iter().map(|s| labels(*s)).collect::<Vec<_>>());
            println!("  extended {}", c.extended);
        }
    }
    Ok(())
}
