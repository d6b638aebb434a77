//! Writes a model in the rule language, then compares it with sc on the
//! bundled corpus.

use memtrans::analysis::check_weak;
use memtrans::corpus;
use memtrans::execution::CandidateOptions;
use memtrans::models::{builtin_model, check_assertion, parse_model, BehaviourOptions};

// sc without the rules that order a read before a later write
const SC_NO_RB: &str = "model sc_no_rb
a : mo_total
b : irreflexive hb
c : irreflexive mo;hb
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weak = parse_model(SC_NO_RB, "sc_no_rb")?;
    print!("{weak}");
    for name in ["sb", "mp", "lb", "corr"] {
        let prog = corpus::program(name);
        let c = check_assertion(&prog, &weak, BehaviourOptions::default())?;
        println!("{name:<6} {}", c.observed());
    }
    let execs = corpus::executions(CandidateOptions::default());
    let v = check_weak(&weak, &builtin_model("sc")?, &execs)?;
    println!("\nweaker than sc: {} ({} executions)", v.holds, v.checked);
    Ok(())
}
