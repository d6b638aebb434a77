//! Crucial reads of an inconsistent execution: which reads to unsource so
//! the rest is consistent, and how to source them again.

use memtrans::analysis::{cra_bruteforce, cra_sc_closed_form, guided_extension, minimal_crucial_sets, sc_rule_body, WalkStart, SC_RULES};
use memtrans::corpus;
use memtrans::models::{builtin_model, check_consistent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = builtin_model("sc")?;
    for name in ["sc_e", "porf_cyc"] {
        let e = corpus::raw(name).execution;
        println!("{name}: {e}");
        for v in check_consistent(&sc, &e)?.violations {
            println!("  violates {}: {}", v.rule, v.cycle.join(" "));
        }
        for rule in SC_RULES {
            let closed = cra_sc_closed_form(rule, &e)?;
            assert_eq!(closed, cra_bruteforce(&sc_rule_body(rule)?, &e)?);
            if !closed.is_empty() {
                println!("  rule {rule} needs one of {:?}", closed.iter().map(|r| e.label(r)).collect::<Vec<_>>());
            }
        }
        for cr in minimal_crucial_sets(&e, &sc)? {
            println!("  minimal crucial set {:?}", cr.labels());
            let walk = guided_extension(&cr.repaired, &sc, WalkStart::MoMin)?.expect("sc completions exist");
            for s in &walk.trace {
                let how = if s.accepted { "taken".to_string() } else { format!("rejected, case {}", s.case.unwrap()) };
                println!("    {} <- {}: {how}", s.read, s.write);
            }
            println!("    completed {}", walk.execution);
        }
    }
    Ok(())
}
