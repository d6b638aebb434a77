//! Replays the `expect` block of every bundled fixture.

use memtrans::corpus::{self, LITMUS, RAW};
use memtrans::frontend::Expectation;
use memtrans::models::{builtin_model, check_assertion, violated_rules, BehaviourOptions, MemoryModel};

fn model(name: &str) -> MemoryModel {
    builtin_model(name).unwrap_or_else(|_| corpus::model(name))
}

#[test]
fn litmus_expectations_hold() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, _) in LITMUS {
        let prog = corpus::program(name);
        for (m, want) in &prog.expect {
            let opts = BehaviourOptions { prune: true, ..Default::default() };
            let got = check_assertion(&prog, &model(m), opts).unwrap();
            checked += 1;
            if got.observed() != *want {
                failures.push(format!("{name} under {m}: expected {want}, got {}", got.observed()));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(checked >= 30);
}

#[test]
fn raw_execution_expectations_hold() {
    for (name, _) in RAW {
        let raw = corpus::raw(name);
        for (m, want) in &raw.expect {
            let rules = violated_rules(&model(m), &raw.execution).unwrap();
            let ok = match want {
                Expectation::Consistent => rules.is_empty(),
                Expectation::Inconsistent => !rules.is_empty(),
                Expectation::Violates(r) => &rules == r,
                other => panic!("{name}: `{other}` is not a verdict for an execution"),
            };
            assert!(ok, "{name} under {m}: expected {want}, violated {rules:?}");
        }
    }
}

#[test]
fn every_litmus_fixture_declares_expectations_or_is_structural() {
    let structural = ["empty", "branchy", "filter", "regspill", "regspill_t", "condeq", "condeq_t", "reord", "reord_t",
        "reord_r", "reord_r_t", "codemotion", "codemotion_t"];
    for (name, _) in LITMUS {
        let prog = corpus::program(name);
        assert!(!prog.expect.is_empty() || structural.contains(name), "{name} has no expect block");
    }
}

mod pairs {
    use memtrans::corpus::{self, PAIRS};
    use memtrans::models::builtin_model;
    use memtrans::pretrace::{enumerate_pretraces, PretraceOptions};
    use memtrans::transform::{make_effects, parse_effects, same_pretrace_shape, transformation_safe, SafetyOptions, TransformError};

    fn verdict(before: &str, after: &str, m: &str) -> &'static str {
        let m = builtin_model(m).unwrap();
        match transformation_safe(&m, &corpus::program(before), &corpus::program(after), SafetyOptions::default()) {
            Ok(r) if r.safe => "safe",
            Ok(_) => "unsafe",
            Err(TransformError::NewWrites) => "new writes",
            Err(e) => panic!("{before}: {e}"),
        }
    }

    #[test]
    fn listed_effects_produce_the_target() {
        for pair in PAIRS {
            let Some(spec) = pair.effect else { continue };
            let p = enumerate_pretraces(&corpus::program(pair.before), PretraceOptions::default()).unwrap().remove(0);
            let q = enumerate_pretraces(&corpus::program(pair.after), PretraceOptions::default()).unwrap().remove(0);
            let (_, got) = make_effects(&p, &parse_effects(spec).unwrap()).unwrap();
            assert!(same_pretrace_shape(&got, &q), "{}: {spec}\n{got}\nvs\n{q}", pair.before);
        }
    }

    #[test]
    fn program_pairs_have_known_verdicts() {
        let expected = [
            ("sb", [("sc", "unsafe"), ("tso", "safe"), ("sc_rr", "unsafe")]),
            ("mp", [("sc", "unsafe"), ("tso", "unsafe"), ("sc_rr", "safe")]),
            ("mp_fs", [("sc", "unsafe"), ("tso", "unsafe"), ("sc_rr", "unsafe")]),
            ("inline4", [("sc", "safe"), ("tso", "unsafe"), ("sc_rr", "safe")]),
            ("welim", [("sc", "safe"), ("tso", "safe"), ("sc_rr", "unsafe")]),
            ("codemotion", [("sc", "safe"), ("tso", "safe"), ("sc_rr", "safe")]),
            ("regspill", [("sc", "unsafe"), ("tso", "unsafe"), ("sc_rr", "unsafe")]),
            ("condeq", [("sc", "safe"), ("tso", "safe"), ("sc_rr", "safe")]),
            // hoisting a write out of one arm adds it to the other arm's path
            ("reord", [("sc", "unsafe"), ("tso", "unsafe"), ("sc_rr", "unsafe")]),
            // the then-path pair fails first; the else-path pair adds a write
            ("reord_r", [("sc", "unsafe"), ("tso", "unsafe"), ("sc_rr", "unsafe")]),
        ];
        assert_eq!(expected.len(), PAIRS.len());
        let mut wrong = Vec::new();
        for (before, verdicts) in expected {
            let pair = PAIRS.iter().find(|p| p.before == before).unwrap();
            for (m, want) in verdicts {
                let got = verdict(pair.before, pair.after, m);
                if got != want {
                    wrong.push(format!("{before} under {m}: {got}, expected {want}"));
                }
            }
        }
        assert!(wrong.is_empty(), "{wrong:#?}");
    }
}
