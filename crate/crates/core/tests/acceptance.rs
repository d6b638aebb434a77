//! End-to-end acceptance run. Every criterion is timed against its limit
//! and reported on one line; the test fails if any line is red.
//!
//! Runs without the libtest harness so the table always prints.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use memtrans::analysis::{
    check_sound_rr, check_weak, complete_search, corpus_subjects, cra_bruteforce, cra_sc_closed_form,
    exhaustive_extension, guided_extension, minimal_crucial_sets, redundancy_witnesses, sc_rule_body,
    shape_instances, EffectKind, Exclusions, MetaVerdict, SweepBound, WalkStart, SC_RULES,
};
use memtrans::corpus;
use memtrans::execution::{CandidateOptions, Execution};
use memtrans::frontend::{parse_program, Program};
use memtrans::models::{behaviours, builtin_model, check_assertion, is_consistent, BehaviourOptions, MemoryModel};
use memtrans::pretrace::{enumerate_pretraces, PreTrace, PretraceOptions};
use memtrans::relalg::EventSet;
use memtrans::transform::{effect_safe, make_effects, parse_effects, SafetyOptions, SafetyReport, TransformationEffect};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn model(name: &str) -> MemoryModel {
    builtin_model(name).unwrap_or_else(|_| corpus::model(name))
}

fn corpus_execs() -> &'static [(String, Execution)] {
    static C: OnceLock<Vec<(String, Execution)>> = OnceLock::new();
    C.get_or_init(|| corpus::executions(CandidateOptions::default()))
}

/// Whether some allowed outcome of `prog` agrees with `want` on the named
/// locals. Errors when no outcome at all matches.
fn outcome_allowed(prog: &Program, m: &str, want: &[(&str, i64)]) -> Result<bool, String> {
    let b = behaviours(prog, &model(m), BehaviourOptions::default()).map_err(|e| e.to_string())?;
    let rows: Vec<_> =
        b.outcomes.iter().filter(|r| want.iter().all(|(k, v)| r.outcome.get(k) == Some(*v))).collect();
    ensure!(!rows.is_empty(), "no outcome matches {want:?}");
    Ok(rows.iter().any(|r| r.allowed))
}

fn forbidden(name: &str, m: &str) -> Result<bool, String> {
    let c = check_assertion(&corpus::program(name), &model(m), BehaviourOptions::default()).map_err(|e| e.to_string())?;
    Ok(!c.allowed)
}

fn pretrace(name: &str, opts: PretraceOptions) -> PreTrace {
    enumerate_pretraces(&corpus::program(name), opts).unwrap().remove(0)
}

fn effect(p: &PreTrace, spec: &str) -> TransformationEffect {
    make_effects(p, &parse_effects(spec).unwrap()).unwrap().0
}

fn safety(m: &str, p: &PreTrace, tr: &TransformationEffect) -> SafetyReport {
    effect_safe(&model(m), p, tr, SafetyOptions::default()).unwrap()
}

fn witness_outcome(r: &SafetyReport) -> Option<String> {
    r.witness.as_ref().and_then(|w| w.summary().outcome)
}

fn found(v: &MetaVerdict, subject: &str, detail: &str) -> bool {
    v.counterexamples.iter().any(|f| f.subject == subject && f.detail == detail)
}

fn store_buffering_sc() -> Result<String, String> {
    let sb = corpus::program("sb");
    ensure!(outcome_allowed(&sb, "sc", &[("a", 1), ("b", 0)])?, "a=1 b=0 should be allowed");
    ensure!(!outcome_allowed(&sb, "sc", &[("a", 0), ("b", 0)])?, "a=0 b=0 should be forbidden");
    Ok("a=1 b=0 allowed, a=0 b=0 forbidden".into())
}

fn store_buffering_tso() -> Result<String, String> {
    ensure!(outcome_allowed(&corpus::program("sb"), "tso", &[("a", 0), ("b", 0)])?, "a=0 b=0 should be allowed");
    Ok("a=0 b=0 allowed".into())
}

fn store_buffering_reorder() -> Result<String, String> {
    let p = pretrace("sb", PretraceOptions::default());
    let r = safety("sc", &p, &effect(&p, "reorder W1 R1"));
    ensure!(!r.safe, "write-read reorder reported safe");
    let w = witness_outcome(&r);
    ensure!(w.as_deref() == Some("a=0 b=0"), "witness {w:?}");
    Ok("unsafe, witness a=0 b=0".into())
}

fn message_passing() -> Result<String, String> {
    let mp = corpus::program("mp");
    ensure!(!outcome_allowed(&mp, "sc", &[("a", 1), ("b", 0)])?, "a=1 b=0 allowed under sc");
    let p = pretrace("mp", PretraceOptions::default());
    let tr = effect(&p, "reorder_rr R1 R2");
    ensure!(!safety("sc", &p, &tr).safe, "read swap safe under sc");
    ensure!(safety("sc_rr", &p, &tr).safe, "read swap unsafe under sc_rr");
    ensure!(outcome_allowed(&mp, "sc_rr", &[("a", 1), ("b", 0)])?, "a=1 b=0 forbidden under sc_rr");
    Ok("forbidden under sc; swap unsafe under sc, safe under sc_rr; outcome sc_rr-allowed".into())
}

fn independent_reads() -> Result<String, String> {
    for m in ["tso", "sc"] {
        ensure!(forbidden("inline4", m)?, "outcome allowed under {m}");
    }
    ensure!(!forbidden("inline4_t", "tso")?, "inlined outcome forbidden under tso");
    ensure!(forbidden("inline4_t", "sc")?, "inlined outcome allowed under sc");
    let p = pretrace("inline4", PretraceOptions::default());
    let tr = effect(&p, "inline 3 1");
    ensure!(safety("sc", &p, &tr).safe, "inline unsafe under sc");
    ensure!(!safety("tso", &p, &tr).safe, "inline safe under tso");
    let subjects = corpus_subjects(PretraceOptions::default()).unwrap();
    let v = complete_search(&model("tso"), &model("sc"), &subjects, &EffectKind::ALL, Exclusions::default(), SafetyOptions::default())
        .unwrap();
    ensure!(found(&v, "inline4", "inline 3 1"), "completeness search missed the inline: {:?}", v.counterexamples);
    Ok(format!("inline safe under sc, unsafe under tso; tso/sc search: {} counterexamples", v.counterexample_count))
}

fn write_elimination() -> Result<String, String> {
    let p = pretrace("welim", PretraceOptions::default());
    let tr = effect(&p, "eliminate WZ");
    ensure!(safety("sc", &p, &tr).safe, "elimination unsafe under sc");
    ensure!(!safety("sc_rr", &p, &tr).safe, "elimination safe under sc_rr");
    let subjects = corpus_subjects(PretraceOptions::default()).unwrap();
    let (rr, sc) = (model("sc_rr"), model("sc"));
    let opts = SafetyOptions::default();
    let all = complete_search(&rr, &sc, &subjects, &EffectKind::ALL, Exclusions::default(), opts).unwrap();
    ensure!(found(&all, "welim", "eliminate WZ"), "search missed the elimination: {:?}", all.counterexamples);
    let excl = Exclusions { write_elimination: true };
    let none = complete_search(&rr, &sc, &subjects, &EffectKind::ALL, excl, opts).unwrap();
    ensure!(none.holds, "write elimination excluded still fails: {:?}", none.counterexamples);
    Ok(format!("{} counterexamples with write elimination, 0 of {} without", all.counterexample_count, none.checked))
}

fn updates_and_fences() -> Result<String, String> {
    let ext = model("sc_rr_ext");
    let atom = corpus::program("rmw_atom");
    let c = check_assertion(&atom, &ext, BehaviourOptions::default()).unwrap();
    ensure!(!c.allowed, "rmw_atom allowed under sc_rr_ext");
    ensure!(c.blocking_rules.contains_key("f"), "rule f blocks nothing: {:?}", c.blocking_rules);
    let names: Vec<&str> = ext.rules.iter().map(|r| r.name.as_str()).filter(|n| *n != "f").collect();
    let without_f = check_assertion(&atom, &ext.restricted(&names), BehaviourOptions::default()).unwrap();
    ensure!(without_f.allowed, "rmw_atom forbidden even without rule f");
    for m in ["sc", "sc_rr_ext"] {
        ensure!(forbidden("rmw_mid", m)?, "rmw_mid allowed under {m}");
    }
    ensure!(forbidden("mp_f", "sc_rr_ext")?, "mp_f allowed under sc_rr_ext");
    let src = corpus::litmus_source("mp_f").unwrap().replace("F: fence.rr; ", "");
    let unfenced = parse_program(&src).unwrap();
    ensure!(outcome_allowed(&unfenced, "sc_rr_ext", &[("a", 1), ("b", 0)])?, "a=1 b=0 forbidden without the fence");
    let p = pretrace("mp_f", PretraceOptions::default());
    let r = safety("sc_rr_ext", &p, &effect(&p, "eliminate F"));
    ensure!(!r.safe && witness_outcome(&r).as_deref() == Some("a=1 b=0"), "fence removal: {:?}", witness_outcome(&r));
    Ok("update atomic by rule f; rmw_mid forbidden; fence removal exposes a=1 b=0".into())
}

fn crucial_sets() -> Result<String, String> {
    let cyc = corpus::raw("porf_cyc").execution;
    let sets: Vec<Vec<String>> = minimal_crucial_sets(&cyc, &model("porf")).unwrap().iter().map(|c| c.labels()).collect();
    ensure!(sets == [vec!["R1".to_string()], vec!["R2".to_string()]], "porf_cyc minimal sets {sets:?}");
    let po_mo = corpus::raw("po_mo").execution;
    let none = minimal_crucial_sets(&po_mo, &model("po_mo")).unwrap();
    ensure!(none.is_empty(), "po_mo has crucial sets");
    Ok("porf_cyc: {{R1}} {{R2}}; po_mo: none".into())
}

fn closed_form_matches_bruteforce() -> Result<String, String> {
    let sc = model("sc");
    let bodies: Vec<_> = SC_RULES.iter().map(|r| sc_rule_body(r).unwrap()).collect();
    let subjects: Vec<&Execution> =
        corpus_execs().par_iter().filter(|(_, e)| !is_consistent(&sc, e).unwrap()).map(|(_, e)| e).collect();
    ensure!(subjects.len() >= 200, "only {} inconsistent executions", subjects.len());
    let mismatches: Vec<String> = subjects
        .par_iter()
        .flat_map_iter(|e| {
            SC_RULES.iter().zip(&bodies).filter_map(move |(rule, body)| {
                let closed = cra_sc_closed_form(rule, e).unwrap();
                let brute = cra_bruteforce(body, e).unwrap();
                (closed != brute).then(|| format!("rule {rule} on {e}"))
            })
        })
        .collect();
    ensure!(mismatches.is_empty(), "{} mismatches, first {}", mismatches.len(), mismatches[0]);
    Ok(format!("{} executions x 5 rules, 0 mismatches", subjects.len()))
}

fn piecewise_completion() -> Result<String, String> {
    let sc = model("sc");
    let partials: Vec<Execution> = corpus_execs()
        .par_iter()
        .filter(|(_, e)| e.mo_is_total() && is_consistent(&sc, e).unwrap())
        .flat_map_iter(|(_, e)| e.pretrace().reads().iter().map(move |r| e.without_rf(EventSet::singleton(r))).collect::<Vec<_>>())
        .collect();
    let failures: Vec<String> = partials
        .par_iter()
        .filter_map(|e| {
            let guided = guided_extension(e, &sc, WalkStart::MoMin).unwrap().map(|x| x.execution);
            let exhaustive = exhaustive_extension(e, &sc).unwrap();
            let ok = match (&guided, &exhaustive) {
                (Some(g), Some(_)) => g.is_well_formed() && g.mo() == e.mo() && is_consistent(&sc, g).unwrap(),
                _ => false,
            };
            (!ok).then(|| format!("{e}: guided {} exhaustive {}", guided.is_some(), exhaustive.is_some()))
        })
        .collect();
    ensure!(!partials.is_empty(), "no partial executions");
    ensure!(failures.is_empty(), "{} failures, first {}", failures.len(), failures[0]);
    Ok(format!("{} partial executions completed by both searches", partials.len()))
}

fn rules_are_not_redundant() -> Result<String, String> {
    let v = redundancy_witnesses(&model("sc"), corpus_execs()).unwrap();
    ensure!(v.holds && v.witnesses.len() == 20, "{} witnesses, missing {:?}", v.witnesses.len(), v.counterexamples);
    Ok("20 of 20 ordered rule pairs witnessed".into())
}

fn weakness() -> Result<String, String> {
    let execs = corpus_execs();
    for (w, b) in [("sc_rr", "sc"), ("tso", "sc")] {
        let v = check_weak(&model(w), &model(b), execs).unwrap();
        ensure!(v.holds, "{w} is not weaker than {b}: {:?}", v.counterexamples.first());
    }
    let v = check_weak(&model("sc"), &model("sc_rr"), execs).unwrap();
    ensure!(!v.holds, "sc reported weaker than sc_rr");
    let mp = v.counterexamples.iter().any(|f| f.subject == "mp" && f.outcome.as_deref() == Some("a=1 b=0"));
    ensure!(mp, "no message-passing witness among {:?}", &v.counterexamples[..v.counterexamples.len().min(3)]);
    Ok(format!("sc_rr and tso weaker than sc; sc vs sc_rr fails ({} witnesses, incl. mp)", v.counterexample_count))
}

fn read_swap_sweep() -> Result<String, String> {
    let bound = SweepBound::default();
    let rr = check_sound_rr(&model("sc_rr"), bound).unwrap();
    ensure!(rr.holds, "sc_rr: {:?}", rr.counterexamples.first());
    let sc = check_sound_rr(&model("sc"), bound).unwrap();
    ensure!(!sc.holds, "no counterexample under sc");
    Ok(format!("{} effects; sc_rr 0 counterexamples, sc {}", rr.checked, sc.counterexample_count))
}

fn shape_coverage() -> Result<String, String> {
    let (rr, sc) = (model("sc_rr"), model("sc"));
    let pairs = [("mp", "reorder_rr R1 R2"), ("inline4", "inline 3 1"), ("welim", "eliminate WZ")];
    let (mut total, mut with_rw, mut no_elim) = (0, 0, 0);
    for (name, spec) in pairs {
        let p = pretrace(name, PretraceOptions::default());
        let tr = effect(&p, spec);
        let elim = tr.eliminates_writes(&p);
        for inst in shape_instances(&p, &tr, &rr, &sc, 1_000_000).unwrap() {
            total += 1;
            ensure!(inst.covered(), "{name} {spec}: uncovered source {} shapes {:?}", inst.source, inst.shapes);
            with_rw += inst.needs_read_write_reorder() as usize;
            if !elim {
                no_elim += 1;
                ensure!(
                    !inst.needs_read_write_reorder() || tr.removes_read_write_order(&p),
                    "{name} {spec}: read-write cycle without a read-write reorder"
                );
            }
        }
    }
    ensure!(total > 0, "no instances at all");
    Ok(format!("{total} instances covered ({with_rw} with read-write cycles); {no_elim} without write elimination"))
}

fn final_state_reads() -> Result<String, String> {
    let without = pretrace("mp_fs", PretraceOptions { final_reads: false, ..Default::default() });
    let with = pretrace("mp_fs", PretraceOptions::default());
    let spec = "eliminate W1, eliminate W2";
    ensure!(safety("sc", &without, &effect(&without, spec)).safe, "unsafe without final reads");
    let r = safety("sc", &with, &effect(&with, spec));
    ensure!(!r.safe, "safe with final reads");
    Ok(format!("safe without final reads, unsafe with them (witness {})", witness_outcome(&r).unwrap_or_default()))
}

const CRITERIA: [(u32, &str, u64, Check); 15] = [
    (1, "store buffering under sc", 1, store_buffering_sc),
    (2, "store buffering under tso", 1, store_buffering_tso),
    (3, "store buffering write-read reorder", 1, store_buffering_reorder),
    (4, "message passing", 5, message_passing),
    (5, "independent reads and inlining", 30, independent_reads),
    (6, "dead write elimination", 60, write_elimination),
    (7, "updates and fences", 5, updates_and_fences),
    (8, "crucial sets of raw executions", 1, crucial_sets),
    (9, "closed-form crucial reads", 120, closed_form_matches_bruteforce),
    (10, "piecewise completion", 120, piecewise_completion),
    (11, "sc rule pairs witnessed", 60, rules_are_not_redundant),
    (12, "weakness", 60, weakness),
    (13, "read-swap sweep", 600, read_swap_sweep),
    (14, "cycle shape coverage", 120, shape_coverage),
    (15, "final-state reads", 1, final_state_reads),
];

fn main() {
    // build the shared corpus outside the timed sections
    let _ = corpus_execs();
    let mut red = Vec::new();
    for (id, title, limit, check) in CRITERIA {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let (mark, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over the time limit; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!("{mark} {id:>2} {title:<38} {:>8.2}s / {limit}s  {detail}", took.as_secs_f64());
        if mark == "FAIL" {
            red.push(id);
        }
    }
    if !red.is_empty() {
        eprintln!("failing criteria: {red:?}");
        std::process::exit(1);
    }
}
