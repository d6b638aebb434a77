//! Properties of models rather than programs: weakness, rule
//! independence and completeness of transformation sets.

use memtrans::analysis::{check_weak, complete_search, corpus_subjects, redundancy_witnesses, EffectKind, Exclusions, MetaVerdict};
use memtrans::corpus;
use memtrans::execution::CandidateOptions;
use memtrans::models::builtin_model;
use memtrans::pretrace::PretraceOptions;
use memtrans::transform::SafetyOptions;

fn show(title: &str, v: &MetaVerdict) {
    let verdict = if v.holds { "holds" } else { "fails" };
    println!("{title}: {verdict} ({}; {} checked)", v.search_bound, v.checked);
    for f in v.counterexamples.iter().take(3) {
        println!("  {} {} {}", f.subject, f.detail, f.outcome.as_deref().unwrap_or(""));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let [sc, tso, rr] = ["sc", "tso", "sc_rr"].map(|m| builtin_model(m).unwrap());
    let execs = corpus::executions(CandidateOptions::default());
    show("sc_rr weaker than sc", &check_weak(&rr, &sc, &execs)?);
    show("sc weaker than sc_rr", &check_weak(&sc, &rr, &execs)?);
    let red = redundancy_witnesses(&sc, &execs)?;
    show("every sc rule pair separated", &red);

    let subjects = corpus_subjects(PretraceOptions::default())?;
    let opts = SafetyOptions::default();
    show("tso complete over sc", &complete_search(&tso, &sc, &subjects, &EffectKind::ALL, Exclusions::default(), opts)?);
    show("sc_rr complete over sc", &complete_search(&rr, &sc, &subjects, &EffectKind::ALL, Exclusions::default(), opts)?);
    let excl = Exclusions { write_elimination: true };
    show("sc_rr complete over sc, no write elimination", &complete_search(&rr, &sc, &subjects, &EffectKind::ALL, excl, opts)?);
    Ok(())
}
