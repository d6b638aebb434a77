use std::sync::Arc;

use proptest::prelude::*;

use memtrans::execution::{candidate_count, enumerate_candidates, CandidateOptions, MoMode};
use memtrans::frontend::parse_program;
use memtrans::models::{builtin_model, is_consistent};
use memtrans::pretrace::{enumerate_pretraces, PreTrace, PretraceOptions};
use memtrans::relalg::{EventSet, Relation};
use memtrans::transform::{apply_effect, diff_effect, make_effect, parse_effects, EffectSpec};

const N: usize = 7;

fn relation() -> impl Strategy<Value = Relation> {
    prop::collection::vec((0..N, 0..N), 0..14).prop_map(|pairs| Relation::from_pairs(N, pairs))
}

proptest! {
    #[test]
    fn closure_is_the_least_transitive_superset(r in relation()) {
        let c = r.transitive_closure();
        prop_assert!(r.is_subset(&c));
        prop_assert!(c.is_transitive());
        prop_assert_eq!(c.transitive_closure(), c.clone());
        // every closure pair is a path of r
        for (a, b) in c.pairs() {
            prop_assert!(memtrans::relalg::shortest_path(&r, a, b).is_some());
        }
    }

    #[test]
    fn composition_laws(a in relation(), b in relation(), c in relation()) {
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let lhs = a.union(&b).unwrap().compose(&c).unwrap();
        let rhs = a.compose(&c).unwrap().union(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.compose(&Relation::identity(N)).unwrap(), a.clone());
        let inv = a.compose(&b).unwrap().inverse();
        prop_assert_eq!(inv, b.inverse().compose(&a.inverse()).unwrap());
    }

    #[test]
    fn inverse_and_difference(a in relation(), b in relation()) {
        prop_assert_eq!(a.inverse().inverse(), a.clone());
        let d = a.difference(&b).unwrap();
        prop_assert!(d.is_subset(&a));
        prop_assert!(d.intersection(&b).unwrap().is_empty());
        prop_assert_eq!(d.union(&a.intersection(&b).unwrap()).unwrap(), a.clone());
    }

    #[test]
    fn reduction_of_an_acyclic_relation_keeps_its_closure(a in relation()) {
        let acyclic = a.filter(|x, y| x < y);
        let red = acyclic.transitive_reduction();
        prop_assert!(red.is_subset(&acyclic.transitive_closure()));
        prop_assert_eq!(red.transitive_closure(), acyclic.transitive_closure());
        prop_assert!(acyclic.is_acyclic());
    }

    #[test]
    fn identity_remap_is_a_no_op(a in relation()) {
        let map: Vec<Option<usize>> = (0..N).map(Some).collect();
        prop_assert_eq!(a.remap(N, &map), a.clone());
        let dropped: Vec<Option<usize>> = (0..N).map(|i| (i != 0).then_some(i)).collect();
        let r = a.remap(N, &dropped);
        prop_assert!(r.row(0).is_empty() && r.column(0).is_empty());
    }

    #[test]
    fn event_set_algebra(a in any::<u8>(), b in any::<u8>()) {
        let (a, b) = (EventSet(a as u64), EventSet(b as u64));
        prop_assert_eq!(a.union(b).len() + a.intersection(b).len(), a.len() + b.len());
        prop_assert!(a.minus(b).is_subset(a));
        prop_assert!(a.minus(b).intersection(b).is_empty());
    }
}

#[derive(Clone, Debug)]
enum Stmt {
    Read(u8),
    Write(u8, u8),
    Fence,
    Rmw(u8, u8),
    If(Vec<Stmt>, Vec<Stmt>),
}

const LOCS: [&str; 2] = ["x", "y"];

fn stmt(depth: u32) -> BoxedStrategy<Stmt> {
    let leaf = prop_oneof![
        4 => (0..2u8).prop_map(Stmt::Read),
        4 => (0..2u8, 1..3u8).prop_map(|(l, v)| Stmt::Write(l, v)),
        1 => Just(Stmt::Fence),
        1 => (0..2u8, 1..3u8).prop_map(|(l, v)| Stmt::Rmw(l, v)),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        6 => leaf,
        1 => (prop::collection::vec(stmt(depth - 1), 0..2), prop::collection::vec(stmt(depth - 1), 0..2))
            .prop_map(|(t, e)| Stmt::If(t, e)),
    ]
    .boxed()
}

fn render(stmts: &[Stmt], tid: usize, k: &mut usize, out: &mut String) {
    for s in stmts {
        *k += 1;
        let local = format!("r{tid}_{k}");
        match s {
            Stmt::Read(l) => out.push_str(&format!("{local} = {}; ", LOCS[*l as usize])),
            Stmt::Write(l, v) => out.push_str(&format!("{} = {v}; ", LOCS[*l as usize])),
            Stmt::Fence => out.push_str("fence.rr; "),
            Stmt::Rmw(l, v) => out.push_str(&format!("rmw({local}, {}, {v}); ", LOCS[*l as usize])),
            Stmt::If(t, e) => {
                out.push_str(&format!("g{tid}_{k} = y; if (g{tid}_{k} == 1) {{ "));
                render(t, tid, k, out);
                out.push_str("} else { ");
                render(e, tid, k, out);
                out.push_str("} ");
            }
        }
    }
}

fn program_source(threads: &[Vec<Stmt>], finals: bool) -> String {
    let mut src = String::from("init { x = 0; y = 0; }\n");
    for (t, body) in threads.iter().enumerate() {
        let mut s = String::new();
        render(body, t + 1, &mut 0, &mut s);
        src.push_str(&format!("thread {} {{ {s}}}\n", t + 1));
    }
    if finals {
        src.push_str("final { x; y; }\n");
    }
    src
}

fn program(depth: u32) -> impl Strategy<Value = String> {
    (prop::collection::vec(prop::collection::vec(stmt(depth), 1..4), 1..4), any::<bool>())
        .prop_map(|(threads, finals)| program_source(&threads, finals))
}

fn straight_line() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![(0..2u8).prop_map(Stmt::Read), (0..2u8, 1..2u8).prop_map(|(l, v)| Stmt::Write(l, v))];
    prop::collection::vec(prop::collection::vec(leaf, 1..3), 1..3).prop_map(|t| program_source(&t, false))
}

fn first_pretrace(src: &str) -> PreTrace {
    enumerate_pretraces(&parse_program(src).unwrap(), PretraceOptions::default()).unwrap().remove(0)
}

/// Swaps and removals that name events of `p`.
fn edits(p: &PreTrace) -> Vec<EffectSpec> {
    let mut out = Vec::new();
    for i in 0..p.len() {
        let e = p.event(i);
        if e.is_init() || e.is_final() {
            continue;
        }
        out.push(EffectSpec::Eliminate(p.label(i).to_string()));
        if let Some(j) = p.po_next(i).filter(|&j| !p.event(j).is_final()) {
            out.push(EffectSpec::Reorder(p.label(i).to_string(), p.label(j).to_string()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_then_parsing_is_the_identity(src in program(2)) {
        let p = parse_program(&src).unwrap();
        let printed = p.to_string();
        let again = parse_program(&printed).unwrap();
        prop_assert_eq!(&again, &p);
        // labelling is deterministic
        prop_assert_eq!(parse_program(&src).unwrap(), p);
    }

    #[test]
    fn pretraces_have_per_thread_total_po(src in program(2)) {
        let prog = parse_program(&src).unwrap();
        let opts = PretraceOptions { filter: false, ..Default::default() };
        for p in enumerate_pretraces(&prog, opts).unwrap() {
            prop_assert!(p.po().is_transitive());
            prop_assert!(p.po().is_irreflexive());
            for t in p.threads() {
                let evs = p.thread_events(t);
                if p.event(evs[0]).is_init() || p.event(evs[0]).is_final() {
                    continue;
                }
                for (k, &a) in evs.iter().enumerate() {
                    for &b in &evs[k + 1..] {
                        prop_assert!(p.po().contains(a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn applying_a_diffed_effect_reproduces_the_target(src in program(1), pick in any::<prop::sample::Index>()) {
        let p = first_pretrace(&src);
        let specs = edits(&p);
        prop_assume!(!specs.is_empty());
        let spec = &specs[pick.index(specs.len())];
        prop_assume!(make_effect(&p, spec).is_ok());
        let tr = make_effect(&p, spec).unwrap();
        let q = apply_effect(&p, &tr).unwrap();
        let back = diff_effect(&p, &q).unwrap();
        prop_assert_eq!(apply_effect(&p, &back).unwrap(), q);
        let shown: Vec<EffectSpec> = parse_effects(&spec.to_string()).unwrap();
        prop_assert_eq!(&shown[0], spec);
    }

    #[test]
    fn candidates_are_well_formed_and_counted(src in straight_line()) {
        let p = Arc::new(first_pretrace(&src));
        let all = enumerate_candidates(&p, CandidateOptions::default()).unwrap();
        prop_assert_eq!(all.len() as u128, candidate_count(&p, MoMode::Full));
        for e in &all {
            prop_assert!(e.is_well_formed() && e.mo_is_total());
            let d = e.derive();
            prop_assert!(d.rb.intersection(&d.rf.inverse()).unwrap().is_empty());
            prop_assert!(d.rb.is_irreflexive());
        }
    }

    #[test]
    fn built_in_models_nest(src in straight_line()) {
        let p = Arc::new(first_pretrace(&src));
        let [sc, tso, rr] = ["sc", "tso", "sc_rr"].map(|m| builtin_model(m).unwrap());
        for e in enumerate_candidates(&p, CandidateOptions::default()).unwrap() {
            if is_consistent(&sc, &e).unwrap() {
                prop_assert!(is_consistent(&tso, &e).unwrap());
                prop_assert!(is_consistent(&rr, &e).unwrap());
            }
        }
    }
}
