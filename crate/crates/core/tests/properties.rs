use std::collections::BTreeSet;

use asynclocal::algorithms::{compose, SaveColors, SaveOneMoreColor, SaveOneMoreState, WaitFreeLinial};
use asynclocal::engine::graph::{build_graph, GraphSpec, Shape};
use asynclocal::engine::{execute, identity_inputs, Graph, NodeState, Trace};
use asynclocal::schedulers::{enumerate_schedulings, enumeration_count, RandomAdversary, Scheduling};
use asynclocal::verify::{check_proper, measure_runtime};
use asynclocal::wsb::{enumerate_complete, sign_of, Toy};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (3usize..10).prop_map(Shape::Cycle),
        (2usize..10).prop_map(Shape::Path),
        (2usize..5).prop_map(Shape::Clique),
        (5usize..9).prop_map(|n| Shape::Circulant { n, k: 2 }),
        (2usize..15, 1usize..5, any::<u64>()).prop_map(|(n, d, seed)| Shape::RandomTree { n, max_degree: d.max(2), seed }),
    ]
}

fn random(graph: &Graph, seed: u64, p: f64, crash: f64) -> Scheduling {
    Scheduling::Random(RandomAdversary::new(seed, p, crash, Default::default(), graph))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_trace_and_replay_agrees(shape in shape(), seed in any::<u64>(), p in 0.1f64..1.0, crash in 0.0f64..0.05) {
        let g = build_graph(&GraphSpec::new(shape)).unwrap();
        let delta = g.max_degree().max(1) as u64;
        let algo = compose(WaitFreeLinial::new(g.id_bound(), delta), SaveColors);
        let inputs = identity_inputs(&g);
        let a = execute(&algo, &g, &inputs, &random(&g, seed, p, crash), 100_000).unwrap();
        let b = execute(&algo, &g, &inputs, &random(&g, seed, p, crash), 100_000).unwrap();
        prop_assert_eq!(&a, &b);
        let replayed = execute(&algo, &g, &inputs, &Scheduling::replay_of(&a), 100_000).unwrap();
        prop_assert_eq!(&replayed.steps, &a.steps);
        prop_assert_eq!(replayed.decisions(), a.decisions());
        prop_assert!(check_proper(&a).pass);
    }

    #[test]
    fn decided_nodes_stay_frozen_and_runtimes_recount(shape in shape(), seed in any::<u64>(), p in 0.1f64..1.0) {
        let g = build_graph(&GraphSpec::new(shape)).unwrap();
        let delta = g.max_degree().max(1) as u64;
        let algo = compose(WaitFreeLinial::new(g.id_bound(), delta), SaveColors);
        let trace = execute(&algo, &g, &identity_inputs(&g), &random(&g, seed, p, 0.0), 100_000).unwrap();
        let mut decided = BTreeSet::new();
        for step in &trace.steps {
            for r in &step.reads {
                prop_assert!(!decided.contains(&r.node), "node {} computed after deciding", r.node);
            }
            decided.extend(step.decided.iter().map(|(v, _)| *v));
        }
        let recount = measure_runtime(&trace);
        prop_assert_eq!(&recount.runtimes, &trace.end.runtimes);
        prop_assert_eq!(recount.max, trace.max_runtime());
    }

    #[test]
    fn edge_flipping_state_grows_monotonically(n in 3usize..10, seed in any::<u64>(), p in 0.1f64..1.0) {
        let g = build_graph(&GraphSpec::new(Shape::Cycle(n))).unwrap();
        let algo = SaveOneMoreColor::new(2);
        let trace = execute(&algo, &g, &identity_inputs(&g), &random(&g, seed, p, 0.0), 100_000).unwrap();
        prop_assert!(trace.is_complete());
        let mut last: std::collections::BTreeMap<u64, SaveOneMoreState> = Default::default();
        for step in &trace.steps {
            for r in &step.reads {
                if let NodeState::Running(s) = &r.new {
                    if let Some(prev) = last.get(&r.node) {
                        prop_assert!(prev.f.is_subset(&s.f));
                        prop_assert!(!prev.alpha || s.alpha);
                        prop_assert!(!prev.beta || s.beta);
                    }
                    last.insert(r.node, s.clone());
                }
            }
        }
    }

    #[test]
    fn sign_is_multiplicative(a in prop::collection::vec(prop::collection::vec(1u64..6, 1..5), 0..6),
                              b in prop::collection::vec(prop::collection::vec(1u64..6, 1..5), 0..6)) {
        let joined: Vec<Vec<u64>> = a.iter().chain(&b).cloned().collect();
        prop_assert_eq!(sign_of(&joined), sign_of(&a) * sign_of(&b));
    }

    #[test]
    fn trace_jsonl_round_trips(n in 3usize..8, seed in any::<u64>()) {
        let g = build_graph(&GraphSpec::new(Shape::Cycle(n))).unwrap();
        let algo = compose(WaitFreeLinial::new(g.id_bound(), 2), SaveOneMoreColor::new(2));
        let trace = execute(&algo, &g, &identity_inputs(&g), &random(&g, seed, 0.5, 0.02), 100_000).unwrap();
        let text = trace.to_jsonl_string();
        let back = Trace::read_jsonl(text.as_bytes()).unwrap();
        prop_assert_eq!(back, trace);
    }
}

#[test]
fn scheduling_enumeration_is_complete_and_distinct() {
    for (nodes, depth) in [(1usize, 3usize), (2, 3), (3, 2), (4, 2)] {
        let ids: Vec<u64> = (1..=nodes as u64).collect();
        let all: Vec<_> = enumerate_schedulings(&ids, depth, false).unwrap().collect();
        let distinct: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len() as u128, enumeration_count(nodes, depth));
        assert_eq!(distinct.len(), all.len());
        // Independent count: sum over lengths of (2^n - 1)^len.
        let subsets = (1u128 << nodes) - 1;
        assert_eq!(all.len() as u128, (1..=depth as u32).map(|l| subsets.pow(l)).sum::<u128>());
    }
}

#[test]
fn execution_enumeration_matches_fubini_numbers() {
    for (n, fubini) in [(1, 1), (2, 3), (3, 13)] {
        let execs = enumerate_complete(&Toy::Const0, n, 8, false).unwrap();
        assert_eq!(execs.len(), fubini);
        let distinct: BTreeSet<_> = execs.iter().map(|e| e.blocks.clone()).collect();
        assert_eq!(distinct.len(), fubini);
    }
}
