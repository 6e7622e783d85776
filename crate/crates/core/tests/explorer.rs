mod common;

use common::arb_graph;
use dynet::dynamic_graph::{load_dynamic_graph, save_dynamic_graph, Bound, DynamicGraph, EdgeSet};
use dynet::explorer::{
    check_conjecture1, property_suite, search_counterexample, CheckStatus, ConjectureStatus,
    SearchBudget, SearchMode, MOI_AT_LEAST_TWO, OIT_LE_CT, WINDOW_CONNECTIVITY, WINDOW_EDGE_FLOOR,
};
use dynet::generators::{
    alternating_matchings_ring, oit_iit_gap_graph, random_oit1_graph, soifer, static_graph,
    StaticShape,
};
use dynet::influence::{compute_oit, future_set};
use proptest::prelude::*;

/// A perfect matching, then a star-plus-edge, then `K_4` forever: unit oit,
/// yet no 0-state reaches all four nodes within two rounds.
fn matching_then_k4() -> DynamicGraph {
    DynamicGraph::eventually_periodic(
        4,
        vec![
            EdgeSet::from_pairs([(1, 3), (2, 4)]),
            EdgeSet::from_pairs([(1, 2), (1, 3), (2, 4)]),
        ],
        vec![static_graph(StaticShape::Complete, 4)
            .unwrap()
            .instance(1)
            .unwrap()
            .clone()],
    )
    .unwrap()
}

fn exhaustive(n: usize, horizon: usize, prune: bool) -> SearchBudget {
    SearchBudget {
        n,
        horizon,
        mode: SearchMode::Exhaustive,
        prune,
    }
}

#[test]
fn spreading_holds_on_soifer_and_rings() {
    for n in (4..=12).step_by(2) {
        for g in [soifer(n).unwrap(), alternating_matchings_ring(n).unwrap()] {
            let v = check_conjecture1(&g);
            assert_eq!(v.status, ConjectureStatus::Holds, "n={n}");
            assert!(!v.scoped);
            assert_eq!(v.scanned, Some((0, g.representative_span() - 1)));
        }
    }
}

#[test]
fn spreading_needs_unit_oit() {
    let v = check_conjecture1(&oit_iit_gap_graph(6, 2).unwrap());
    assert!(
        matches!(v.status, ConjectureStatus::NotApplicable(ref r) if r.contains('2')),
        "{v:?}"
    );
    let short = random_oit1_graph(8, 3, 1).unwrap();
    assert!(matches!(
        check_conjecture1(&short).status,
        ConjectureStatus::NotApplicable(_)
    ));
    let scoped = check_conjecture1(&random_oit1_graph(6, 12, 1).unwrap());
    assert!(scoped.scoped);
    assert_eq!(scoped.to_json()["scoped"], true);
}

#[test]
fn matching_then_k4_breaks_spreading() {
    let g = matching_then_k4();
    assert_eq!(compute_oit(&g, 8).value, Bound::Finite(1));
    assert!(compute_oit(&g, 8).exact);
    for u in 1..=4 {
        assert_eq!(future_set(&g, u, 0, 2).unwrap().len(), 3);
    }
    let v = check_conjecture1(&g);
    assert!(
        matches!(v.status, ConjectureStatus::CounterexampleFound { t: 0, .. }),
        "{v:?}"
    );
    assert_eq!(v.to_json()["status"], "counterexample_found");
}

#[test]
fn exhaustive_counterexamples_replay() {
    for horizon in 2..=6 {
        let found = search_counterexample(&exhaustive(4, horizon, true))
            .unwrap()
            .unwrap();
        assert_eq!(found.graph.horizon(), Some(horizon));
        let reloaded = load_dynamic_graph(&save_dynamic_graph(&found.graph)).unwrap();
        match check_conjecture1(&reloaded).status {
            ConjectureStatus::CounterexampleFound { t, .. } => assert!(t <= found.t),
            other => panic!("horizon {horizon}: {other:?}"),
        }
        assert_eq!(compute_oit(&reloaded, 8).value, Bound::Finite(1));
        for u in 1..=4 {
            assert!(
                future_set(&reloaded, u, found.t, found.t + 2)
                    .unwrap()
                    .len()
                    < 4
            );
        }
    }
}

#[test]
fn pruning_agrees_with_full_enumeration() {
    for n in 2..=4 {
        for horizon in 1..=4 {
            let fast = search_counterexample(&exhaustive(n, horizon, true)).unwrap();
            let slow = search_counterexample(&exhaustive(n, horizon, false)).unwrap();
            assert_eq!(fast, slow, "n={n} horizon={horizon}");
        }
    }
}

#[test]
fn randomized_search_is_seeded() {
    let budget = SearchBudget {
        n: 6,
        horizon: 10,
        mode: SearchMode::Randomized {
            trials: 300,
            seed: 5,
        },
        prune: true,
    };
    let a = search_counterexample(&budget).unwrap();
    assert_eq!(a, search_counterexample(&budget).unwrap());
    if let Some(cx) = a {
        assert!(matches!(
            check_conjecture1(&cx.graph).status,
            ConjectureStatus::CounterexampleFound { .. }
        ));
    }
}

#[test]
fn search_rejects_infeasible_budgets() {
    assert!(search_counterexample(&exhaustive(8, 4, true)).is_err());
    assert!(search_counterexample(&exhaustive(4, 0, true)).is_err());
    assert!(search_counterexample(&exhaustive(1, 3, true)).is_err());
}

#[test]
fn suite_examples() {
    for g in [soifer(8).unwrap(), alternating_matchings_ring(8).unwrap()] {
        let r = property_suite(&g, 32);
        assert!(r.passed(), "{r:?}");
        for name in [
            WINDOW_EDGE_FLOOR,
            MOI_AT_LEAST_TWO,
            WINDOW_CONNECTIVITY,
            OIT_LE_CT,
        ] {
            assert_eq!(r.get(name), Some(&CheckStatus::Pass), "{name}");
        }
    }
    let p4 = property_suite(&static_graph(StaticShape::Path, 4).unwrap(), 16);
    assert!(p4.passed());
    assert_eq!(p4.get(MOI_AT_LEAST_TWO), Some(&CheckStatus::Pass));
    let gap = property_suite(&oit_iit_gap_graph(6, 2).unwrap(), 32);
    assert!(matches!(
        gap.get(MOI_AT_LEAST_TWO),
        Some(CheckStatus::NotApplicable(_))
    ));
    let empty = property_suite(&static_graph(StaticShape::Empty, 4).unwrap(), 16);
    assert!(empty.passed());
    assert!(matches!(
        empty.get(WINDOW_CONNECTIVITY),
        Some(CheckStatus::NotApplicable(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn suite_never_fails_on_sampled_graphs(g in arb_graph(6, 5)) {
        let r = property_suite(&g, 64);
        prop_assert!(r.passed(), "{:?}", r);
        prop_assert_eq!(r, property_suite(&g, 64));
    }

    #[test]
    fn verdicts_are_consistent(g in arb_graph(5, 5)) {
        let v = check_conjecture1(&g);
        match &v.status {
            ConjectureStatus::Holds => {
                let (a, b) = v.scanned.unwrap();
                let n = g.n();
                for t in a..=b {
                    let spreads = (1..=n as u32)
                        .any(|u| future_set(&g, u, t, t + n / 2).unwrap().len() == n);
                    prop_assert!(spreads, "t={}", t);
                }
            }
            ConjectureStatus::CounterexampleFound { t, graph } => {
                prop_assert_eq!(graph, &g);
                let n = g.n();
                prop_assert!((1..=n as u32).all(|u| future_set(&g, u, *t, t + n / 2).unwrap().len() < n));
            }
            ConjectureStatus::NotApplicable(_) => {
                let oit = compute_oit(&g, 1);
                let short = g.horizon().is_some_and(|h| h < g.n() / 2);
                prop_assert!(oit.value != Bound::Finite(1) || short);
            }
        }
    }
}
