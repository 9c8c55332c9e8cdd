mod common;

use std::sync::Arc;

use common::sparse_graph;
use gapwalk::acceptability::ScopeDomain;
use gapwalk::accumulation::{CounterAcc, TransitionCounter};
use gapwalk::{search, search_partial, ExplorationDecision, SearchConfig, SearchError, Traversal, TypedGraph};

fn horizon(l: usize) -> impl Fn(&TypedGraph, &Traversal, &CounterAcc) -> ExplorationDecision + Send + Sync {
    move |_, t, _| {
        if t.len() > l {
            ExplorationDecision::Prune
        } else {
            ExplorationDecision::Terminate
        }
    }
}

#[test]
fn bounded_horizon_finishes_under_cap() {
    let g = Arc::new(sparse_graph(3, 1000, 3, 4));
    let domain = ScopeDomain::new(&g, "zone");
    let cfg = SearchConfig::new(g, "v0000", TransitionCounter::default(), horizon(4)).with_domain(domain);
    let set = search(&cfg).unwrap();
    assert!(!set.stats.cap_exceeded);
    assert!(set.solutions.iter().all(|s| s.traversal.len() <= 4));
}

#[test]
fn horizonless_policy_hits_cap() {
    let g = Arc::new(sparse_graph(5, 40, 8, 40));
    let cfg = SearchConfig::new(g, "v0000", TransitionCounter::default(), |_: &TypedGraph, _: &Traversal, _: &CounterAcc| {
        ExplorationDecision::Continue
    })
    .with_safety_cap(Some(10_000));
    match search(&cfg) {
        Err(SearchError::SafetyCapExceeded { cap, stats, .. }) => {
            assert_eq!(cap, 10_000);
            assert!(stats.cap_exceeded);
        }
        other => panic!("expected the cap, got {other:?}"),
    }
    let partial = search_partial(&cfg).unwrap();
    assert!(partial.stats.cap_exceeded);
    assert_eq!(partial.stats.states_expanded, 10_000);
}
