mod common;

use std::sync::Arc;

use gapwalk::accumulation::{CounterAcc, TransitionCounter};
use gapwalk::oracle::{enumerate_solutions, OracleConfig};
use gapwalk::{search, ExplorationDecision, NodeId, SearchConfig, Traversal, TypedGraph};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engine_matches_oracle(seed in any::<u64>()) {
        common::check_oracle(seed).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn pruned_prefix_kills_subtree() {
    // a -> b -> c; pruning at b must hide c from both implementations.
    let g = Arc::new(
        gapwalk::io::parse_topology(
            r#"{"nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
                "links": [{"from": "a", "to": "b", "directed": true}, {"from": "b", "to": "c", "directed": true}]}"#,
        )
        .unwrap(),
    );
    let cfg = SearchConfig::new(g, "a", TransitionCounter::default(), |_: &TypedGraph, t: &Traversal, _: &CounterAcc| {
        match t.current_node().as_str() {
            "b" => ExplorationDecision::Prune,
            _ => ExplorationDecision::Terminate,
        }
    });
    let engine = search(&cfg).unwrap();
    let oracle = enumerate_solutions(&OracleConfig::from_search(&cfg)).unwrap();
    let ends = |s: &gapwalk::SolutionSet<CounterAcc>| -> Vec<NodeId> {
        s.traversals().map(|t| t.current_node().clone()).collect()
    };
    assert_eq!(ends(&engine), vec![NodeId::new("a")]);
    assert_eq!(ends(&oracle), vec![NodeId::new("a")]);
}
