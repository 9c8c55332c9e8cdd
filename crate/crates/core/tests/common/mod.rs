//! Random small configurations shared by the property tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use gapwalk::accumulation::VectorAcc;
use gapwalk::acceptability::{AcceptAll, GapPredicate, MaxDistance, PropertyEquals, ScopeDomain};
use gapwalk::graph::{PropertyBag, PropertyValue};
use gapwalk::rules::{
    Comparison, DimensionSource, DimensionSpec, GapValue, RuleAccumulator, RuleSigma, TerminateRule, ThresholdRule,
};
use gapwalk::{FrontierPolicy, NodeId, SearchConfig, SolutionSet, TypedGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn node(i: usize) -> NodeId {
    NodeId::new(format!("n{i:02}"))
}

#[derive(Debug, Clone)]
pub struct RandomGraphSpec {
    pub max_nodes: usize,
    pub max_edges: usize,
    /// Scope groups hold at most this many nodes, so a domain has at most
    /// `group_size - 1` candidates.
    pub group_size: usize,
}

impl Default for RandomGraphSpec {
    fn default() -> Self {
        RandomGraphSpec {
            max_nodes: 12,
            max_edges: 20,
            group_size: 6,
        }
    }
}

/// Random directed graph with integer edge weights in 1..=9, a `zone` scope
/// property, a `color`, planar coordinates, and a `goal` flag on some nodes.
pub fn random_graph(rng: &mut ChaCha8Rng, spec: &RandomGraphSpec) -> TypedGraph {
    let n = rng.random_range(2..=spec.max_nodes);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut nodes = Vec::with_capacity(n);
    let mut zone_of = vec![0; n];
    let mut k = 0;
    let mut zone = 0;
    while k < n {
        let size = rng.random_range(1..=spec.group_size).min(n - k);
        for &i in &order[k..k + size] {
            zone_of[i] = zone;
        }
        k += size;
        zone += 1;
    }
    for (i, z) in zone_of.iter().enumerate() {
        let mut p = PropertyBag::new();
        p.insert("zone".into(), PropertyValue::text(format!("z{z}")));
        p.insert("color".into(), PropertyValue::text(if rng.random_bool(0.5) { "red" } else { "blue" }));
        p.insert(
            "coordinates".into(),
            PropertyValue::Coordinates([rng.random_range(0..100) as f64, rng.random_range(0..100) as f64]),
        );
        p.insert("goal".into(), PropertyValue::Bool(rng.random_bool(0.3)));
        nodes.push((node(i), p));
    }
    let m = rng.random_range(0..=spec.max_edges.min(n * (n - 1)));
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    while edges.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || !seen.insert((a, b)) {
            continue;
        }
        let mut p = PropertyBag::new();
        p.insert("w".into(), PropertyValue::number(rng.random_range(1..=9) as f64));
        edges.push((node(a), node(b), p));
    }
    TypedGraph::build(nodes, edges).expect("random graph is valid")
}

/// A random threshold policy: `w` (edge weight, gaps cost a constant),
/// `gaps`, and the reserved `length`.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    pub gap_cost: f64,
    pub budget: f64,
    pub max_gaps: f64,
    pub horizon: f64,
    pub target: Option<NodeId>,
    pub predicate: u8,
}

pub fn random_policy(rng: &mut ChaCha8Rng, g: &TypedGraph, max_horizon: usize) -> RandomPolicy {
    let target = if rng.random_bool(0.6) {
        Some(g.nodes()[rng.random_range(0..g.node_count())].clone())
    } else {
        None
    };
    RandomPolicy {
        gap_cost: rng.random_range(0..=5) as f64,
        budget: rng.random_range(3..=30) as f64,
        max_gaps: rng.random_range(0..=3) as f64,
        horizon: rng.random_range(1..=max_horizon) as f64,
        target,
        predicate: rng.random_range(0..3),
    }
}

impl RandomPolicy {
    pub fn accumulator(&self) -> RuleAccumulator {
        RuleAccumulator::new(vec![
            DimensionSpec::new(
                "w",
                DimensionSource::EdgeProperty {
                    key: "w".into(),
                    gap: GapValue::Constant { value: self.gap_cost },
                },
            ),
            DimensionSpec::new("gaps", DimensionSource::Gaps),
        ])
    }

    pub fn sigma(&self) -> RuleSigma {
        let terminate = match &self.target {
            Some(t) => TerminateRule::AtNode { at_node: t.clone() },
            None => TerminateRule::NodeProperty {
                node_property: "goal".into(),
                equals: serde_json::Value::Bool(true),
            },
        };
        RuleSigma {
            prune_if: vec![
                ThresholdRule::new("w", Comparison::Gt, self.budget),
                ThresholdRule::new("gaps", Comparison::Gt, self.max_gaps),
                ThresholdRule::new("length", Comparison::Gt, self.horizon),
            ],
            terminate_if: vec![terminate],
        }
    }

    pub fn predicate(&self) -> Box<dyn GapPredicate> {
        match self.predicate {
            0 => Box::new(AcceptAll),
            1 => Box::new(PropertyEquals::new("color")),
            _ => Box::new(MaxDistance::new(60.0)),
        }
    }

    pub fn config(&self, g: Arc<TypedGraph>, start: NodeId) -> SearchConfig<VectorAcc> {
        let domain = ScopeDomain::new(&g, "zone");
        let mut cfg = SearchConfig::new(g, start, self.accumulator(), self.sigma()).with_domain(domain);
        cfg.predicate = Arc::from(self.predicate());
        cfg
    }
}

/// A random graph, policy and start node, all from one seed.
pub fn random_config(seed: u64, spec: &RandomGraphSpec, max_horizon: usize) -> SearchConfig<VectorAcc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng, spec);
    let policy = random_policy(&mut rng, &g, max_horizon);
    let start = g.nodes()[rng.random_range(0..g.node_count())].clone();
    policy.config(Arc::new(g), start)
}

pub fn priority_on(dim: &'static str) -> FrontierPolicy<VectorAcc> {
    FrontierPolicy::priority(move |a: &VectorAcc| a.get(dim).unwrap_or(f64::INFINITY))
}

/// Solutions as a sorted list of (traversal text, accumulation values).
pub fn canonical(set: &SolutionSet<VectorAcc>) -> Vec<(String, Vec<f64>)> {
    let mut v: Vec<(String, Vec<f64>)> = set
        .solutions
        .iter()
        .map(|s| (s.traversal.to_string(), s.accumulation.values.clone()))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).expect("finite")));
    v
}

pub fn traversal_set(set: &SolutionSet<VectorAcc>) -> BTreeSet<String> {
    set.traversals().map(|t| t.to_string()).collect()
}

/// Engine and oracle agree on the random configuration for `seed`.
/// Returns the number of solutions.
pub fn check_oracle(seed: u64) -> Result<usize, String> {
    use gapwalk::oracle::{enumerate_solutions, OracleConfig};
    let cfg = random_config(seed, &RandomGraphSpec::default(), 6);
    let engine = gapwalk::search(&cfg).map_err(|e| format!("seed {seed}: engine failed: {e}"))?;
    let oracle =
        enumerate_solutions(&OracleConfig::from_search(&cfg)).map_err(|e| format!("seed {seed}: oracle failed: {e}"))?;
    let (a, b) = (canonical(&engine), canonical(&oracle));
    if a.len() != engine.len() || a.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(format!("seed {seed}: engine returned a duplicate traversal"));
    }
    if a != b {
        return Err(format!("seed {seed}: engine {} solutions, oracle {}", a.len(), b.len()));
    }
    Ok(a.len())
}

struct Weight;

impl gapwalk::Accumulator<f64> for Weight {
    fn initial(&self) -> f64 {
        0.0
    }
    fn step(&self, g: &TypedGraph, prev: &f64, t: &gapwalk::Traversal) -> f64 {
        let s = t.last().expect("non-empty");
        prev + g
            .edge_props(&s.from, &s.to)
            .and_then(|p| p.get("w"))
            .and_then(PropertyValue::as_f64)
            .expect("edge weight")
    }
}

/// With no gap candidates and additive weights, the cheapest solution
/// matches Dijkstra on the same graph.
pub fn check_dijkstra(seed: u64) -> Result<(), String> {
    use petgraph::algo::dijkstra;
    use petgraph::graph::DiGraph;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Arc::new(random_graph(&mut rng, &RandomGraphSpec::default()));
    let n = g.node_count();
    let s = rng.random_range(0..n);
    let t = rng.random_range(0..n);
    let (start, target) = (g.nodes()[s].clone(), g.nodes()[t].clone());

    let mut pg = DiGraph::<(), f64>::new();
    let idx: Vec<_> = (0..n).map(|_| pg.add_node(())).collect();
    for (a, b, p) in g.edges() {
        let w = p.get("w").and_then(PropertyValue::as_f64).expect("edge weight");
        pg.add_edge(idx[g.index_of(a).unwrap()], idx[g.index_of(b).unwrap()], w);
    }
    let expected = dijkstra(&pg, idx[s], Some(idx[t]), |e| *e.weight()).get(&idx[t]).copied();

    let goal = target.clone();
    let cfg = SearchConfig::new(g.clone(), start, Weight, move |_: &TypedGraph, tr: &gapwalk::Traversal, _: &f64| {
        if tr.current_node() == &goal {
            gapwalk::ExplorationDecision::Terminate
        } else {
            gapwalk::ExplorationDecision::Continue
        }
    });
    let set = gapwalk::search(&cfg).map_err(|e| format!("seed {seed}: {e}"))?;
    if set.solutions.iter().any(|x| x.traversal.gap_count() > 0) {
        return Err(format!("seed {seed}: gap transition with an empty domain"));
    }
    let best = set.solutions.iter().map(|x| x.accumulation).min_by(f64::total_cmp);
    if best != expected {
        return Err(format!("seed {seed}: search minimum {best:?}, dijkstra {expected:?} ({s} -> {t})"));
    }
    Ok(())
}

/// FIFO, LIFO and priority frontiers return the same solution set.
pub fn check_frontiers(seed: u64) -> Result<(), String> {
    let cfg = random_config(seed, &RandomGraphSpec::default(), 6);
    let run = |f: FrontierPolicy<VectorAcc>| {
        gapwalk::search(&cfg.clone().with_frontier(f)).map(|s| canonical(&s)).map_err(|e| format!("seed {seed}: {e}"))
    };
    let fifo = run(FrontierPolicy::Fifo)?;
    let lifo = run(FrontierPolicy::Lifo)?;
    let prio = run(priority_on("w"))?;
    if fifo != lifo || fifo != prio {
        return Err(format!(
            "seed {seed}: fifo {} / lifo {} / priority {} solutions",
            fifo.len(),
            lifo.len(),
            prio.len()
        ));
    }
    Ok(())
}

/// Raising the weight budget never loses a solution.
pub fn check_relaxation(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Arc::new(random_graph(&mut rng, &RandomGraphSpec::default()));
    let policy = random_policy(&mut rng, &g, 6);
    let start = g.nodes()[rng.random_range(0..g.node_count())].clone();
    let b1 = rng.random_range(0..=20) as f64;
    let b2 = b1 + rng.random_range(0..=10) as f64;
    let solve = |b: f64| {
        let mut p = policy.clone();
        p.budget = b;
        gapwalk::search(&p.config(g.clone(), start.clone()))
            .map(|s| traversal_set(&s))
            .map_err(|e| format!("seed {seed}: {e}"))
    };
    let (s1, s2) = (solve(b1)?, solve(b2)?);
    if !s1.is_subset(&s2) {
        return Err(format!("seed {seed}: budget {b1} has solutions missing at {b2}"));
    }
    Ok(())
}

/// `n` nodes, about `degree` random out-edges each, scope groups of `group`.
pub fn sparse_graph(seed: u64, n: usize, degree: usize, group: usize) -> TypedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..n)
        .map(|i| {
            let mut p = PropertyBag::new();
            p.insert("zone".into(), PropertyValue::text(format!("z{}", i / group)));
            (NodeId::new(format!("v{i:04}")), p)
        })
        .collect();
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for _ in 0..degree {
            let b = rng.random_range(0..n);
            if a != b {
                edges.insert((a, b));
            }
        }
    }
    let edges = edges
        .into_iter()
        .map(|(a, b)| (NodeId::new(format!("v{a:04}")), NodeId::new(format!("v{b:04}")), PropertyBag::new()))
        .collect();
    TypedGraph::build(nodes, edges).unwrap()
}
