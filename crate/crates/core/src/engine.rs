//! Frontier-driven traversal search over edges and admissible gaps.
//!
//! Each state pairs a traversal with its accumulation. An extracted state is
//! judged by the exploration predicate: pruned states are dropped, terminated
//! states are recorded and still expanded, continued states are expanded.
//! Successors never revisit a node of their own traversal.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acceptability::{AcceptAll, AcceptabilityError, DomainProvider, EmptyDomain, GapPredicate};
use crate::accumulation::{AccumulationState, Accumulator, ExplorationDecision, ExplorationPredicate};
use crate::frontier::{Frontier, FrontierPolicy};
use crate::graph::{GraphError, NodeId, TypedGraph};
use crate::traversal::{Transition, TransitionKind, Traversal};

/// Default cap on expanded states.
pub const DEFAULT_SAFETY_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("acceptability check failed at {from} -> {}: {source}", .to.as_ref().map_or("*".to_string(), |t| t.to_string()))]
    Acceptability {
        from: NodeId,
        to: Option<NodeId>,
        #[source]
        source: AcceptabilityError,
    },
    #[error("safety cap of {cap} expanded states reached with {pending} states still open")]
    SafetyCapExceeded {
        cap: usize,
        pending: usize,
        stats: SearchStats,
    },
    #[error("invalid traversal: {0}")]
    InvalidTraversal(String),
}

/// A traversal together with its accumulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraversalState<A> {
    pub traversal: Traversal,
    pub accumulation: A,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// States whose successors were generated.
    pub states_expanded: usize,
    pub states_pruned: usize,
    pub states_terminated: usize,
    pub gap_transitions_generated: usize,
    /// States discarded by a beam frontier without being judged.
    pub states_dropped: usize,
    pub cap_exceeded: bool,
}

/// Every terminated state, in the order they were recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet<A> {
    pub solutions: Vec<TraversalState<A>>,
    pub stats: SearchStats,
}

impl<A> SolutionSet<A> {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn traversals(&self) -> impl Iterator<Item = &Traversal> + '_ {
        self.solutions.iter().map(|s| &s.traversal)
    }
}

/// Full parametrization of a search.
pub struct SearchConfig<A> {
    pub graph: Arc<TypedGraph>,
    pub start: NodeId,
    pub domain: Arc<dyn DomainProvider>,
    pub predicate: Arc<dyn GapPredicate>,
    pub accumulator: Arc<dyn Accumulator<A>>,
    pub sigma: Arc<dyn ExplorationPredicate<A>>,
    pub frontier: FrontierPolicy<A>,
    /// Maximum number of expanded states; `None` disables the cap.
    pub safety_cap: Option<usize>,
}

impl<A> Clone for SearchConfig<A> {
    fn clone(&self) -> Self {
        SearchConfig {
            graph: self.graph.clone(),
            start: self.start.clone(),
            domain: self.domain.clone(),
            predicate: self.predicate.clone(),
            accumulator: self.accumulator.clone(),
            sigma: self.sigma.clone(),
            frontier: self.frontier.clone(),
            safety_cap: self.safety_cap,
        }
    }
}

impl<A> fmt::Debug for SearchConfig<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchConfig")
            .field("start", &self.start)
            .field("domain", &self.domain)
            .field("predicate", &self.predicate)
            .field("frontier", &self.frontier)
            .field("safety_cap", &self.safety_cap)
            .finish_non_exhaustive()
    }
}

impl<A: AccumulationState> SearchConfig<A> {
    /// Edge-only search (empty gap domain) with a FIFO frontier and the
    /// default safety cap.
    pub fn new(
        graph: Arc<TypedGraph>,
        start: impl Into<NodeId>,
        accumulator: impl Accumulator<A> + 'static,
        sigma: impl ExplorationPredicate<A> + 'static,
    ) -> Self {
        SearchConfig {
            graph,
            start: start.into(),
            domain: Arc::new(EmptyDomain),
            predicate: Arc::new(AcceptAll),
            accumulator: Arc::new(accumulator),
            sigma: Arc::new(sigma),
            frontier: FrontierPolicy::Fifo,
            safety_cap: Some(DEFAULT_SAFETY_CAP),
        }
    }

    pub fn with_domain(mut self, domain: impl DomainProvider + 'static) -> Self {
        self.domain = Arc::new(domain);
        self
    }

    pub fn with_predicate(mut self, predicate: impl GapPredicate + 'static) -> Self {
        self.predicate = Arc::new(predicate);
        self
    }

    pub fn with_frontier(mut self, frontier: FrontierPolicy<A>) -> Self {
        self.frontier = frontier;
        self
    }

    pub fn with_safety_cap(mut self, cap: Option<usize>) -> Self {
        self.safety_cap = cap;
        self
    }

    pub fn with_start(mut self, start: impl Into<NodeId>) -> Self {
        self.start = start.into();
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !self.graph.contains(&self.start) {
            return Err(SearchError::Config(format!(
                "start node `{}` is not in the graph",
                self.start
            )));
        }
        if let FrontierPolicy::Beam { width: 0, .. } = self.frontier {
            return Err(SearchError::Config("beam width must be at least 1".into()));
        }
        Ok(())
    }

    pub fn root(&self) -> TraversalState<A> {
        TraversalState {
            traversal: Traversal::empty(self.start.clone()),
            accumulation: self.accumulator.initial(),
        }
    }

    /// Classifies `from -> to` under this configuration, without regard to
    /// cycles. Returns `None` when the pair is neither an edge nor an
    /// admissible gap.
    pub fn classify(
        &self,
        from: &NodeId,
        to: &NodeId,
    ) -> Result<Option<TransitionKind>, AcceptabilityError> {
        if self.graph.has_edge(from, to) {
            return Ok(Some(TransitionKind::Edge));
        }
        let candidates = self.domain.candidates(&self.graph, from)?;
        if candidates.binary_search(to).is_ok() && self.predicate.accepts(&self.graph, from, to)? {
            return Ok(Some(TransitionKind::Gap));
        }
        Ok(None)
    }
}

/// Successors of `state`: edge transitions sorted by target, then gap
/// transitions sorted by target, skipping nodes the traversal already visits.
pub fn expand<A: AccumulationState>(
    cfg: &SearchConfig<A>,
    state: &TraversalState<A>,
) -> Result<Vec<TraversalState<A>>, SearchError> {
    let g = &*cfg.graph;
    let traversal = &state.traversal;
    let n = traversal.current_node();
    let visited = traversal.visited_nodes();

    let successor = |t: Transition| {
        let next = traversal.extended(t);
        let accumulation = cfg.accumulator.step(g, &state.accumulation, &next);
        TraversalState {
            traversal: next,
            accumulation,
        }
    };

    let mut out = Vec::new();
    for m in g.out_neighbors(n)? {
        if !visited.contains(m) {
            out.push(successor(Transition::edge(n.clone(), m.clone())));
        }
    }

    let candidates = cfg
        .domain
        .candidates(g, n)
        .map_err(|source| SearchError::Acceptability {
            from: n.clone(),
            to: None,
            source,
        })?;
    for m in candidates {
        if visited.contains(&m) || g.has_edge(n, &m) {
            continue;
        }
        let ok = cfg
            .predicate
            .accepts(g, n, &m)
            .map_err(|source| SearchError::Acceptability {
                from: n.clone(),
                to: Some(m.clone()),
                source,
            })?;
        if ok {
            out.push(successor(Transition::gap(n.clone(), m)));
        }
    }
    Ok(out)
}

/// Runs the search. Hitting the safety cap is an error.
pub fn search<A: AccumulationState>(cfg: &SearchConfig<A>) -> Result<SolutionSet<A>, SearchError> {
    let result = run(cfg)?;
    if result.set.stats.cap_exceeded {
        return Err(SearchError::SafetyCapExceeded {
            cap: cfg.safety_cap.unwrap_or_default(),
            pending: result.pending,
            stats: result.set.stats,
        });
    }
    Ok(result.set)
}

/// Like [`search`], but returns the partial solution set with
/// `stats.cap_exceeded` set instead of failing when the cap is hit.
pub fn search_partial<A: AccumulationState>(
    cfg: &SearchConfig<A>,
) -> Result<SolutionSet<A>, SearchError> {
    run(cfg).map(|r| r.set)
}

struct Run<A> {
    set: SolutionSet<A>,
    pending: usize,
}

fn run<A: AccumulationState>(cfg: &SearchConfig<A>) -> Result<Run<A>, SearchError> {
    cfg.validate()?;
    let g = &*cfg.graph;
    let mut stats = SearchStats::default();
    let mut solutions = Vec::new();
    let mut frontier: Frontier<A, TraversalState<A>> = Frontier::new(cfg.frontier.clone());

    let root = cfg.root();
    let acc = root.accumulation.clone();
    frontier.insert(root, &acc, 0);

    while let Some(state) = frontier.extract() {
        match cfg.sigma.decide(g, &state.traversal, &state.accumulation) {
            ExplorationDecision::Prune => {
                stats.states_pruned += 1;
                continue;
            }
            ExplorationDecision::Terminate => {
                stats.states_terminated += 1;
                solutions.push(state.clone());
            }
            ExplorationDecision::Continue => {}
        }

        if cfg.safety_cap.is_some_and(|cap| stats.states_expanded >= cap) {
            stats.cap_exceeded = true;
            stats.states_dropped = frontier.dropped();
            return Ok(Run {
                set: SolutionSet { solutions, stats },
                pending: frontier.len() + 1,
            });
        }

        stats.states_expanded += 1;
        let depth = state.traversal.len() + 1;
        for next in expand(cfg, &state)? {
            if next.traversal.last().is_some_and(Transition::is_gap) {
                stats.gap_transitions_generated += 1;
            }
            let acc = next.accumulation.clone();
            frontier.insert(next, &acc, depth);
        }
    }

    stats.states_dropped = frontier.dropped();
    Ok(Run {
        set: SolutionSet { solutions, stats },
        pending: 0,
    })
}

/// Folds the accumulator over every prefix of `t`, checking contiguity and
/// that each transition's kind matches what the configuration admits.
pub fn recompute_accumulation<A: AccumulationState>(
    cfg: &SearchConfig<A>,
    t: &Traversal,
) -> Result<A, SearchError> {
    if !cfg.graph.contains(&t.start) {
        return Err(SearchError::InvalidTraversal(format!(
            "start `{}` is not in the graph",
            t.start
        )));
    }
    if !t.is_contiguous() {
        return Err(SearchError::InvalidTraversal(format!("{t} is not contiguous")));
    }
    let mut acc = cfg.accumulator.initial();
    for k in 1..=t.len() {
        let step = &t.steps[k - 1];
        let kind = cfg
            .classify(&step.from, &step.to)
            .map_err(|source| SearchError::Acceptability {
                from: step.from.clone(),
                to: Some(step.to.clone()),
                source,
            })?;
        if kind != Some(step.kind) {
            return Err(SearchError::InvalidTraversal(format!(
                "transition {step} is classified as {kind:?}"
            )));
        }
        acc = cfg.accumulator.step(&cfg.graph, &acc, &t.prefix(k));
    }
    Ok(acc)
}

/// Upper estimate on explored states for traversals of length at most
/// `depth`: `(|E|/|N| + max_domain)^depth`, computed exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateBound(pub BigRational);

impl StateBound {
    /// Values above this many decimal digits are shown as a sentinel.
    pub const DISPLAY_DIGITS: usize = 60;

    pub fn as_u128(&self) -> Option<u128> {
        if self.0.is_integer() {
            self.0.to_integer().to_u128()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for StateBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0.to_integer().to_string();
        if whole.trim_start_matches('-').len() > Self::DISPLAY_DIGITS {
            return write!(f, ">1e{}", Self::DISPLAY_DIGITS);
        }
        if self.0.is_integer() {
            write!(f, "{whole}")
        } else {
            write!(f, "{} (~{:.3})", self.0, self.to_f64())
        }
    }
}

pub fn estimate_state_bound(
    g: &TypedGraph,
    max_domain: usize,
    depth: u32,
) -> Result<StateBound, GraphError> {
    let stats = g.degree_stats()?;
    let avg: Ratio<usize> = stats.avg_out_degree;
    let branching = BigRational::new(
        BigUint::from(*avg.numer()).into(),
        BigUint::from(*avg.denom()).into(),
    ) + BigRational::from_integer(BigUint::from(max_domain).into());
    let mut out = BigRational::one();
    for _ in 0..depth {
        out *= &branching;
        if out.is_zero() {
            break;
        }
    }
    Ok(StateBound(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acceptability::{MaxDistance, ScopeDomain};
    use crate::accumulation::{CounterAcc, TransitionCounter};
    use crate::graph::{props, PropertyBag, PropertyValue};

    fn n(s: &str) -> NodeId {
        NodeId::new(s)
    }

    /// A,B,C,D; edges A->B, C->D; B and C share a site 50 m apart.
    fn f1() -> Arc<TypedGraph> {
        let node = |id: &str, site: &str, x: f64| {
            let mut bag = props([("site", site)]);
            bag.insert("coordinates".into(), PropertyValue::Coordinates([x, 0.0]));
            (n(id), bag)
        };
        Arc::new(
            TypedGraph::build(
                vec![
                    node("A", "S0", -5000.0),
                    node("B", "S1", 0.0),
                    node("C", "S1", 50.0),
                    node("D", "S2", 5000.0),
                ],
                vec![
                    (n("A"), n("B"), PropertyBag::new()),
                    (n("C"), n("D"), PropertyBag::new()),
                ],
            )
            .unwrap(),
        )
    }

    fn telco_like_sigma(
        target: &'static str,
        max_gaps: u64,
    ) -> impl Fn(&TypedGraph, &Traversal, &CounterAcc) -> ExplorationDecision {
        move |_, t, a| {
            if a.get("gaps").unwrap() > max_gaps {
                ExplorationDecision::Prune
            } else if t.current_node().as_str() == target {
                ExplorationDecision::Terminate
            } else {
                ExplorationDecision::Continue
            }
        }
    }

    fn f1_config() -> SearchConfig<CounterAcc> {
        let g = f1();
        SearchConfig::new(g.clone(), "A", TransitionCounter::default(), telco_like_sigma("D", 1))
            .with_domain(ScopeDomain::new(&g, "site"))
            .with_predicate(MaxDistance::new(100.0))
    }

    #[test]
    fn expand_f1() {
        let cfg = f1_config();
        let root = cfg.root();
        let succ = expand(&cfg, &root).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].traversal.steps, vec![Transition::edge("A", "B")]);

        let at_b = succ[0].clone();
        let succ = expand(&cfg, &at_b).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].traversal.last(), Some(&Transition::gap("B", "C")));
        assert_eq!(succ[0].accumulation.get("gaps"), Some(1));

        let edge_only = f1_config().with_domain(EmptyDomain);
        assert!(expand(&edge_only, &at_b).unwrap().is_empty());
    }

    #[test]
    fn search_f1() {
        let set = search(&f1_config()).unwrap();
        assert_eq!(set.len(), 1);
        let sol = &set.solutions[0];
        assert_eq!(
            sol.traversal.steps,
            vec![
                Transition::edge("A", "B"),
                Transition::gap("B", "C"),
                Transition::edge("C", "D")
            ]
        );
        assert_eq!(sol.accumulation.get("gaps"), Some(1));
        assert_eq!(sol.accumulation.get("edges"), Some(2));
        assert_eq!(set.stats.gap_transitions_generated, 1);
    }

    #[test]
    fn prune_everything() {
        let cfg = SearchConfig::new(
            f1(),
            "A",
            TransitionCounter::default(),
            |_: &TypedGraph, _: &Traversal, _: &CounterAcc| ExplorationDecision::Prune,
        );
        let set = search(&cfg).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.stats.states_expanded, 0);
        assert_eq!(set.stats.states_pruned, 1);
    }

    #[test]
    fn start_equals_target_gives_empty_traversal() {
        let cfg = SearchConfig::new(f1(), "D", TransitionCounter::default(), telco_like_sigma("D", 1));
        let set = search(&cfg).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.solutions[0].traversal.is_empty());
        assert_eq!(set.solutions[0].accumulation, TransitionCounter::default().initial());
    }

    #[test]
    fn terminate_keeps_expanding() {
        // Chain A->B->C, every state terminates.
        let g = Arc::new(
            TypedGraph::build(
                ["A", "B", "C"].iter().map(|s| (n(s), PropertyBag::new())).collect(),
                vec![
                    (n("A"), n("B"), PropertyBag::new()),
                    (n("B"), n("C"), PropertyBag::new()),
                ],
            )
            .unwrap(),
        );
        let cfg = SearchConfig::new(
            g,
            "A",
            TransitionCounter::default(),
            |_: &TypedGraph, _: &Traversal, _: &CounterAcc| ExplorationDecision::Terminate,
        );
        let set = search(&cfg).unwrap();
        let lens: Vec<usize> = set.traversals().map(Traversal::len).collect();
        assert_eq!(lens, vec![0, 1, 2]);
    }

    #[test]
    fn edge_takes_precedence_over_gap() {
        let g = Arc::new(
            TypedGraph::build(
                vec![
                    (n("A"), props([("site", "S")])),
                    (n("B"), props([("site", "S")])),
                ],
                vec![(n("A"), n("B"), PropertyBag::new())],
            )
            .unwrap(),
        );
        let cfg = SearchConfig::new(
            g.clone(),
            "A",
            TransitionCounter::default(),
            |_: &TypedGraph, _: &Traversal, _: &CounterAcc| ExplorationDecision::Continue,
        )
        .with_domain(ScopeDomain::new(&g, "site"));
        let succ = expand(&cfg, &cfg.root()).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].traversal.steps[0].kind, TransitionKind::Edge);
    }

    #[test]
    fn missing_property_is_annotated() {
        let g = f1();
        let cfg = f1_config().with_predicate(crate::acceptability::PropertyEquals::new("fiber_type"));
        let at_b = TraversalState {
            traversal: Traversal::from_steps("A", vec![Transition::edge("A", "B")]),
            accumulation: cfg.accumulator.step(
                &g,
                &cfg.accumulator.initial(),
                &Traversal::from_steps("A", vec![Transition::edge("A", "B")]),
            ),
        };
        match expand(&cfg, &at_b) {
            Err(SearchError::Acceptability { from, to, source }) => {
                assert_eq!(from, n("B"));
                assert_eq!(to, Some(n("C")));
                assert!(matches!(source, AcceptabilityError::MissingProperty { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn safety_cap_triggers() {
        let cfg = f1_config()
            .with_safety_cap(Some(2))
            .with_start("A");
        let err = search(&cfg).unwrap_err();
        assert!(matches!(err, SearchError::SafetyCapExceeded { cap: 2, .. }));
        let partial = search_partial(&cfg).unwrap();
        assert!(partial.stats.cap_exceeded);
        assert_eq!(partial.stats.states_expanded, 2);
    }

    #[test]
    fn bad_config() {
        let cfg = f1_config().with_start("nope");
        assert!(matches!(search(&cfg), Err(SearchError::Config(_))));
        let cfg = f1_config().with_frontier(FrontierPolicy::beam(0, |_: &CounterAcc| 0.0));
        assert!(matches!(search(&cfg), Err(SearchError::Config(_))));
    }

    #[test]
    fn recompute_cases() {
        let cfg = f1_config();
        let empty = Traversal::empty("A");
        assert_eq!(recompute_accumulation(&cfg, &empty).unwrap(), cfg.accumulator.initial());
        let t = Traversal::from_steps("A", vec![Transition::edge("A", "B"), Transition::gap("B", "C")]);
        assert_eq!(recompute_accumulation(&cfg, &t).unwrap().get("gaps"), Some(1));

        let mislabeled = Traversal::from_steps("A", vec![Transition::gap("A", "B")]);
        assert!(matches!(
            recompute_accumulation(&cfg, &mislabeled),
            Err(SearchError::InvalidTraversal(_))
        ));
        let broken = Traversal::from_steps("A", vec![Transition::edge("C", "D")]);
        assert!(matches!(
            recompute_accumulation(&cfg, &broken),
            Err(SearchError::InvalidTraversal(_))
        ));
    }

    fn graph_with(nodes: usize, edges: usize) -> TypedGraph {
        let ids: Vec<NodeId> = (0..nodes).map(|i| n(&format!("v{i:03}"))).collect();
        let mut es = Vec::new();
        'outer: for a in 0..nodes {
            for b in 0..nodes {
                if es.len() == edges {
                    break 'outer;
                }
                es.push((ids[a].clone(), ids[b].clone(), PropertyBag::new()));
            }
        }
        TypedGraph::build(ids.into_iter().map(|i| (i, PropertyBag::new())).collect(), es).unwrap()
    }

    #[test]
    fn state_bound_examples() {
        let g = graph_with(5, 10);
        assert_eq!(estimate_state_bound(&g, 3, 2).unwrap().as_u128(), Some(25));
        assert_eq!(estimate_state_bound(&g, 3, 0).unwrap().as_u128(), Some(1));
        let sparse = graph_with(5, 0);
        assert_eq!(estimate_state_bound(&sparse, 0, 5).unwrap().as_u128(), Some(0));
        assert_eq!(
            estimate_state_bound(&TypedGraph::empty(), 1, 1),
            Err(GraphError::EmptyGraph)
        );
        // 1/2 + 1 = 3/2, squared = 9/4.
        let half = graph_with(2, 1);
        let b = estimate_state_bound(&half, 1, 2).unwrap();
        assert_eq!(b.0, BigRational::new(9.into(), 4.into()));
        assert_eq!(b.to_string(), "9/4 (~2.250)");
        let huge = estimate_state_bound(&g, 1000, 40).unwrap();
        assert_eq!(huge.to_string(), ">1e60");
    }
}
