//! Brute-force reference enumeration for checking the search engine on
//! small graphs.
//!
//! Generates every simple node sequence from the start by plain recursion,
//! classifies each consecutive pair directly against the graph, domain and
//! predicate, and applies the exploration predicate to each prefix on its own.
//! It shares no expansion or frontier code with the engine.

use std::sync::Arc;

use thiserror::Error;

use crate::acceptability::{AcceptabilityError, DomainProvider, GapPredicate};
use crate::accumulation::{AccumulationState, Accumulator, ExplorationDecision, ExplorationPredicate};
use crate::engine::{SearchConfig, SearchStats, SolutionSet, TraversalState};
use crate::graph::{NodeId, TypedGraph};
use crate::traversal::{Transition, TransitionKind, Traversal};

/// Enumeration is exhaustive; above this many nodes the oracle refuses to
/// run unless forced.
pub const ADVISORY_MAX_NODES: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("graph has {nodes} nodes; the oracle is meant for at most {limit} (force to override)")]
    GraphTooLarge { nodes: usize, limit: usize },
    #[error("start node `{0}` is not in the graph")]
    UnknownStart(NodeId),
    #[error("acceptability check failed at {from} -> {to}: {source}")]
    Acceptability {
        from: NodeId,
        to: NodeId,
        #[source]
        source: AcceptabilityError,
    },
}

pub struct OracleConfig<A> {
    pub graph: Arc<TypedGraph>,
    pub start: NodeId,
    pub domain: Arc<dyn DomainProvider>,
    pub predicate: Arc<dyn GapPredicate>,
    pub accumulator: Arc<dyn Accumulator<A>>,
    pub sigma: Arc<dyn ExplorationPredicate<A>>,
    /// Longest traversal enumerated; clamped to `|N|`.
    pub max_depth: usize,
    pub force: bool,
}

impl<A> OracleConfig<A> {
    /// Same parametrization as a search config, enumerating up to `|N|`.
    pub fn from_search(cfg: &SearchConfig<A>) -> Self {
        OracleConfig {
            graph: cfg.graph.clone(),
            start: cfg.start.clone(),
            domain: cfg.domain.clone(),
            predicate: cfg.predicate.clone(),
            accumulator: cfg.accumulator.clone(),
            sigma: cfg.sigma.clone(),
            max_depth: cfg.graph.node_count(),
            force: false,
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }
}

pub fn enumerate_solutions<A: AccumulationState>(cfg: &OracleConfig<A>) -> Result<SolutionSet<A>, OracleError> {
    let g = &*cfg.graph;
    if g.node_count() > ADVISORY_MAX_NODES && !cfg.force {
        return Err(OracleError::GraphTooLarge {
            nodes: g.node_count(),
            limit: ADVISORY_MAX_NODES,
        });
    }
    if !g.contains(&cfg.start) {
        return Err(OracleError::UnknownStart(cfg.start.clone()));
    }
    let mut walk = Walk {
        cfg,
        max_depth: cfg.max_depth.min(g.node_count()),
        solutions: Vec::new(),
        stats: SearchStats::default(),
    };
    let mut sequence = Traversal::empty(cfg.start.clone());
    walk.visit(&mut sequence, cfg.accumulator.initial())?;
    Ok(SolutionSet {
        solutions: walk.solutions,
        stats: walk.stats,
    })
}

struct Walk<'c, A> {
    cfg: &'c OracleConfig<A>,
    max_depth: usize,
    solutions: Vec<TraversalState<A>>,
    stats: SearchStats,
}

impl<A: AccumulationState> Walk<'_, A> {
    fn pair_kind(&self, from: &NodeId, to: &NodeId) -> Result<Option<TransitionKind>, OracleError> {
        let g = &*self.cfg.graph;
        if g.edges().any(|(a, b, _)| a == from && b == to) {
            return Ok(Some(TransitionKind::Edge));
        }
        let wrap = |source| OracleError::Acceptability {
            from: from.clone(),
            to: to.clone(),
            source,
        };
        let in_domain = self.cfg.domain.candidates(g, from).map_err(wrap)?.contains(to);
        if in_domain && self.cfg.predicate.accepts(g, from, to).map_err(wrap)? {
            return Ok(Some(TransitionKind::Gap));
        }
        Ok(None)
    }

    fn visit(&mut self, seq: &mut Traversal, acc: A) -> Result<(), OracleError> {
        let g = &*self.cfg.graph;
        match self.cfg.sigma.decide(g, seq, &acc) {
            ExplorationDecision::Prune => {
                self.stats.states_pruned += 1;
                return Ok(());
            }
            ExplorationDecision::Terminate => {
                self.stats.states_terminated += 1;
                self.solutions.push(TraversalState {
                    traversal: seq.clone(),
                    accumulation: acc.clone(),
                });
            }
            ExplorationDecision::Continue => {}
        }
        if seq.len() >= self.max_depth {
            return Ok(());
        }
        self.stats.states_expanded += 1;
        let here = seq.current_node().clone();
        for m in g.nodes() {
            if seq.visits(m) {
                continue;
            }
            let Some(kind) = self.pair_kind(&here, m)? else {
                continue;
            };
            if kind == TransitionKind::Gap {
                self.stats.gap_transitions_generated += 1;
            }
            seq.steps.push(Transition {
                from: here.clone(),
                to: m.clone(),
                kind,
            });
            let next = self.cfg.accumulator.step(g, &acc, seq);
            self.visit(seq, next)?;
            seq.steps.pop();
        }
        Ok(())
    }
}
