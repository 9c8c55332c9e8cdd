//! Parametric traversal search over incomplete typed graphs.
//!
//! A search is configured by an acceptability domain and predicate (which
//! missing links may be bridged), an accumulation function, an exploration
//! predicate, and a frontier policy. See [`engine::search`].

pub mod acceptability;
pub mod accumulation;
pub mod analysis;
pub mod engine;
pub mod frontier;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod rules;
pub mod scenarios;
pub mod traversal;

pub use acceptability::{AcceptabilityError, DomainProvider, GapPredicate};
pub use accumulation::{AccumulationState, Accumulator, ExplorationDecision, ExplorationPredicate};
pub use analysis::{dominance_filter, knee_report, sweep, DominanceRelation, SweepResult, SweepSpec};
pub use engine::{
    estimate_state_bound, recompute_accumulation, search, search_partial, SearchConfig, SearchError, SearchStats,
    SolutionSet, StateBound, TraversalState, DEFAULT_SAFETY_CAP,
};
pub use frontier::FrontierPolicy;
pub use graph::{GraphError, NodeId, PropertyBag, PropertyValue, TypedGraph};
pub use oracle::{enumerate_solutions, OracleConfig};
pub use traversal::{Transition, TransitionKind, Traversal};
