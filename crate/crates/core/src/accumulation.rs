//! Accumulation states folded along traversals, and exploration verdicts.

use std::fmt;
use std::sync::Arc;

use crate::graph::TypedGraph;
use crate::traversal::Traversal;

/// State carried by a traversal. The engine treats it as opaque; the named
/// numeric view is what dominance analysis, declarative rules and reports use.
pub trait AccumulationState: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Named numeric dimensions, in a fixed order.
    fn dimensions(&self) -> Vec<(String, f64)>;

    fn dimension(&self, name: &str) -> Option<f64> {
        self.dimensions()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

/// A bare scalar, exposed as the single dimension `value`.
impl AccumulationState for f64 {
    fn dimensions(&self) -> Vec<(String, f64)> {
        vec![("value".to_string(), *self)]
    }
}

/// Initial state plus step function. `step` receives the previous
/// accumulation and the traversal that already includes the new transition.
pub trait Accumulator<A>: Send + Sync {
    fn initial(&self) -> A;
    fn step(&self, graph: &TypedGraph, previous: &A, traversal: &Traversal) -> A;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExplorationDecision {
    /// Expand successors.
    Continue,
    /// Record as a solution, then expand successors.
    Terminate,
    /// Discard, together with every extension.
    Prune,
}

pub trait ExplorationPredicate<A>: Send + Sync {
    fn decide(&self, graph: &TypedGraph, traversal: &Traversal, acc: &A) -> ExplorationDecision;
}

impl<A, F> ExplorationPredicate<A> for F
where
    F: Fn(&TypedGraph, &Traversal, &A) -> ExplorationDecision + Send + Sync,
{
    fn decide(&self, graph: &TypedGraph, traversal: &Traversal, acc: &A) -> ExplorationDecision {
        self(graph, traversal, acc)
    }
}

/// Fixed-length tuple of named real-valued dimensions.
#[derive(Clone, PartialEq)]
pub struct VectorAcc {
    names: Arc<[String]>,
    pub values: Vec<f64>,
}

impl VectorAcc {
    pub fn zeros(names: Arc<[String]>) -> Self {
        let values = vec![0.0; names.len()];
        VectorAcc { names, values }
    }

    pub fn new(names: Arc<[String]>, values: Vec<f64>) -> Self {
        assert_eq!(names.len(), values.len(), "dimension count mismatch");
        VectorAcc { names, values }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

impl fmt::Debug for VectorAcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.names.iter().zip(&self.values))
            .finish()
    }
}

impl AccumulationState for VectorAcc {
    fn dimensions(&self) -> Vec<(String, f64)> {
        self.names.iter().cloned().zip(self.values.iter().copied()).collect()
    }
}

/// Named natural-number counters.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CounterAcc {
    names: Arc<[String]>,
    pub counts: Vec<u64>,
}

impl CounterAcc {
    pub fn zeros(names: Arc<[String]>) -> Self {
        let counts = vec![0; names.len()];
        CounterAcc { names, counts }
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.counts[i])
    }
}

impl fmt::Debug for CounterAcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.names.iter().zip(&self.counts))
            .finish()
    }
}

impl AccumulationState for CounterAcc {
    fn dimensions(&self) -> Vec<(String, f64)> {
        self.names
            .iter()
            .cloned()
            .zip(self.counts.iter().map(|&c| c as f64))
            .collect()
    }
}

/// Counts `gaps` and `edges` along the traversal.
#[derive(Debug, Clone)]
pub struct TransitionCounter {
    names: Arc<[String]>,
}

impl Default for TransitionCounter {
    fn default() -> Self {
        TransitionCounter {
            names: Arc::from(vec!["gaps".to_string(), "edges".to_string()]),
        }
    }
}

impl Accumulator<CounterAcc> for TransitionCounter {
    fn initial(&self) -> CounterAcc {
        CounterAcc::zeros(self.names.clone())
    }

    fn step(&self, _: &TypedGraph, previous: &CounterAcc, traversal: &Traversal) -> CounterAcc {
        let mut next = previous.clone();
        match traversal.last() {
            Some(t) if t.is_gap() => next.counts[0] += 1,
            Some(_) => next.counts[1] += 1,
            None => {}
        }
        next
    }
}
