use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    /// Follows an existing edge.
    Edge,
    /// Crosses a missing but admissible connection.
    Gap,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: TransitionKind,
}

impl Transition {
    pub fn edge(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Self {
        Transition {
            from: from.into(),
            to: to.into(),
            kind: TransitionKind::Edge,
        }
    }

    pub fn gap(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Self {
        Transition {
            from: from.into(),
            to: to.into(),
            kind: TransitionKind::Gap,
        }
    }

    pub fn is_gap(&self) -> bool {
        self.kind == TransitionKind::Gap
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            TransitionKind::Edge => "->",
            TransitionKind::Gap => "~>",
        };
        write!(f, "{} {arrow} {}", self.from, self.to)
    }
}

/// A start node plus a contiguous sequence of transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Traversal {
    pub start: NodeId,
    pub steps: Vec<Transition>,
}

impl Traversal {
    pub fn empty(start: impl Into<NodeId>) -> Self {
        Traversal {
            start: start.into(),
            steps: Vec::new(),
        }
    }

    /// Builds a traversal from explicit transitions; does not check contiguity.
    pub fn from_steps(start: impl Into<NodeId>, steps: Vec<Transition>) -> Self {
        Traversal {
            start: start.into(),
            steps,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The start node for an empty traversal, otherwise the target of the
    /// last transition.
    pub fn current_node(&self) -> &NodeId {
        self.steps.last().map_or(&self.start, |t| &t.to)
    }

    /// The start node and every transition target.
    pub fn visited_nodes(&self) -> BTreeSet<NodeId> {
        self.nodes().cloned().collect()
    }

    /// Nodes in visit order, start first.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> + '_ {
        std::iter::once(&self.start).chain(self.steps.iter().map(|t| &t.to))
    }

    pub fn visits(&self, n: &NodeId) -> bool {
        self.nodes().any(|v| v == n)
    }

    pub fn last(&self) -> Option<&Transition> {
        self.steps.last()
    }

    pub fn gap_count(&self) -> usize {
        self.steps.iter().filter(|t| t.is_gap()).count()
    }

    /// `self · t`.
    pub fn extended(&self, t: Transition) -> Traversal {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(t);
        Traversal {
            start: self.start.clone(),
            steps,
        }
    }

    /// The first `k` transitions.
    pub fn prefix(&self, k: usize) -> Traversal {
        Traversal {
            start: self.start.clone(),
            steps: self.steps[..k].to_vec(),
        }
    }

    pub fn is_contiguous(&self) -> bool {
        let mut at = &self.start;
        for t in &self.steps {
            if &t.from != at {
                return false;
            }
            at = &t.to;
        }
        true
    }

    pub fn is_simple(&self) -> bool {
        self.visited_nodes().len() == self.steps.len() + 1
    }
}

impl fmt::Display for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for t in &self.steps {
            let arrow = match t.kind {
                TransitionKind::Edge => " -> ",
                TransitionKind::Gap => " ~> ",
            };
            write!(f, "{arrow}{}", t.to)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Traversal {
        Traversal::from_steps("A", vec![Transition::edge("A", "B"), Transition::gap("B", "C")])
    }

    #[test]
    fn current_node_cases() {
        assert_eq!(Traversal::empty("A").current_node().as_str(), "A");
        assert_eq!(abc().current_node().as_str(), "C");
        assert_eq!(abc().prefix(1).current_node().as_str(), "B");
    }

    #[test]
    fn visited_includes_start() {
        let set = |ids: &[&str]| ids.iter().map(|s| NodeId::new(s)).collect::<BTreeSet<_>>();
        assert_eq!(Traversal::empty("A").visited_nodes(), set(&["A"]));
        assert_eq!(abc().visited_nodes(), set(&["A", "B", "C"]));
        assert_eq!(abc().prefix(1).visited_nodes(), set(&["A", "B"]));
    }

    #[test]
    fn contiguity_and_simplicity() {
        assert!(abc().is_contiguous());
        assert!(abc().is_simple());
        let broken = Traversal::from_steps("A", vec![Transition::edge("A", "B"), Transition::edge("C", "D")]);
        assert!(!broken.is_contiguous());
        let looped = abc().extended(Transition::edge("C", "A"));
        assert!(looped.is_contiguous());
        assert!(!looped.is_simple());
        assert_eq!(abc().to_string(), "A -> B ~> C");
    }
}
