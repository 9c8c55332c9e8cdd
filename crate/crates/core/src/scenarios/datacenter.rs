use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::node_types::{PATCH_PANEL, SERVER};
use super::ScenarioError;
use crate::acceptability::{CompositeDomain, DomainProvider, HasAvailablePorts, PropertyInDomain, ScopeDomain};
use crate::accumulation::{AccumulationState, Accumulator, ExplorationDecision, ExplorationPredicate};
use crate::engine::SearchConfig;
use crate::graph::{NodeId, PropertyValue, TypedGraph, NODE_TYPE};
use crate::traversal::Traversal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Standard,
    Premium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapScope {
    SameRack,
    SameRoom,
}

impl GapScope {
    fn key(self) -> &'static str {
        match self {
            GapScope::SameRack => "rack",
            GapScope::SameRoom => "room",
        }
    }
}

/// Client policy for a server-to-upstream circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatacenterPolicy {
    pub tier: Tier,
    pub max_gaps: u32,
    pub max_row_changes: u32,
    pub gap_scope: GapScope,
    /// Gap candidates must have one of these `node_type` values; `None`
    /// admits every type.
    pub gap_node_types: Option<Vec<String>>,
    /// Only terminate at this node (which must still be upstream).
    #[serde(default)]
    pub target: Option<NodeId>,
}

impl DatacenterPolicy {
    /// Rack-local cross-connects on patch panels, at most 2 new cables.
    pub fn standard() -> Self {
        DatacenterPolicy {
            tier: Tier::Standard,
            max_gaps: 2,
            max_row_changes: 1,
            gap_scope: GapScope::SameRack,
            gap_node_types: Some(vec![PATCH_PANEL.to_string()]),
            target: None,
        }
    }

    /// Inter-rack gaps anywhere in the room, at most 5 new cables.
    pub fn premium() -> Self {
        DatacenterPolicy {
            tier: Tier::Premium,
            max_gaps: 5,
            max_row_changes: 1,
            gap_scope: GapScope::SameRoom,
            gap_node_types: None,
            target: None,
        }
    }

    pub fn for_tier(tier: Tier) -> Self {
        match tier {
            Tier::Standard => Self::standard(),
            Tier::Premium => Self::premium(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatacenterAccumulation {
    pub gap_count: u32,
    /// Distinct rack values among visited nodes, start included.
    pub racks_traversed: u32,
    /// Transitions whose endpoints lie in different rows.
    pub row_changes: u32,
}

impl DatacenterAccumulation {
    pub fn as_tuple(&self) -> (u32, u32, u32) {
        (self.gap_count, self.racks_traversed, self.row_changes)
    }
}

impl AccumulationState for DatacenterAccumulation {
    fn dimensions(&self) -> Vec<(String, f64)> {
        vec![
            ("gap_count".into(), f64::from(self.gap_count)),
            ("racks_traversed".into(), f64::from(self.racks_traversed)),
            ("row_changes".into(), f64::from(self.row_changes)),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct DatacenterAccumulator {
    initial: DatacenterAccumulation,
}

impl DatacenterAccumulator {
    pub fn for_start(g: &TypedGraph, start: &NodeId) -> Self {
        let racks = u32::from(g.node_property(start, "rack").is_some());
        DatacenterAccumulator {
            initial: DatacenterAccumulation {
                racks_traversed: racks,
                ..Default::default()
            },
        }
    }
}

impl Accumulator<DatacenterAccumulation> for DatacenterAccumulator {
    fn initial(&self) -> DatacenterAccumulation {
        self.initial
    }

    fn step(
        &self,
        g: &TypedGraph,
        previous: &DatacenterAccumulation,
        traversal: &Traversal,
    ) -> DatacenterAccumulation {
        let mut next = *previous;
        let Some(t) = traversal.last() else {
            return next;
        };
        if t.is_gap() {
            next.gap_count += 1;
        }
        if g.node_property(&t.from, "row") != g.node_property(&t.to, "row") {
            next.row_changes += 1;
        }
        if let Some(rack) = g.node_property(&t.to, "rack") {
            let k = traversal.len() - 1;
            let seen: BTreeSet<String> = traversal
                .nodes()
                .take(k + 1)
                .filter_map(|n| g.node_property(n, "rack"))
                .map(PropertyValue::scope_key)
                .collect();
            if !seen.contains(&rack.scope_key()) {
                next.racks_traversed += 1;
            }
        }
        next
    }
}

#[derive(Debug, Clone)]
pub struct DatacenterSigma {
    pub max_gaps: u32,
    pub max_row_changes: u32,
    pub target: Option<NodeId>,
}

impl ExplorationPredicate<DatacenterAccumulation> for DatacenterSigma {
    fn decide(&self, g: &TypedGraph, t: &Traversal, a: &DatacenterAccumulation) -> ExplorationDecision {
        if a.gap_count > self.max_gaps || a.row_changes > self.max_row_changes {
            return ExplorationDecision::Prune;
        }
        let at = t.current_node();
        let upstream = g.node_property(at, "upstream").and_then(PropertyValue::as_bool) == Some(true);
        if upstream && self.target.as_ref().is_none_or(|target| target == at) {
            ExplorationDecision::Terminate
        } else {
            ExplorationDecision::Continue
        }
    }
}

/// Search configuration for a server-to-upstream circuit under a client tier.
pub fn datacenter_config(
    graph: Arc<TypedGraph>,
    start: &NodeId,
    policy: &DatacenterPolicy,
) -> Result<SearchConfig<DatacenterAccumulation>, ScenarioError> {
    if !graph.contains(start) {
        return Err(ScenarioError::UnknownNode(start.clone()));
    }
    if graph.node_property(start, NODE_TYPE).and_then(PropertyValue::as_str) != Some(SERVER) {
        return Err(ScenarioError::NotAServer(start.clone()));
    }
    if let Some(t) = &policy.target {
        if !graph.contains(t) {
            return Err(ScenarioError::UnknownNode(t.clone()));
        }
    }

    let scope = ScopeDomain::new(&graph, policy.gap_scope.key());
    let domain: Box<dyn DomainProvider> = match &policy.gap_node_types {
        Some(types) => {
            let values: Vec<PropertyValue> = types.iter().map(|t| PropertyValue::text(t.as_str())).collect();
            Box::new(CompositeDomain::intersection(vec![
                Box::new(scope),
                Box::new(PropertyInDomain::new(&graph, NODE_TYPE, &values)),
            ]))
        }
        None => Box::new(scope),
    };
    let accumulator = DatacenterAccumulator::for_start(&graph, start);
    let sigma = DatacenterSigma {
        max_gaps: policy.max_gaps,
        max_row_changes: policy.max_row_changes,
        target: policy.target.clone(),
    };
    let mut cfg = SearchConfig::new(graph, start.clone(), accumulator, sigma)
        .with_predicate(HasAvailablePorts::default());
    cfg.domain = Arc::from(domain);
    Ok(cfg)
}
