use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::node_types::{AMPLIFIER, ODF};
use super::ScenarioError;
use crate::acceptability::{Conjunction, MaxDistance, PropertyCompatible, ScopeDomain};
use crate::accumulation::{AccumulationState, Accumulator, ExplorationDecision, ExplorationPredicate};
use crate::analysis::SweepSpec;
use crate::engine::SearchConfig;
use crate::frontier::FrontierPolicy;
use crate::graph::{NodeId, PropertyValue, TypedGraph, COORDINATES, NODE_TYPE};
use crate::traversal::Traversal;

fn default_gap_distance() -> f64 {
    100.0
}
fn default_budget() -> f64 {
    30.0
}
fn one() -> u32 {
    1
}
fn default_db_per_km() -> f64 {
    0.35
}
fn default_connector_loss() -> f64 {
    0.5
}

/// Operational rules for an optical route between two ODFs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelcoPolicy {
    /// Gaps must be strictly shorter than this.
    #[serde(default = "default_gap_distance")]
    pub max_gap_distance_m: f64,
    #[serde(default = "default_budget")]
    pub attenuation_budget_db: f64,
    #[serde(default = "one")]
    pub max_gaps: u32,
    #[serde(default = "one")]
    pub max_amplifiers: u32,
    #[serde(default)]
    pub target: Option<NodeId>,
    /// Gap attenuation is `gap_db_per_km * length + gap_connector_loss_db`.
    #[serde(default = "default_db_per_km")]
    pub gap_db_per_km: f64,
    #[serde(default = "default_connector_loss")]
    pub gap_connector_loss_db: f64,
    /// Extra compatible `fiber_type` pairs; equal types are always compatible.
    #[serde(default)]
    pub fiber_compatibility: Vec<(String, String)>,
}

impl TelcoPolicy {
    pub fn new(target: impl Into<NodeId>) -> Self {
        TelcoPolicy {
            target: Some(target.into()),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let nonneg = [
            ("max_gap_distance_m", self.max_gap_distance_m),
            ("attenuation_budget_db", self.attenuation_budget_db),
            ("gap_db_per_km", self.gap_db_per_km),
            ("gap_connector_loss_db", self.gap_connector_loss_db),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(ScenarioError::InvalidPolicy(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for TelcoPolicy {
    fn default() -> Self {
        TelcoPolicy {
            max_gap_distance_m: default_gap_distance(),
            attenuation_budget_db: default_budget(),
            max_gaps: 1,
            max_amplifiers: 1,
            target: None,
            gap_db_per_km: default_db_per_km(),
            gap_connector_loss_db: default_connector_loss(),
            fiber_compatibility: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TelcoAccumulation {
    pub total_length_m: f64,
    pub total_attenuation_db: f64,
    pub gap_count: u32,
    pub amplifier_count: u32,
}

impl AccumulationState for TelcoAccumulation {
    fn dimensions(&self) -> Vec<(String, f64)> {
        vec![
            ("total_length_m".into(), self.total_length_m),
            ("total_attenuation_db".into(), self.total_attenuation_db),
            ("gap_count".into(), f64::from(self.gap_count)),
            ("amplifier_count".into(), f64::from(self.amplifier_count)),
        ]
    }
}

/// Sums fiber length and attenuation from edge properties; a gap adds its
/// straight-line length and the configured gap loss.
#[derive(Debug, Clone)]
pub struct TelcoAccumulator {
    pub gap_db_per_km: f64,
    pub gap_connector_loss_db: f64,
}

impl Accumulator<TelcoAccumulation> for TelcoAccumulator {
    fn initial(&self) -> TelcoAccumulation {
        TelcoAccumulation::default()
    }

    fn step(&self, g: &TypedGraph, previous: &TelcoAccumulation, traversal: &Traversal) -> TelcoAccumulation {
        let mut next = *previous;
        let Some(t) = traversal.last() else {
            return next;
        };
        if t.is_gap() {
            let length = g.distance(&t.from, &t.to, COORDINATES).unwrap_or(0.0);
            next.total_length_m += length;
            next.total_attenuation_db += self.gap_db_per_km * length / 1000.0 + self.gap_connector_loss_db;
            next.gap_count += 1;
        } else if let Some(p) = g.edge_props(&t.from, &t.to) {
            next.total_length_m += p.get("length_m").and_then(PropertyValue::as_f64).unwrap_or(0.0);
            next.total_attenuation_db += p.get("attenuation_db").and_then(PropertyValue::as_f64).unwrap_or(0.0);
        }
        if g.node_property(&t.to, NODE_TYPE).and_then(PropertyValue::as_str) == Some(AMPLIFIER) {
            next.amplifier_count += 1;
        }
        next
    }
}

/// Prune on any budget violation, terminate at the target, continue otherwise.
#[derive(Debug, Clone)]
pub struct TelcoSigma {
    pub attenuation_budget_db: f64,
    pub max_gaps: u32,
    pub max_amplifiers: u32,
    pub target: NodeId,
}

impl ExplorationPredicate<TelcoAccumulation> for TelcoSigma {
    fn decide(&self, _: &TypedGraph, t: &Traversal, a: &TelcoAccumulation) -> ExplorationDecision {
        if a.total_attenuation_db > self.attenuation_budget_db
            || a.gap_count > self.max_gaps
            || a.amplifier_count > self.max_amplifiers
        {
            ExplorationDecision::Prune
        } else if t.current_node() == &self.target {
            ExplorationDecision::Terminate
        } else {
            ExplorationDecision::Continue
        }
    }
}

fn is_odf(g: &TypedGraph, n: &NodeId) -> bool {
    g.node_property(n, NODE_TYPE).and_then(PropertyValue::as_str) == Some(ODF)
}

/// Search configuration for an ODF-to-ODF optical route: same-site gap
/// candidates, distance and fiber-type checks, and the policy's budgets.
pub fn telco_config(
    graph: Arc<TypedGraph>,
    start: &NodeId,
    policy: &TelcoPolicy,
) -> Result<SearchConfig<TelcoAccumulation>, ScenarioError> {
    policy.validate()?;
    if !graph.contains(start) {
        return Err(ScenarioError::UnknownNode(start.clone()));
    }
    if !is_odf(&graph, start) {
        return Err(ScenarioError::NotAnOdf(start.clone()));
    }
    let target = policy
        .target
        .clone()
        .ok_or_else(|| ScenarioError::InvalidPolicy("telco policy needs a target ODF".into()))?;
    if !graph.contains(&target) {
        return Err(ScenarioError::UnknownNode(target));
    }
    for (from, to, p) in graph.edges() {
        for key in ["length_m", "attenuation_db"] {
            if p.get(key).and_then(PropertyValue::as_f64).is_none() {
                return Err(ScenarioError::MissingEdgeProperty {
                    from: from.clone(),
                    to: to.clone(),
                    key: key.into(),
                });
            }
        }
    }

    let domain = ScopeDomain::new(&graph, "site");
    let predicate = Conjunction(vec![
        Box::new(MaxDistance::new(policy.max_gap_distance_m)),
        Box::new(PropertyCompatible::with_pairs(
            "fiber_type",
            policy.fiber_compatibility.iter().cloned(),
        )),
    ]);
    let accumulator = TelcoAccumulator {
        gap_db_per_km: policy.gap_db_per_km,
        gap_connector_loss_db: policy.gap_connector_loss_db,
    };
    let sigma = TelcoSigma {
        attenuation_budget_db: policy.attenuation_budget_db,
        max_gaps: policy.max_gaps,
        max_amplifiers: policy.max_amplifiers,
        target,
    };
    Ok(SearchConfig::new(graph, start.clone(), accumulator, sigma)
        .with_domain(domain)
        .with_predicate(predicate)
        .with_frontier(FrontierPolicy::Fifo))
}

/// Budget sweep over the attenuation limit, everything else held fixed.
pub fn telco_sweep(
    graph: Arc<TypedGraph>,
    policy: TelcoPolicy,
    budgets: Vec<f64>,
    pairs: Vec<(NodeId, NodeId)>,
) -> SweepSpec<TelcoAccumulation> {
    SweepSpec::new(budgets, pairs, move |source, target, budget| {
        let mut p = policy.clone();
        p.attenuation_budget_db = budget;
        p.target = Some(target.clone());
        telco_config(graph.clone(), source, &p).map_err(|e| e.to_string())
    })
}
