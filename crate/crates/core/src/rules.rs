//! Declarative accumulation dimensions and threshold-style exploration rules.
//!
//! This is the parametrization behind custom policy files: every dimension is
//! a sum of per-transition contributions, and the exploration predicate is a
//! list of prune rules followed by a list of terminate rules.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::accumulation::{Accumulator, ExplorationDecision, ExplorationPredicate, VectorAcc};
use crate::graph::{NodeId, PropertyValue, TypedGraph, COORDINATES};
use crate::traversal::{Transition, Traversal};

/// Value a gap contributes to an edge-property dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GapValue {
    Constant { value: f64 },
    /// `offset + per_m * distance(from, to)`.
    Distance {
        #[serde(default)]
        per_m: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Default for GapValue {
    fn default() -> Self {
        GapValue::Constant { value: 0.0 }
    }
}

impl GapValue {
    fn eval(&self, g: &TypedGraph, t: &Transition) -> f64 {
        match self {
            GapValue::Constant { value } => *value,
            GapValue::Distance { per_m, offset } => {
                offset + per_m * g.distance(&t.from, &t.to, COORDINATES).unwrap_or(0.0)
            }
        }
    }

    fn min_value(&self) -> f64 {
        match self {
            GapValue::Constant { value } => *value,
            GapValue::Distance { per_m, offset } => {
                if *per_m >= 0.0 {
                    *offset
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// How a dimension grows per transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum DimensionSource {
    /// +1 per transition.
    Steps,
    /// +1 per gap transition.
    Gaps,
    /// +1 per edge transition.
    Edges,
    /// Sum of a numeric edge property (missing values count as 0); gaps add
    /// `gap`.
    EdgeProperty {
        key: String,
        #[serde(default)]
        gap: GapValue,
    },
    /// +1 per entered node whose `key` equals `value`.
    NodesWith { key: String, value: serde_json::Value },
    /// +1 per transition whose endpoints differ in `key`.
    PropertyChanges { key: String },
    /// Euclidean length of every transition.
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: DimensionSource,
}

impl DimensionSpec {
    pub fn new(name: impl Into<String>, source: DimensionSource) -> Self {
        DimensionSpec {
            name: name.into(),
            source,
        }
    }
}

fn json_matches(v: &PropertyValue, want: &serde_json::Value) -> bool {
    match (v, want) {
        (PropertyValue::Text(s), serde_json::Value::String(w)) => s == w,
        (PropertyValue::Bool(b), serde_json::Value::Bool(w)) => b == w,
        (PropertyValue::Number { value, .. }, serde_json::Value::Number(w)) => {
            w.as_f64() == Some(*value)
        }
        _ => false,
    }
}

impl DimensionSource {
    fn contribution(&self, g: &TypedGraph, t: &Transition) -> f64 {
        match self {
            DimensionSource::Steps => 1.0,
            DimensionSource::Gaps => f64::from(u8::from(t.is_gap())),
            DimensionSource::Edges => f64::from(u8::from(!t.is_gap())),
            DimensionSource::EdgeProperty { key, gap } => {
                if t.is_gap() {
                    gap.eval(g, t)
                } else {
                    g.edge_props(&t.from, &t.to)
                        .and_then(|p| p.get(key))
                        .and_then(PropertyValue::as_f64)
                        .unwrap_or(0.0)
                }
            }
            DimensionSource::NodesWith { key, value } => {
                let hit = g
                    .node_property(&t.to, key)
                    .is_some_and(|v| json_matches(v, value));
                f64::from(u8::from(hit))
            }
            DimensionSource::PropertyChanges { key } => {
                let a = g.node_property(&t.from, key);
                let b = g.node_property(&t.to, key);
                f64::from(u8::from(a != b))
            }
            DimensionSource::Distance => g.distance(&t.from, &t.to, COORDINATES).unwrap_or(0.0),
        }
    }

    /// A lower bound on the contribution of any single transition in `g`.
    pub fn min_increment(&self, g: &TypedGraph) -> f64 {
        match self {
            DimensionSource::Steps => 1.0,
            DimensionSource::EdgeProperty { key, gap } => {
                let edge_min = g
                    .edges()
                    .map(|(_, _, p)| p.get(key).and_then(PropertyValue::as_f64).unwrap_or(0.0))
                    .fold(f64::INFINITY, f64::min);
                edge_min.min(gap.min_value())
            }
            _ => 0.0,
        }
    }
}

/// Accumulator summing each dimension's per-transition contribution.
#[derive(Debug, Clone)]
pub struct RuleAccumulator {
    dims: Arc<[DimensionSpec]>,
    names: Arc<[String]>,
}

impl RuleAccumulator {
    pub fn new(dims: Vec<DimensionSpec>) -> Self {
        let names: Arc<[String]> = dims.iter().map(|d| d.name.clone()).collect();
        RuleAccumulator {
            dims: dims.into(),
            names,
        }
    }

    pub fn dimensions(&self) -> &[DimensionSpec] {
        &self.dims
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl Accumulator<VectorAcc> for RuleAccumulator {
    fn initial(&self) -> VectorAcc {
        VectorAcc::zeros(self.names.clone())
    }

    fn step(&self, g: &TypedGraph, previous: &VectorAcc, traversal: &Traversal) -> VectorAcc {
        let mut next = previous.clone();
        if let Some(t) = traversal.last() {
            for (v, d) in next.values.iter_mut().zip(self.dims.iter()) {
                *v += d.source.contribution(g, t);
            }
        }
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
}

impl Comparison {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Eq => "==",
        })
    }
}

/// `dimension op value`. The dimension `length` refers to the traversal
/// length when no accumulation dimension of that name exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub dimension: String,
    pub op: Comparison,
    pub value: f64,
}

impl ThresholdRule {
    pub fn new(dimension: impl Into<String>, op: Comparison, value: f64) -> Self {
        ThresholdRule {
            dimension: dimension.into(),
            op,
            value,
        }
    }

    fn holds(&self, t: &Traversal, acc: &VectorAcc) -> bool {
        let lhs = match acc.get(&self.dimension) {
            Some(v) => v,
            None if self.dimension == LENGTH => t.len() as f64,
            None => return false,
        };
        self.op.holds(lhs, self.value)
    }
}

/// Reserved dimension name for traversal length.
pub const LENGTH: &str = "length";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum TerminateRule {
    AtNode { at_node: NodeId },
    NodeProperty { node_property: String, equals: serde_json::Value },
    Threshold(ThresholdRule),
}

impl TerminateRule {
    fn holds(&self, g: &TypedGraph, t: &Traversal, acc: &VectorAcc) -> bool {
        match self {
            TerminateRule::AtNode { at_node } => t.current_node() == at_node,
            TerminateRule::NodeProperty {
                node_property,
                equals,
            } => g
                .node_property(t.current_node(), node_property)
                .is_some_and(|v| json_matches(v, equals)),
            TerminateRule::Threshold(r) => r.holds(t, acc),
        }
    }
}

/// Prune if any prune rule holds; otherwise terminate if any terminate rule
/// holds; otherwise continue.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleSigma {
    #[serde(default)]
    pub prune_if: Vec<ThresholdRule>,
    #[serde(default)]
    pub terminate_if: Vec<TerminateRule>,
}

impl RuleSigma {
    /// Whether some prune rule bounds traversal length on `g`: a `>`/`>=`
    /// threshold over a dimension that grows by a positive amount on every
    /// transition, or over `length` itself.
    pub fn has_prune_horizon(&self, acc: &RuleAccumulator, g: &TypedGraph) -> bool {
        self.prune_if.iter().any(|r| {
            if !matches!(r.op, Comparison::Gt | Comparison::Ge) || !r.value.is_finite() {
                return false;
            }
            match acc.position(&r.dimension) {
                Some(i) => acc.dimensions()[i].source.min_increment(g) > 0.0,
                None => r.dimension == LENGTH,
            }
        })
    }

    /// Names used by rules that are neither accumulation dimensions nor `length`.
    pub fn unknown_dimensions(&self, acc: &RuleAccumulator) -> Vec<String> {
        let thresholds = self.prune_if.iter().chain(self.terminate_if.iter().filter_map(|r| match r {
            TerminateRule::Threshold(t) => Some(t),
            _ => None,
        }));
        thresholds
            .filter(|r| r.dimension != LENGTH && acc.position(&r.dimension).is_none())
            .map(|r| r.dimension.clone())
            .collect()
    }
}

impl ExplorationPredicate<VectorAcc> for RuleSigma {
    fn decide(&self, g: &TypedGraph, t: &Traversal, acc: &VectorAcc) -> ExplorationDecision {
        if self.prune_if.iter().any(|r| r.holds(t, acc)) {
            ExplorationDecision::Prune
        } else if self.terminate_if.iter().any(|r| r.holds(g, t, acc)) {
            ExplorationDecision::Terminate
        } else {
            ExplorationDecision::Continue
        }
    }
}
