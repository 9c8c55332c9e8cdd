use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::topology::value_to_property;
use super::{from_json, IoError, FORMAT_VERSION};
use crate::acceptability::{
    AcceptAll, CompositeDomain, Conjunction, DomainProvider, EmptyDomain, GapPredicate, HasAvailablePorts,
    MaxDistance, PropertyCompatible, PropertyEquals, PropertyInDomain, ScopeDomain, SpatialDomain,
};
use crate::accumulation::{AccumulationState, VectorAcc};
use crate::analysis::{sweep, AnalysisError, SweepResult, SweepSpec};
use crate::engine::{SearchConfig, DEFAULT_SAFETY_CAP};
use crate::frontier::FrontierPolicy;
use crate::graph::{NodeId, PropertyValue, TypedGraph, NODE_TYPE};
use crate::rules::{Comparison, DimensionSpec, RuleAccumulator, RuleSigma, TerminateRule, ThresholdRule};
use crate::scenarios::node_types::{ODF, SERVER};
use crate::scenarios::{
    datacenter_config, telco_config, DatacenterAccumulation, DatacenterPolicy, GapScope, TelcoAccumulation,
    TelcoPolicy, Tier,
};

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Telco,
    Datacenter,
    Custom,
}

/// On-disk policy: one scenario section, plus optional frontier, safety cap
/// and sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telco: Option<TelcoPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datacenter: Option<DatacenterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<FrontierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnyType {
    Any,
}

/// `"any"` or a list of `node_type` values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeTypeFilter {
    Any(AnyType),
    Only(Vec<String>),
}

/// Tier defaults, with any field overridable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatacenterSection {
    pub tier: Tier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gaps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_row_changes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_scope: Option<GapScope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_node_types: Option<NodeTypeFilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<NodeId>,
}

impl DatacenterSection {
    pub fn resolve(&self) -> DatacenterPolicy {
        let mut p = DatacenterPolicy::for_tier(self.tier);
        if let Some(v) = self.max_gaps {
            p.max_gaps = v;
        }
        if let Some(v) = self.max_row_changes {
            p.max_row_changes = v;
        }
        if let Some(v) = self.gap_scope {
            p.gap_scope = v;
        }
        match &self.gap_node_types {
            Some(NodeTypeFilter::Any(_)) => p.gap_node_types = None,
            Some(NodeTypeFilter::Only(types)) => p.gap_node_types = Some(types.clone()),
            None => {}
        }
        p.target = self.target.clone();
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Empty,
    /// Nodes sharing the value of `key`.
    Scope { key: String },
    /// Nodes within `radius_m` by the coordinates property.
    Spatial {
        radius_m: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        key: Option<String>,
    },
    /// Nodes whose `key` is one of `values`.
    PropertyIn { key: String, values: Vec<Value> },
    Intersection { parts: Vec<DomainSpec> },
    Union { parts: Vec<DomainSpec> },
}

impl DomainSpec {
    pub fn build(&self, g: &TypedGraph) -> Result<Box<dyn DomainProvider>, IoError> {
        let schema = |message: String| IoError::Schema {
            field: "custom.domain".into(),
            message,
        };
        Ok(match self {
            DomainSpec::Empty => Box::new(EmptyDomain),
            DomainSpec::Scope { key } => Box::new(ScopeDomain::new(g, key.as_str())),
            DomainSpec::Spatial { radius_m, key } => {
                let d = match key {
                    Some(k) => SpatialDomain::with_key(g, *radius_m, k.as_str()),
                    None => SpatialDomain::new(g, *radius_m),
                };
                Box::new(d.map_err(|e| schema(e.to_string()))?)
            }
            DomainSpec::PropertyIn { key, values } => {
                let values: Vec<PropertyValue> = values
                    .iter()
                    .map(|v| value_to_property("custom.domain.values", v))
                    .collect::<Result<_, _>>()?;
                Box::new(PropertyInDomain::new(g, key.as_str(), &values))
            }
            DomainSpec::Intersection { parts } => Box::new(CompositeDomain::intersection(
                parts.iter().map(|p| p.build(g)).collect::<Result<_, _>>()?,
            )),
            DomainSpec::Union { parts } => Box::new(CompositeDomain::union(
                parts.iter().map(|p| p.build(g)).collect::<Result<_, _>>()?,
            )),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredicateSpec {
    AcceptAll,
    /// Endpoints strictly closer than `limit_m`.
    MaxDistance { limit_m: f64 },
    PropertyEquals { key: String },
    /// Equal values, or a listed pair in either order.
    PropertyCompatible {
        key: String,
        #[serde(default)]
        pairs: Vec<(String, String)>,
    },
    HasAvailablePorts {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        key: Option<String>,
    },
    All { parts: Vec<PredicateSpec> },
}

impl PredicateSpec {
    pub fn build(&self) -> Box<dyn GapPredicate> {
        match self {
            PredicateSpec::AcceptAll => Box::new(AcceptAll),
            PredicateSpec::MaxDistance { limit_m } => Box::new(MaxDistance::new(*limit_m)),
            PredicateSpec::PropertyEquals { key } => Box::new(PropertyEquals::new(key.as_str())),
            PredicateSpec::PropertyCompatible { key, pairs } => {
                Box::new(PropertyCompatible::with_pairs(key.as_str(), pairs.iter().cloned()))
            }
            PredicateSpec::HasAvailablePorts { key } => Box::new(match key {
                Some(k) => HasAvailablePorts { key: k.clone() },
                None => HasAvailablePorts::default(),
            }),
            PredicateSpec::All { parts } => Box::new(Conjunction(parts.iter().map(PredicateSpec::build).collect())),
        }
    }
}

fn empty_domain() -> DomainSpec {
    DomainSpec::Empty
}

fn accept_all() -> PredicateSpec {
    PredicateSpec::AcceptAll
}

/// Declarative parametrization: additive dimensions and threshold rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPolicy {
    #[serde(default = "empty_domain")]
    pub domain: DomainSpec,
    #[serde(default = "accept_all")]
    pub predicate: PredicateSpec,
    pub dimensions: Vec<DimensionSpec>,
    #[serde(default)]
    pub prune_if: Vec<ThresholdRule>,
    #[serde(default)]
    pub terminate_if: Vec<TerminateRule>,
}

impl CustomPolicy {
    pub fn sigma(&self) -> RuleSigma {
        RuleSigma {
            prune_if: self.prune_if.clone(),
            terminate_if: self.terminate_if.clone(),
        }
    }

    fn validate(&self) -> Result<RuleAccumulator, IoError> {
        let mut seen = std::collections::BTreeSet::new();
        for d in &self.dimensions {
            if !seen.insert(d.name.as_str()) {
                return Err(IoError::Schema {
                    field: "custom.dimensions".into(),
                    message: format!("dimension `{}` declared twice", d.name),
                });
            }
        }
        let acc = RuleAccumulator::new(self.dimensions.clone());
        let unknown = self.sigma().unknown_dimensions(&acc);
        if !unknown.is_empty() {
            return Err(IoError::Schema {
                field: "custom".into(),
                message: format!("rules use undeclared dimensions: {}", unknown.join(", ")),
            });
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierKind {
    Fifo,
    Lifo,
    Priority,
    Beam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierSpec {
    pub kind: FrontierKind,
    /// Dimension ranked ascending; defaults to the scenario's main cost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub budgets: Vec<f64>,
    /// Defaults to every ordered ODF pair (telco) or every server/upstream
    /// pair (datacenter).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(NodeId, NodeId)>>,
    /// Custom scenarios: the prune-rule dimension whose threshold is swept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<String>,
    #[serde(default = "yes")]
    pub reuse_monotone: bool,
}

fn yes() -> bool {
    true
}

/// Per-invocation choices layered over the policy file.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub from: NodeId,
    pub to: Option<NodeId>,
    pub frontier: Option<FrontierKind>,
    /// Explicit cap; takes precedence over the policy file's.
    pub safety_cap: Option<usize>,
    /// Used when neither the request nor the policy sets a cap.
    pub default_safety_cap: Option<usize>,
}

impl SearchRequest {
    pub fn new(from: impl Into<NodeId>) -> Self {
        SearchRequest {
            from: from.into(),
            to: None,
            frontier: None,
            safety_cap: None,
            default_safety_cap: None,
        }
    }

    pub fn to(mut self, to: impl Into<NodeId>) -> Self {
        self.to = Some(to.into());
        self
    }
}

/// A search config for whichever accumulation type the scenario uses.
#[derive(Debug, Clone)]
pub enum ScenarioSearch {
    Telco(SearchConfig<TelcoAccumulation>),
    Datacenter(SearchConfig<DatacenterAccumulation>),
    Custom(SearchConfig<VectorAcc>),
}

/// Runs `$body` with `$cfg` bound to the inner config, whatever its type.
#[macro_export]
macro_rules! with_scenario {
    ($search:expr, $cfg:ident => $body:expr) => {
        match $search {
            $crate::io::ScenarioSearch::Telco($cfg) => $body,
            $crate::io::ScenarioSearch::Datacenter($cfg) => $body,
            $crate::io::ScenarioSearch::Custom($cfg) => $body,
        }
    };
}

fn frontier_for<A: AccumulationState>(
    spec: Option<&FrontierSpec>,
    override_kind: Option<FrontierKind>,
    default_key: &str,
    sample: &A,
) -> Result<FrontierPolicy<A>, IoError> {
    let kind = override_kind.or(spec.map(|s| s.kind)).unwrap_or(FrontierKind::Fifo);
    let key = spec.and_then(|s| s.key.clone()).unwrap_or_else(|| default_key.to_string());
    let schema = |message: String| IoError::Schema {
        field: "frontier".into(),
        message,
    };
    let rank = || -> Result<Arc<dyn Fn(&A) -> f64 + Send + Sync>, IoError> {
        if sample.dimension(&key).is_none() {
            return Err(schema(format!("unknown frontier key `{key}`")));
        }
        let key = key.clone();
        Ok(Arc::new(move |a: &A| a.dimension(&key).unwrap_or(f64::INFINITY)))
    };
    Ok(match kind {
        FrontierKind::Fifo => FrontierPolicy::Fifo,
        FrontierKind::Lifo => FrontierPolicy::Lifo,
        FrontierKind::Priority => FrontierPolicy::Priority(rank()?),
        FrontierKind::Beam => {
            let width = spec
                .and_then(|s| s.width)
                .ok_or_else(|| schema("beam frontier needs a width".into()))?;
            if width == 0 {
                return Err(schema("beam width must be positive".into()));
            }
            FrontierPolicy::Beam { width, key: rank()? }
        }
    })
}

fn missing(section: &str) -> IoError {
    IoError::Schema {
        field: section.into(),
        message: "section required by the scenario kind is missing".into(),
    }
}

impl PolicyDocument {
    pub fn telco(policy: TelcoPolicy) -> Self {
        PolicyDocument {
            format_version: FORMAT_VERSION,
            scenario: ScenarioKind::Telco,
            telco: Some(policy),
            datacenter: None,
            custom: None,
            frontier: None,
            safety_cap: None,
            sweep: None,
        }
    }

    pub fn datacenter(section: DatacenterSection) -> Self {
        PolicyDocument {
            scenario: ScenarioKind::Datacenter,
            telco: None,
            datacenter: Some(section),
            ..Self::telco(TelcoPolicy::default())
        }
    }

    pub fn custom(custom: CustomPolicy) -> Self {
        PolicyDocument {
            scenario: ScenarioKind::Custom,
            telco: None,
            custom: Some(custom),
            ..Self::telco(TelcoPolicy::default())
        }
    }

    /// Checks everything that does not depend on a topology.
    pub fn validate(&self) -> Result<(), IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Schema {
                field: "format_version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            });
        }
        let present = [
            (ScenarioKind::Telco, "telco", self.telco.is_some()),
            (ScenarioKind::Datacenter, "datacenter", self.datacenter.is_some()),
            (ScenarioKind::Custom, "custom", self.custom.is_some()),
        ];
        for (kind, name, there) in present {
            if kind == self.scenario && !there {
                return Err(missing(name));
            }
            if kind != self.scenario && there {
                return Err(IoError::Schema {
                    field: name.into(),
                    message: format!("section does not match scenario `{:?}`", self.scenario).to_lowercase(),
                });
            }
        }
        if let Some(c) = &self.custom {
            c.validate()?;
        }
        if self.safety_cap == Some(0) {
            return Err(IoError::Schema {
                field: "safety_cap".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }

    /// Dimension names of the scenario's accumulation, in report order.
    pub fn dimension_names(&self) -> Vec<String> {
        match self.scenario {
            ScenarioKind::Telco => TelcoAccumulation::default().dimensions(),
            ScenarioKind::Datacenter => DatacenterAccumulation::default().dimensions(),
            ScenarioKind::Custom => self
                .custom
                .as_ref()
                .map(|c| c.dimensions.iter().map(|d| (d.name.clone(), 0.0)).collect())
                .unwrap_or_default(),
        }
        .into_iter()
        .map(|(n, _)| n)
        .collect()
    }

    /// Upper limits the scenario's exploration predicate enforces, by dimension.
    pub fn limits(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match self.scenario {
            ScenarioKind::Telco => {
                if let Some(p) = &self.telco {
                    out.insert("total_attenuation_db".into(), p.attenuation_budget_db);
                    out.insert("gap_count".into(), f64::from(p.max_gaps));
                    out.insert("amplifier_count".into(), f64::from(p.max_amplifiers));
                }
            }
            ScenarioKind::Datacenter => {
                if let Some(s) = &self.datacenter {
                    let p = s.resolve();
                    out.insert("gap_count".into(), f64::from(p.max_gaps));
                    out.insert("row_changes".into(), f64::from(p.max_row_changes));
                }
            }
            ScenarioKind::Custom => {
                for r in self.custom.iter().flat_map(|c| &c.prune_if) {
                    if matches!(r.op, Comparison::Gt) {
                        let e = out.entry(r.dimension.clone()).or_insert(r.value);
                        *e = e.min(r.value);
                    }
                }
            }
        }
        out
    }

    fn cap(&self, req: &SearchRequest) -> Option<usize> {
        req.safety_cap
            .or(self.safety_cap)
            .or(req.default_safety_cap)
            .or(Some(DEFAULT_SAFETY_CAP))
    }

    fn custom_config(
        &self,
        graph: Arc<TypedGraph>,
        from: &NodeId,
        custom: &CustomPolicy,
        req: &SearchRequest,
    ) -> Result<SearchConfig<VectorAcc>, IoError> {
        let acc = custom.validate()?;
        let sigma = custom.sigma();
        if !sigma.has_prune_horizon(&acc, &graph) && req.safety_cap.is_none() && self.safety_cap.is_none() {
            return Err(IoError::NoPruneHorizon);
        }
        if !graph.contains(from) {
            return Err(IoError::Graph(crate::graph::GraphError::UnknownNode(from.clone())));
        }
        let domain: Arc<dyn DomainProvider> = Arc::from(custom.domain.build(&graph)?);
        let predicate: Arc<dyn GapPredicate> = Arc::from(custom.predicate.build());
        let sample = acc_sample(&acc);
        let default_key = acc.names().first().cloned().unwrap_or_default();
        let frontier = frontier_for(self.frontier.as_ref(), req.frontier, &default_key, &sample)?;
        let mut cfg = SearchConfig::new(graph, from.clone(), acc, sigma)
            .with_frontier(frontier)
            .with_safety_cap(self.cap(req));
        cfg.domain = domain;
        cfg.predicate = predicate;
        Ok(cfg)
    }

    /// Builds the search for `req` on `graph`. `req.to` overrides the
    /// policy's target; for custom policies it replaces the terminate rules
    /// with "terminate at `to`".
    pub fn search_config(&self, graph: Arc<TypedGraph>, req: &SearchRequest) -> Result<ScenarioSearch, IoError> {
        self.validate()?;
        let cap = self.cap(req);
        Ok(match self.scenario {
            ScenarioKind::Telco => {
                let mut p = self.telco.clone().ok_or_else(|| missing("telco"))?;
                if let Some(t) = &req.to {
                    p.target = Some(t.clone());
                }
                let frontier = frontier_for(
                    self.frontier.as_ref(),
                    req.frontier,
                    "total_attenuation_db",
                    &TelcoAccumulation::default(),
                )?;
                let cfg = telco_config(graph, &req.from, &p)?;
                ScenarioSearch::Telco(cfg.with_frontier(frontier).with_safety_cap(cap))
            }
            ScenarioKind::Datacenter => {
                let mut p = self.datacenter.as_ref().ok_or_else(|| missing("datacenter"))?.resolve();
                if let Some(t) = &req.to {
                    p.target = Some(t.clone());
                }
                let frontier = frontier_for(
                    self.frontier.as_ref(),
                    req.frontier,
                    "gap_count",
                    &DatacenterAccumulation::default(),
                )?;
                let cfg = datacenter_config(graph, &req.from, &p)?;
                ScenarioSearch::Datacenter(cfg.with_frontier(frontier).with_safety_cap(cap))
            }
            ScenarioKind::Custom => {
                let mut custom = self.custom.clone().ok_or_else(|| missing("custom"))?;
                if let Some(t) = &req.to {
                    if !graph.contains(t) {
                        return Err(IoError::Graph(crate::graph::GraphError::UnknownNode(t.clone())));
                    }
                    custom.terminate_if = vec![TerminateRule::AtNode { at_node: t.clone() }];
                }
                ScenarioSearch::Custom(self.custom_config(graph, &req.from, &custom, req)?)
            }
        })
    }

    fn default_pairs(&self, g: &TypedGraph) -> Vec<(NodeId, NodeId)> {
        let with_type = |t: &str| -> Vec<NodeId> {
            g.nodes()
                .iter()
                .filter(|n| g.node_property(n, NODE_TYPE).and_then(PropertyValue::as_str) == Some(t))
                .cloned()
                .collect()
        };
        match self.scenario {
            ScenarioKind::Telco => {
                let odfs = with_type(ODF);
                odfs.iter()
                    .flat_map(|s| odfs.iter().filter(move |t| *t != s).map(move |t| (s.clone(), t.clone())))
                    .collect()
            }
            ScenarioKind::Datacenter => {
                let upstream: Vec<NodeId> = g
                    .nodes()
                    .iter()
                    .filter(|n| g.node_property(n, "upstream").and_then(PropertyValue::as_bool) == Some(true))
                    .cloned()
                    .collect();
                with_type(SERVER)
                    .into_iter()
                    .flat_map(|s| upstream.iter().map(move |t| (s.clone(), t.clone())))
                    .collect()
            }
            ScenarioKind::Custom => Vec::new(),
        }
    }

    /// Runs the sweep section. The budget replaces the attenuation budget
    /// (telco), the gap allowance (datacenter, rounded down) or the `>`
    /// thresholds on `sweep.dimension` (custom).
    pub fn run_sweep(&self, graph: Arc<TypedGraph>, default_safety_cap: Option<usize>) -> Result<SweepResult, IoError> {
        self.validate()?;
        let section = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
        let pairs = section.pairs.clone().unwrap_or_else(|| self.default_pairs(&graph));
        for (s, t) in &pairs {
            for n in [s, t] {
                if !graph.contains(n) {
                    return Err(IoError::Graph(crate::graph::GraphError::UnknownNode(n.clone())));
                }
            }
        }
        let budgets = section.budgets.clone();
        let mut req = SearchRequest::new("");
        req.default_safety_cap = default_safety_cap;
        let doc = self.clone();
        let result = match self.scenario {
            ScenarioKind::Telco => {
                let spec = SweepSpec::new(budgets, pairs, move |s, t, b| {
                    let mut d = doc.clone();
                    if let Some(p) = d.telco.as_mut() {
                        p.attenuation_budget_db = b;
                    }
                    match d.search_config(graph.clone(), &SearchRequest { from: s.clone(), to: Some(t.clone()), ..req.clone() }) {
                        Ok(ScenarioSearch::Telco(c)) => Ok(c),
                        Ok(_) => unreachable!("telco policy"),
                        Err(e) => Err(e.to_string()),
                    }
                });
                run(spec, section.reuse_monotone)
            }
            ScenarioKind::Datacenter => {
                let spec = SweepSpec::new(budgets, pairs, move |s, t, b| {
                    let mut d = doc.clone();
                    if let Some(p) = d.datacenter.as_mut() {
                        p.max_gaps = Some(b.max(0.0).floor() as u32);
                    }
                    match d.search_config(graph.clone(), &SearchRequest { from: s.clone(), to: Some(t.clone()), ..req.clone() }) {
                        Ok(ScenarioSearch::Datacenter(c)) => Ok(c),
                        Ok(_) => unreachable!("datacenter policy"),
                        Err(e) => Err(e.to_string()),
                    }
                });
                run(spec, section.reuse_monotone)
            }
            ScenarioKind::Custom => {
                let dim = section.dimension.clone().ok_or_else(|| IoError::Schema {
                    field: "sweep.dimension".into(),
                    message: "custom sweeps must name the swept dimension".into(),
                })?;
                let custom = self.custom.as_ref().ok_or_else(|| missing("custom"))?;
                if !custom.prune_if.iter().any(|r| r.dimension == dim && r.op == Comparison::Gt) {
                    return Err(IoError::Schema {
                        field: "sweep.dimension".into(),
                        message: format!("no `{dim} > value` prune rule to sweep"),
                    });
                }
                let spec = SweepSpec::new(budgets, pairs, move |s, t, b| {
                    let mut d = doc.clone();
                    if let Some(c) = d.custom.as_mut() {
                        for r in c.prune_if.iter_mut().filter(|r| r.dimension == dim && r.op == Comparison::Gt) {
                            r.value = b;
                        }
                    }
                    match d.search_config(graph.clone(), &SearchRequest { from: s.clone(), to: Some(t.clone()), ..req.clone() }) {
                        Ok(ScenarioSearch::Custom(c)) => Ok(c),
                        Ok(_) => unreachable!("custom policy"),
                        Err(e) => Err(e.to_string()),
                    }
                });
                run(spec, section.reuse_monotone)
            }
        };
        result.map_err(IoError::from)
    }
}

fn run<A: AccumulationState>(mut spec: SweepSpec<A>, reuse: bool) -> Result<SweepResult, AnalysisError> {
    spec.reuse_monotone = reuse;
    sweep(&spec)
}

fn acc_sample(acc: &RuleAccumulator) -> VectorAcc {
    use crate::accumulation::Accumulator;
    acc.initial()
}

pub fn parse_policy(text: &str) -> Result<PolicyDocument, IoError> {
    let doc: PolicyDocument = from_json(text)?;
    doc.validate()?;
    Ok(doc)
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<PolicyDocument, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_policy(&text)
}
