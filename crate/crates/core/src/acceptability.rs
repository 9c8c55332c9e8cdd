//! Gap candidate generation and gap validation.
//!
//! A [`DomainProvider`] produces the cheap, indexable candidate set for a
//! node; a [`GapPredicate`] decides each candidate pair. The engine only asks
//! the predicate about pairs the domain produced.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph::{euclidean, GraphError, NodeId, PropertyValue, TypedGraph, COORDINATES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcceptabilityError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("node `{0}` has no coordinates")]
    MissingCoordinates(NodeId),
    #[error("node `{node}` lacks property `{key}`")]
    MissingProperty { node: NodeId, key: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<GraphError> for AcceptabilityError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownNode(n) => AcceptabilityError::UnknownNode(n),
            other => AcceptabilityError::InvalidParameter(other.to_string()),
        }
    }
}

/// Produces the finite gap-candidate set of a node.
///
/// Implementations must return a sorted, duplicate-free list that never
/// contains `n` itself, and must be deterministic.
pub trait DomainProvider: fmt::Debug + Send + Sync {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError>;
}

/// Decides whether a gap between two nodes is acceptable. Must be pure.
pub trait GapPredicate: fmt::Debug + Send + Sync {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError>;
}

/// No gap candidates anywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyDomain;

impl DomainProvider for EmptyDomain {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError> {
        g.require(n)?;
        Ok(Vec::new())
    }
}

/// Every node sharing the value of `key` with the query node. Nodes without
/// the key have no candidates.
#[derive(Debug, Clone)]
pub struct ScopeDomain {
    key: String,
    groups: HashMap<String, Vec<NodeId>>,
}

impl ScopeDomain {
    pub fn new(g: &TypedGraph, key: impl Into<String>) -> Self {
        let key = key.into();
        let mut groups: HashMap<String, Vec<NodeId>> = HashMap::new();
        for id in g.nodes() {
            if let Some(v) = g.node_property(id, &key) {
                groups.entry(v.scope_key()).or_default().push(id.clone());
            }
        }
        ScopeDomain { key, groups }
    }

    pub fn key(&self) -> &str {
        &self.key
    }
}

impl DomainProvider for ScopeDomain {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError> {
        g.require(n)?;
        let Some(value) = g.node_property(n, &self.key) else {
            return Ok(Vec::new());
        };
        // Group members were collected in sorted node order.
        Ok(self
            .groups
            .get(&value.scope_key())
            .map(|members| members.iter().filter(|m| *m != n).cloned().collect())
            .unwrap_or_default())
    }
}

/// All nodes whose property `key` takes one of the listed values, regardless
/// of the query node. Mostly useful inside a [`CompositeDomain`].
#[derive(Debug, Clone)]
pub struct PropertyInDomain {
    key: String,
    members: Vec<NodeId>,
}

impl PropertyInDomain {
    pub fn new(g: &TypedGraph, key: impl Into<String>, values: &[PropertyValue]) -> Self {
        let key = key.into();
        let members = g
            .nodes()
            .iter()
            .filter(|id| {
                g.node_property(id, &key)
                    .is_some_and(|v| values.iter().any(|w| w == v))
            })
            .cloned()
            .collect();
        PropertyInDomain { key, members }
    }

    pub fn key(&self) -> &str {
        &self.key
    }
}

impl DomainProvider for PropertyInDomain {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError> {
        g.require(n)?;
        Ok(self.members.iter().filter(|m| *m != n).cloned().collect())
    }
}

/// Nodes within `radius_m` (inclusive) of the query node, found through a
/// uniform grid whose cell side equals the radius.
#[derive(Debug, Clone)]
pub struct SpatialDomain {
    radius: f64,
    cell: f64,
    key: String,
    cells: HashMap<(i64, i64), Vec<(NodeId, [f64; 2])>>,
}

impl SpatialDomain {
    pub fn new(g: &TypedGraph, radius_m: f64) -> Result<Self, AcceptabilityError> {
        Self::with_key(g, radius_m, COORDINATES)
    }

    pub fn with_key(
        g: &TypedGraph,
        radius_m: f64,
        key: impl Into<String>,
    ) -> Result<Self, AcceptabilityError> {
        if !(radius_m.is_finite() && radius_m >= 0.0) {
            return Err(AcceptabilityError::InvalidParameter(format!(
                "spatial radius must be finite and non-negative, got {radius_m}"
            )));
        }
        let key = key.into();
        // A zero radius still needs a positive cell size; only exact
        // coincidences match in that case.
        let cell = if radius_m > 0.0 { radius_m } else { 1.0 };
        let mut cells: HashMap<(i64, i64), Vec<(NodeId, [f64; 2])>> = HashMap::new();
        for id in g.nodes() {
            if let Some(p) = g.node_property(id, &key).and_then(PropertyValue::as_coordinates) {
                cells
                    .entry(cell_of(p, cell))
                    .or_default()
                    .push((id.clone(), p));
            }
        }
        Ok(SpatialDomain {
            radius: radius_m,
            cell,
            key,
            cells,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

fn cell_of(p: [f64; 2], cell: f64) -> (i64, i64) {
    ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
}

impl DomainProvider for SpatialDomain {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError> {
        g.require(n)?;
        let p = g
            .node_property(n, &self.key)
            .and_then(PropertyValue::as_coordinates)
            .ok_or_else(|| AcceptabilityError::MissingCoordinates(n.clone()))?;
        let (cx, cy) = cell_of(p, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                out.extend(
                    bucket
                        .iter()
                        .filter(|(m, q)| m != n && euclidean(p, *q) <= self.radius)
                        .map(|(m, _)| m.clone()),
                );
            }
        }
        out.sort();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Intersection,
    Union,
}

/// Intersection or union of several providers.
#[derive(Debug)]
pub struct CompositeDomain {
    op: SetOp,
    parts: Vec<Box<dyn DomainProvider>>,
}

impl CompositeDomain {
    pub fn intersection(parts: Vec<Box<dyn DomainProvider>>) -> Self {
        CompositeDomain {
            op: SetOp::Intersection,
            parts,
        }
    }

    pub fn union(parts: Vec<Box<dyn DomainProvider>>) -> Self {
        CompositeDomain {
            op: SetOp::Union,
            parts,
        }
    }
}

impl DomainProvider for CompositeDomain {
    fn candidates(&self, g: &TypedGraph, n: &NodeId) -> Result<Vec<NodeId>, AcceptabilityError> {
        g.require(n)?;
        let mut parts = self.parts.iter();
        let Some(first) = parts.next() else {
            return Ok(Vec::new());
        };
        let mut acc: BTreeSet<NodeId> = first.candidates(g, n)?.into_iter().collect();
        for p in parts {
            let next: BTreeSet<NodeId> = p.candidates(g, n)?.into_iter().collect();
            acc = match self.op {
                SetOp::Intersection => acc.intersection(&next).cloned().collect(),
                SetOp::Union => acc.union(&next).cloned().collect(),
            };
        }
        Ok(acc.into_iter().collect())
    }
}

/// Accepts every candidate pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptAll;

impl GapPredicate for AcceptAll {
    fn accepts(&self, _: &TypedGraph, _: &NodeId, _: &NodeId) -> Result<bool, AcceptabilityError> {
        Ok(true)
    }
}

/// True iff the endpoints are strictly closer than `limit_m`.
#[derive(Debug, Clone)]
pub struct MaxDistance {
    pub limit_m: f64,
    pub key: String,
}

impl MaxDistance {
    pub fn new(limit_m: f64) -> Self {
        MaxDistance {
            limit_m,
            key: COORDINATES.to_string(),
        }
    }
}

impl GapPredicate for MaxDistance {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError> {
        let pn = coords(g, n, &self.key)?;
        let pm = coords(g, m, &self.key)?;
        Ok(euclidean(pn, pm) < self.limit_m)
    }
}

fn coords(g: &TypedGraph, n: &NodeId, key: &str) -> Result<[f64; 2], AcceptabilityError> {
    g.require(n)?;
    g.node_property(n, key)
        .and_then(PropertyValue::as_coordinates)
        .ok_or_else(|| AcceptabilityError::MissingProperty {
            node: n.clone(),
            key: key.to_string(),
        })
}

fn property<'g>(
    g: &'g TypedGraph,
    n: &NodeId,
    key: &str,
) -> Result<&'g PropertyValue, AcceptabilityError> {
    g.require(n)?;
    g.node_property(n, key)
        .ok_or_else(|| AcceptabilityError::MissingProperty {
            node: n.clone(),
            key: key.to_string(),
        })
}

/// Both endpoints carry the same value for `key`.
#[derive(Debug, Clone)]
pub struct PropertyEquals {
    pub key: String,
}

impl PropertyEquals {
    pub fn new(key: impl Into<String>) -> Self {
        PropertyEquals { key: key.into() }
    }
}

impl GapPredicate for PropertyEquals {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError> {
        Ok(property(g, n, &self.key)? == property(g, m, &self.key)?)
    }
}

/// Endpoint values of `key` are compatible: equal values always are, and
/// any extra pairs listed in the (symmetric) table are too.
#[derive(Debug, Clone)]
pub struct PropertyCompatible {
    pub key: String,
    table: BTreeSet<(String, String)>,
}

impl PropertyCompatible {
    pub fn new(key: impl Into<String>) -> Self {
        PropertyCompatible {
            key: key.into(),
            table: BTreeSet::new(),
        }
    }

    pub fn with_pairs<I, A, B>(key: impl Into<String>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut table = BTreeSet::new();
        for (a, b) in pairs {
            let (a, b) = (a.into(), b.into());
            table.insert((b.clone(), a.clone()));
            table.insert((a, b));
        }
        PropertyCompatible {
            key: key.into(),
            table,
        }
    }
}

impl GapPredicate for PropertyCompatible {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError> {
        let a = property(g, n, &self.key)?;
        let b = property(g, m, &self.key)?;
        if a == b {
            return Ok(true);
        }
        Ok(self.table.contains(&(a.to_string(), b.to_string())))
    }
}

/// Both endpoints have `available_ports > 0`.
#[derive(Debug, Clone)]
pub struct HasAvailablePorts {
    pub key: String,
}

impl Default for HasAvailablePorts {
    fn default() -> Self {
        HasAvailablePorts {
            key: "available_ports".to_string(),
        }
    }
}

impl GapPredicate for HasAvailablePorts {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError> {
        let free = |x: &NodeId| -> Result<bool, AcceptabilityError> {
            let v = property(g, x, &self.key)?;
            v.as_f64()
                .map(|p| p > 0.0)
                .ok_or_else(|| AcceptabilityError::MissingProperty {
                    node: x.clone(),
                    key: self.key.clone(),
                })
        };
        Ok(free(n)? && free(m)?)
    }
}

/// All parts must accept. Short-circuits left to right.
#[derive(Debug)]
pub struct Conjunction(pub Vec<Box<dyn GapPredicate>>);

impl GapPredicate for Conjunction {
    fn accepts(&self, g: &TypedGraph, n: &NodeId, m: &NodeId) -> Result<bool, AcceptabilityError> {
        for p in &self.0 {
            if !p.accepts(g, n, m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{props, PropertyBag};

    fn n(s: &str) -> NodeId {
        NodeId::new(s)
    }

    fn at(x: f64, y: f64) -> PropertyBag {
        props([(COORDINATES, PropertyValue::Coordinates([x, y]))])
    }

    fn points(ps: &[(&str, f64, f64)]) -> TypedGraph {
        TypedGraph::build(
            ps.iter().map(|&(id, x, y)| (n(id), at(x, y))).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn empty_domain_has_no_candidates() {
        let g = points(&[("a", 0.0, 0.0), ("b", 1.0, 0.0)]);
        assert!(EmptyDomain.candidates(&g, &n("a")).unwrap().is_empty());
        assert_eq!(
            EmptyDomain.candidates(&g, &n("zz")),
            Err(AcceptabilityError::UnknownNode(n("zz")))
        );
    }

    #[test]
    fn scope_domain_matches_linear_scan() {
        let sites = [("A", "S0"), ("B", "S1"), ("C", "S1"), ("D", "S2")];
        let g = TypedGraph::build(
            sites.iter().map(|(id, s)| (n(id), props([("site", *s)]))).collect(),
            vec![],
        )
        .unwrap();
        let dom = ScopeDomain::new(&g, "site");
        for (id, site) in sites {
            let scan: Vec<NodeId> = sites
                .iter()
                .filter(|(o, s)| *o != id && *s == site)
                .map(|(o, _)| n(o))
                .collect();
            assert_eq!(dom.candidates(&g, &n(id)).unwrap(), scan);
        }
        assert_eq!(dom.candidates(&g, &n("B")).unwrap(), vec![n("C")]);
    }

    #[test]
    fn spatial_domain_inclusive_radius() {
        let g = points(&[("p0", 0.0, 0.0), ("p1", 0.0, 50.0), ("p2", 0.0, 150.0), ("p3", 100.0, 0.0)]);
        let dom = SpatialDomain::new(&g, 100.0).unwrap();
        // p3 is exactly on the radius and included; p2 is outside.
        assert_eq!(dom.candidates(&g, &n("p0")).unwrap(), vec![n("p1"), n("p3")]);

        let g = points(&[("p0", 0.0, 0.0), ("p1", 0.0, 50.0), ("p2", 0.0, 150.0)]);
        let dom = SpatialDomain::new(&g, 100.0).unwrap();
        assert_eq!(dom.candidates(&g, &n("p0")).unwrap(), vec![n("p1")]);
    }

    #[test]
    fn spatial_domain_missing_coordinates() {
        let g = TypedGraph::build(vec![(n("x"), PropertyBag::new())], vec![]).unwrap();
        let dom = SpatialDomain::new(&g, 10.0).unwrap();
        assert_eq!(
            dom.candidates(&g, &n("x")),
            Err(AcceptabilityError::MissingCoordinates(n("x")))
        );
        assert!(SpatialDomain::new(&g, -1.0).is_err());
    }

    #[test]
    fn max_distance_is_strict() {
        let g = points(&[("a", 0.0, 0.0), ("b", 0.0, 50.0), ("c", 0.0, 100.0)]);
        let p = MaxDistance::new(100.0);
        assert!(p.accepts(&g, &n("a"), &n("b")).unwrap());
        assert!(!p.accepts(&g, &n("a"), &n("c")).unwrap());
    }

    #[test]
    fn ports_predicate() {
        let g = TypedGraph::build(
            vec![
                (n("a"), props([("available_ports", 1.0)])),
                (n("b"), props([("available_ports", 0.0)])),
                (n("c"), props([("available_ports", 2.0)])),
                (n("d"), PropertyBag::new()),
            ],
            vec![],
        )
        .unwrap();
        let p = HasAvailablePorts::default();
        assert!(!p.accepts(&g, &n("a"), &n("b")).unwrap());
        assert!(p.accepts(&g, &n("a"), &n("c")).unwrap());
        assert_eq!(
            p.accepts(&g, &n("a"), &n("d")),
            Err(AcceptabilityError::MissingProperty {
                node: n("d"),
                key: "available_ports".into()
            })
        );
    }

    #[test]
    fn compatibility_table_is_symmetric() {
        let g = TypedGraph::build(
            vec![
                (n("a"), props([("fiber_type", "G652")])),
                (n("b"), props([("fiber_type", "G657")])),
                (n("c"), props([("fiber_type", "G655")])),
            ],
            vec![],
        )
        .unwrap();
        let same = PropertyCompatible::new("fiber_type");
        assert!(!same.accepts(&g, &n("a"), &n("b")).unwrap());
        let table = PropertyCompatible::with_pairs("fiber_type", [("G652", "G657")]);
        assert!(table.accepts(&g, &n("a"), &n("b")).unwrap());
        assert!(table.accepts(&g, &n("b"), &n("a")).unwrap());
        assert!(!table.accepts(&g, &n("a"), &n("c")).unwrap());
        assert!(PropertyEquals::new("fiber_type").accepts(&g, &n("a"), &n("a")).unwrap());
    }

    #[test]
    fn conjunction_short_circuits_on_false() {
        let g = TypedGraph::build(
            vec![
                (n("a"), at(0.0, 0.0)),
                (n("b"), at(500.0, 0.0)),
            ],
            vec![],
        )
        .unwrap();
        // The second part would fail with MissingProperty if evaluated.
        let p = Conjunction(vec![
            Box::new(MaxDistance::new(100.0)),
            Box::new(PropertyEquals::new("fiber_type")),
        ]);
        assert_eq!(p.accepts(&g, &n("a"), &n("b")), Ok(false));
    }

    mod grid_oracle {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn spatial_equals_brute_force(
                pts in proptest::collection::vec((-500.0f64..500.0, -500.0f64..500.0), 1..60),
                radius in 0.0f64..300.0,
            ) {
                let ids: Vec<String> = (0..pts.len()).map(|i| format!("p{i:03}")).collect();
                let g = TypedGraph::build(
                    ids.iter().zip(&pts).map(|(id, &(x, y))| (n(id), at(x, y))).collect(),
                    vec![],
                ).unwrap();
                let dom = SpatialDomain::new(&g, radius).unwrap();
                for (i, id) in ids.iter().enumerate() {
                    let brute: Vec<NodeId> = ids.iter().zip(&pts).enumerate()
                        .filter(|&(j, (_, &(x, y)))| {
                            j != i && ((x - pts[i].0).powi(2) + (y - pts[i].1).powi(2)).sqrt() <= radius
                        })
                        .map(|(_, (o, _))| n(o))
                        .collect();
                    prop_assert_eq!(dom.candidates(&g, &n(id)).unwrap(), brute);
                }
            }

            #[test]
            fn intersection_is_elementwise(
                sites in proptest::collection::vec(0u8..3, 2..15),
                xs in proptest::collection::vec(0.0f64..200.0, 15),
            ) {
                let ids: Vec<String> = (0..sites.len()).map(|i| format!("p{i:02}")).collect();
                let g = TypedGraph::build(
                    ids.iter().enumerate().map(|(i, id)| {
                        let mut bag = at(xs[i], 0.0);
                        bag.insert("site".into(), PropertyValue::text(format!("S{}", sites[i])));
                        (n(id), bag)
                    }).collect(),
                    vec![],
                ).unwrap();
                let scope = ScopeDomain::new(&g, "site");
                let spatial = SpatialDomain::new(&g, 60.0).unwrap();
                let both = CompositeDomain::intersection(vec![
                    Box::new(ScopeDomain::new(&g, "site")),
                    Box::new(SpatialDomain::new(&g, 60.0).unwrap()),
                ]);
                for id in g.nodes() {
                    let a: BTreeSet<_> = scope.candidates(&g, id).unwrap().into_iter().collect();
                    let b: BTreeSet<_> = spatial.candidates(&g, id).unwrap().into_iter().collect();
                    let expect: Vec<_> = a.intersection(&b).cloned().collect();
                    prop_assert_eq!(both.candidates(&g, id).unwrap(), expect);
                }
            }
        }
    }
}
