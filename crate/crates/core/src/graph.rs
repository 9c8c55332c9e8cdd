//! Immutable typed graph: finite node and directed-edge sets, each carrying a
//! schemaless property bag.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node identifier. Cheap to clone; ordered by its string form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(Arc<str>);

impl NodeId {
    pub fn new(id: impl AsRef<str>) -> Self {
        NodeId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId::new(s)
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(Arc::from(s))
    }
}

/// A single property value.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Text(String),
    Number { value: f64, unit: Option<String> },
    Bool(bool),
    /// Planar position in meters.
    Coordinates([f64; 2]),
}

impl PropertyValue {
    pub fn number(value: f64) -> Self {
        PropertyValue::Number { value, unit: None }
    }

    pub fn with_unit(value: f64, unit: impl Into<String>) -> Self {
        PropertyValue::Number {
            value,
            unit: Some(unit.into()),
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        PropertyValue::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropertyValue::Number { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropertyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_coordinates(&self) -> Option<[f64; 2]> {
        match self {
            PropertyValue::Coordinates(c) => Some(*c),
            _ => None,
        }
    }

    /// Canonical string used when grouping nodes by a property value
    /// (scope keys such as `site` or `rack`).
    pub fn scope_key(&self) -> String {
        match self {
            PropertyValue::Text(s) => format!("s:{s}"),
            PropertyValue::Number { value, .. } => format!("n:{value}"),
            PropertyValue::Bool(b) => format!("b:{b}"),
            PropertyValue::Coordinates([x, y]) => format!("c:{x},{y}"),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Text(s) => f.write_str(s),
            PropertyValue::Number { value, unit: None } => write!(f, "{value}"),
            PropertyValue::Number {
                value,
                unit: Some(u),
            } => write!(f, "{value} {u}"),
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Coordinates([x, y]) => write!(f, "({x}, {y})"),
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_string())
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::number(v)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Bool(b)
    }
}

/// Key/value properties of a node or edge. Keys are unique and ordered.
pub type PropertyBag = BTreeMap<String, PropertyValue>;

/// Convenience constructor for property bags in tests and fixtures.
pub fn props<I, K, V>(items: I) -> PropertyBag
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<PropertyValue>,
{
    items
        .into_iter()
        .map(|(k, v)| (k.into(), v.into()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("edge {from} -> {to} references unknown node `{missing}`")]
    DanglingEdgeEndpoint {
        from: NodeId,
        to: NodeId,
        missing: NodeId,
    },
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("graph has no nodes")]
    EmptyGraph,
}

/// Out-degree summary; `avg_out_degree` is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStats {
    pub avg_out_degree: Ratio<usize>,
    pub max_out_degree: usize,
}

/// A finite directed graph with node and edge property maps.
///
/// Nodes are stored sorted by id, so every index-ordered walk is also
/// id-ordered. The graph cannot be mutated once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedGraph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    node_props: Vec<PropertyBag>,
    edge_props: BTreeMap<(usize, usize), PropertyBag>,
    adjacency: Vec<Vec<NodeId>>,
}

impl TypedGraph {
    /// Validates and builds a graph. Input order does not affect the result.
    pub fn build(
        nodes: Vec<(NodeId, PropertyBag)>,
        edges: Vec<(NodeId, NodeId, PropertyBag)>,
    ) -> Result<Self, GraphError> {
        let mut sorted: BTreeMap<NodeId, PropertyBag> = BTreeMap::new();
        for (id, bag) in nodes {
            if sorted.contains_key(&id) {
                return Err(GraphError::DuplicateNode(id));
            }
            sorted.insert(id, bag);
        }
        let (ids, node_props): (Vec<_>, Vec<_>) = sorted.into_iter().unzip();
        let index: HashMap<NodeId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();

        let mut edge_props = BTreeMap::new();
        for (from, to, bag) in edges {
            let Some(&a) = index.get(&from) else {
                return Err(GraphError::DanglingEdgeEndpoint {
                    missing: from.clone(),
                    from,
                    to,
                });
            };
            let Some(&b) = index.get(&to) else {
                return Err(GraphError::DanglingEdgeEndpoint {
                    missing: to.clone(),
                    from,
                    to,
                });
            };
            if edge_props.insert((a, b), bag).is_some() {
                return Err(GraphError::DuplicateEdge(from, to));
            }
        }

        let mut adjacency = vec![Vec::new(); ids.len()];
        // BTreeMap iteration is sorted by (from, to), hence each list is sorted.
        for &(a, b) in edge_props.keys() {
            adjacency[a].push(ids[b].clone());
        }

        Ok(TypedGraph {
            ids,
            index,
            node_props,
            edge_props,
            adjacency,
        })
    }

    pub fn empty() -> Self {
        TypedGraph::build(Vec::new(), Vec::new()).expect("empty graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_props.len()
    }

    /// Node ids in sorted order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        self.index.contains_key(n)
    }

    pub fn index_of(&self, n: &NodeId) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn require(&self, n: &NodeId) -> Result<usize, GraphError> {
        self.index_of(n)
            .ok_or_else(|| GraphError::UnknownNode(n.clone()))
    }

    pub fn node_props(&self, n: &NodeId) -> Option<&PropertyBag> {
        self.index_of(n).map(|i| &self.node_props[i])
    }

    pub fn node_property(&self, n: &NodeId, key: &str) -> Option<&PropertyValue> {
        self.node_props(n).and_then(|bag| bag.get(key))
    }

    pub fn has_edge(&self, from: &NodeId, to: &NodeId) -> bool {
        self.edge_props(from, to).is_some()
    }

    pub fn edge_props(&self, from: &NodeId, to: &NodeId) -> Option<&PropertyBag> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        self.edge_props.get(&(a, b))
    }

    /// All edges sorted by (from, to).
    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId, &PropertyBag)> + '_ {
        self.edge_props
            .iter()
            .map(move |(&(a, b), bag)| (&self.ids[a], &self.ids[b], bag))
    }

    /// Sorted, duplicate-free out-neighbors of `n`.
    pub fn out_neighbors(&self, n: &NodeId) -> Result<&[NodeId], GraphError> {
        let i = self.require(n)?;
        Ok(&self.adjacency[i])
    }

    pub fn degree_stats(&self) -> Result<DegreeStats, GraphError> {
        if self.ids.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let max_out_degree = self.adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(DegreeStats {
            avg_out_degree: Ratio::new(self.edge_count(), self.node_count()),
            max_out_degree,
        })
    }

    /// Euclidean distance between the `coordinates` of two nodes, if both have one.
    pub fn distance(&self, a: &NodeId, b: &NodeId, key: &str) -> Option<f64> {
        let pa = self.node_property(a, key)?.as_coordinates()?;
        let pb = self.node_property(b, key)?.as_coordinates()?;
        Some(euclidean(pa, pb))
    }
}

pub(crate) fn euclidean(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Property key holding planar node positions.
pub const COORDINATES: &str = "coordinates";
/// Property key holding the device type of a node.
pub const NODE_TYPE: &str = "node_type";

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> NodeId {
        NodeId::new(s)
    }

    fn bare(ids: &[&str]) -> Vec<(NodeId, PropertyBag)> {
        ids.iter().map(|s| (n(s), PropertyBag::new())).collect()
    }

    #[test]
    fn empty_graph() {
        let g = TypedGraph::build(vec![], vec![]).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.degree_stats(), Err(GraphError::EmptyGraph));
    }

    #[test]
    fn single_edge() {
        let g = TypedGraph::build(bare(&["A", "B"]), vec![(n("A"), n("B"), PropertyBag::new())])
            .unwrap();
        assert_eq!(g.out_neighbors(&n("A")).unwrap(), &[n("B")]);
        assert!(g.out_neighbors(&n("B")).unwrap().is_empty());
        let stats = g.degree_stats().unwrap();
        assert_eq!(stats.avg_out_degree, Ratio::new(1, 2));
        assert_eq!(stats.max_out_degree, 1);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = TypedGraph::build(
            bare(&["A", "B"]),
            vec![
                (n("A"), n("B"), PropertyBag::new()),
                (n("A"), n("B"), PropertyBag::new()),
            ],
        )
        .unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge(n("A"), n("B")));
    }

    #[test]
    fn duplicate_node_and_dangling_endpoint() {
        assert_eq!(
            TypedGraph::build(bare(&["A", "A"]), vec![]).unwrap_err(),
            GraphError::DuplicateNode(n("A"))
        );
        let err =
            TypedGraph::build(bare(&["A"]), vec![(n("A"), n("Z"), PropertyBag::new())]).unwrap_err();
        assert_eq!(
            err,
            GraphError::DanglingEdgeEndpoint {
                from: n("A"),
                to: n("Z"),
                missing: n("Z")
            }
        );
    }

    #[test]
    fn neighbors_sorted_regardless_of_insertion_order() {
        let g = TypedGraph::build(
            bare(&["C", "A", "B"]),
            vec![
                (n("A"), n("C"), PropertyBag::new()),
                (n("A"), n("B"), PropertyBag::new()),
            ],
        )
        .unwrap();
        assert_eq!(g.out_neighbors(&n("A")).unwrap(), &[n("B"), n("C")]);
        assert_eq!(
            g.out_neighbors(&n("Q")),
            Err(GraphError::UnknownNode(n("Q")))
        );
    }

    #[test]
    fn degree_stats_three_nodes() {
        let g = TypedGraph::build(
            bare(&["A", "B", "C"]),
            vec![
                (n("A"), n("B"), PropertyBag::new()),
                (n("A"), n("C"), PropertyBag::new()),
                (n("B"), n("C"), PropertyBag::new()),
            ],
        )
        .unwrap();
        let stats = g.degree_stats().unwrap();
        assert_eq!(stats.avg_out_degree, Ratio::from_integer(1));
        assert_eq!(stats.max_out_degree, 2);
    }

    #[test]
    fn properties_read_back() {
        let g = TypedGraph::build(
            vec![
                (n("A"), props([("site", "S1")])),
                (n("B"), props([("coordinates", PropertyValue::Coordinates([3.0, 4.0]))])),
            ],
            vec![(n("A"), n("B"), props([("attenuation_db", 3.5)]))],
        )
        .unwrap();
        assert_eq!(
            g.node_property(&n("A"), "site"),
            Some(&PropertyValue::text("S1"))
        );
        assert_eq!(
            g.edge_props(&n("A"), &n("B")).unwrap()["attenuation_db"].as_f64(),
            Some(3.5)
        );
        assert!(g.edge_props(&n("B"), &n("A")).is_none());
    }

    mod props_based {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph_input() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
            (1usize..10).prop_flat_map(|k| {
                (Just(k), proptest::collection::vec((0..k, 0..k), 0..30))
            })
        }

        proptest! {
            #[test]
            fn round_trip_and_adjacency((k, raw_edges) in arb_graph_input()) {
                let mut seen = std::collections::BTreeSet::new();
                let edges: Vec<_> = raw_edges
                    .into_iter()
                    .filter(|e| seen.insert(*e))
                    .collect();
                let nodes: Vec<_> = (0..k)
                    .map(|i| (n(&format!("n{i:02}")), props([("i", i as f64)])))
                    .collect();
                let edge_input: Vec<_> = edges
                    .iter()
                    .map(|&(a, b)| (n(&format!("n{a:02}")), n(&format!("n{b:02}")), props([("w", (a * 100 + b) as f64)])))
                    .collect();
                let g = TypedGraph::build(nodes.clone(), edge_input.clone()).unwrap();

                prop_assert_eq!(g.node_count(), k);
                for (id, bag) in &nodes {
                    prop_assert_eq!(g.node_props(id), Some(bag));
                }
                let mut expected: Vec<_> = edge_input.iter().map(|(a, b, p)| (a.clone(), b.clone(), p.clone())).collect();
                expected.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
                let got: Vec<_> = g.edges().map(|(a, b, p)| (a.clone(), b.clone(), p.clone())).collect();
                prop_assert_eq!(got, expected);

                for id in g.nodes() {
                    let out = g.out_neighbors(id).unwrap();
                    prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
                    for m in out {
                        prop_assert!(g.has_edge(id, m));
                    }
                }
                let stats = g.degree_stats().unwrap();
                prop_assert_eq!(stats.avg_out_degree * k, Ratio::from_integer(g.edge_count()));
            }
        }
    }
}
