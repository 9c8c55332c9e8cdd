use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use super::{from_json, IoError, FORMAT_VERSION};
use crate::graph::{NodeId, PropertyBag, PropertyValue, TypedGraph, NODE_TYPE};

fn format_version() -> u32 {
    FORMAT_VERSION
}

/// On-disk topology. Property values are JSON strings, numbers, booleans,
/// `[x, y]` coordinate pairs, or `{"value": n, "unit": "dB"}` objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub nodes: Vec<NodeDocument>,
    #[serde(default)]
    pub links: Vec<LinkDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: NodeId,
    /// Stored as the `node_type` property.
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub node_type: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDocument {
    pub from: NodeId,
    pub to: NodeId,
    /// Undirected links become one edge in each direction.
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, Value>,
}

pub fn value_to_property(field: &str, v: &Value) -> Result<PropertyValue, IoError> {
    let bad = |what: &str| IoError::Schema {
        field: field.to_string(),
        message: what.to_string(),
    };
    match v {
        Value::String(s) => Ok(PropertyValue::Text(s.clone())),
        Value::Bool(b) => Ok(PropertyValue::Bool(*b)),
        Value::Number(n) => n
            .as_f64()
            .map(PropertyValue::number)
            .ok_or_else(|| bad("number out of range")),
        Value::Array(xs) => match xs.as_slice() {
            [Value::Number(x), Value::Number(y)] => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) => Ok(PropertyValue::Coordinates([x, y])),
                _ => Err(bad("coordinate out of range")),
            },
            _ => Err(bad("arrays must be [x, y] coordinate pairs")),
        },
        Value::Object(m) => {
            let value = m.get("value").and_then(Value::as_f64);
            let unit = m.get("unit").and_then(Value::as_str);
            match (value, unit, m.len()) {
                (Some(value), Some(unit), 2) => Ok(PropertyValue::with_unit(value, unit)),
                (Some(value), None, 1) => Ok(PropertyValue::number(value)),
                _ => Err(bad("objects must be {\"value\": number, \"unit\": string}")),
            }
        }
        Value::Null => Err(bad("null is not a property value")),
    }
}

pub fn property_to_value(p: &PropertyValue) -> Value {
    let num = |x: f64| Number::from_f64(x).map_or(Value::Null, Value::Number);
    match p {
        PropertyValue::Text(s) => Value::String(s.clone()),
        PropertyValue::Bool(b) => Value::Bool(*b),
        PropertyValue::Number { value, unit: None } => num(*value),
        PropertyValue::Number { value, unit: Some(u) } => {
            let mut m = Map::new();
            m.insert("value".into(), num(*value));
            m.insert("unit".into(), Value::String(u.clone()));
            Value::Object(m)
        }
        PropertyValue::Coordinates([x, y]) => Value::Array(vec![num(*x), num(*y)]),
    }
}

fn bag(owner: &str, raw: &BTreeMap<String, Value>) -> Result<PropertyBag, IoError> {
    raw.iter()
        .map(|(k, v)| Ok((k.clone(), value_to_property(&format!("{owner}.properties.{k}"), v)?)))
        .collect()
}

impl TopologyDocument {
    pub fn into_graph(self) -> Result<TypedGraph, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Schema {
                field: "format_version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            });
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let owner = format!("nodes[{i}]");
            let mut props = bag(&owner, &n.properties)?;
            if let Some(t) = &n.node_type {
                match props.get(NODE_TYPE) {
                    Some(existing) if existing.as_str() != Some(t.as_str()) => {
                        return Err(IoError::Schema {
                            field: format!("{owner}.type"),
                            message: format!("conflicts with properties.{NODE_TYPE}"),
                        });
                    }
                    _ => {
                        props.insert(NODE_TYPE.into(), PropertyValue::text(t.as_str()));
                    }
                }
            }
            nodes.push((n.id.clone(), props));
        }
        let mut edges = Vec::with_capacity(self.links.len() * 2);
        for (i, l) in self.links.iter().enumerate() {
            let props = bag(&format!("links[{i}]"), &l.properties)?;
            if !l.directed {
                edges.push((l.to.clone(), l.from.clone(), props.clone()));
            }
            edges.push((l.from.clone(), l.to.clone(), props));
        }
        Ok(TypedGraph::build(nodes, edges)?)
    }

    /// Symmetric edge pairs with equal properties are written as one
    /// undirected link; everything else as directed links.
    pub fn from_graph(g: &TypedGraph) -> Self {
        let nodes = g
            .nodes()
            .iter()
            .map(|id| {
                let mut props = g.node_props(id).cloned().unwrap_or_default();
                let node_type = match props.get(NODE_TYPE) {
                    Some(PropertyValue::Text(t)) => {
                        let t = t.clone();
                        props.remove(NODE_TYPE);
                        Some(t)
                    }
                    _ => None,
                };
                NodeDocument {
                    id: id.clone(),
                    node_type,
                    properties: props.iter().map(|(k, v)| (k.clone(), property_to_value(v))).collect(),
                }
            })
            .collect();
        let mut links = Vec::new();
        for (from, to, props) in g.edges() {
            let reverse = g.edge_props(to, from);
            let undirected = reverse == Some(props) && from != to;
            if undirected && from > to {
                continue;
            }
            links.push(LinkDocument {
                from: from.clone(),
                to: to.clone(),
                directed: !undirected,
                properties: props.iter().map(|(k, v)| (k.clone(), property_to_value(v))).collect(),
            });
        }
        TopologyDocument {
            format_version: FORMAT_VERSION,
            nodes,
            links,
        }
    }
}

pub fn parse_topology(text: &str) -> Result<TypedGraph, IoError> {
    from_json::<TopologyDocument>(text)?.into_graph()
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<TypedGraph, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_topology(&text)
}

pub fn topology_to_json(g: &TypedGraph) -> String {
    serde_json::to_string_pretty(&TopologyDocument::from_graph(g)).expect("topology serializes")
}
