//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use gapwalk::scenarios::node_types::{ODF, SERVER};
use gapwalk::scenarios::{generate_datacenter, generate_telco, DatacenterGenParams, TelcoGenParams};
use gapwalk::graph::NODE_TYPE;
use gapwalk::{NodeId, PropertyValue, TypedGraph};

pub const SEED: u64 = 7;

pub fn telco(sites: usize) -> Arc<TypedGraph> {
    let params = TelcoGenParams {
        seed: SEED,
        sites,
        ..TelcoGenParams::default()
    };
    Arc::new(generate_telco(&params).expect("generator accepts its own defaults"))
}

pub fn datacenter(racks_per_row: usize) -> Arc<TypedGraph> {
    let params = DatacenterGenParams {
        seed: SEED,
        rooms: 1,
        racks_per_row,
        ..DatacenterGenParams::default()
    };
    Arc::new(generate_datacenter(&params).expect("generator accepts its own defaults"))
}

pub fn of_type(g: &TypedGraph, ty: &str) -> Vec<NodeId> {
    g.nodes()
        .iter()
        .filter(|n| g.node_property(n, NODE_TYPE).and_then(PropertyValue::as_str) == Some(ty))
        .cloned()
        .collect()
}

/// First and last ODF, which the ring layout puts at opposite sites.
pub fn odf_pair(g: &TypedGraph) -> (NodeId, NodeId) {
    let odfs = of_type(g, ODF);
    (odfs[0].clone(), odfs[odfs.len() / 2].clone())
}

pub fn upstream(g: &TypedGraph) -> Vec<NodeId> {
    g.nodes()
        .iter()
        .filter(|n| g.node_property(n, "upstream").and_then(PropertyValue::as_bool) == Some(true))
        .cloned()
        .collect()
}

pub fn first_server(g: &TypedGraph) -> NodeId {
    of_type(g, SERVER).into_iter().next().expect("generated datacenter has servers")
}
