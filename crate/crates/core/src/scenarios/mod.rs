//! Ready-made parametrizations for optical transport and datacenter cabling,
//! and seeded generators for synthetic topologies of both kinds.

mod datacenter;
mod generate;
mod telco;

use thiserror::Error;

use crate::graph::{GraphError, NodeId};

pub use datacenter::{
    datacenter_config, DatacenterAccumulation, DatacenterAccumulator, DatacenterPolicy, DatacenterSigma,
    GapScope, Tier,
};
pub use generate::{generate_datacenter, generate_telco, DatacenterGenParams, TelcoGenParams};
pub use telco::{telco_config, telco_sweep, TelcoAccumulation, TelcoAccumulator, TelcoPolicy, TelcoSigma};

/// Node type values used by the scenario conventions.
pub mod node_types {
    pub const ODF: &str = "odf";
    pub const SPLICE_BOX: &str = "splice_box";
    pub const AMPLIFIER: &str = "amplifier";
    pub const SERVER: &str = "server";
    pub const PATCH_PANEL: &str = "patch_panel";
    pub const SWITCH: &str = "switch";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("node `{0}` is not an ODF")]
    NotAnOdf(NodeId),
    #[error("node `{0}` is not a server")]
    NotAServer(NodeId),
    #[error("edge {from} -> {to} lacks numeric property `{key}`")]
    MissingEdgeProperty { from: NodeId, to: NodeId, key: String },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
