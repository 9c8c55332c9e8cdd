//! JSON file formats for topologies, policies and results.

mod policy;
mod report;
mod topology;

use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::engine::SearchError;
use crate::graph::GraphError;
use crate::scenarios::ScenarioError;

pub use policy::{
    load_policy, parse_policy, AnyType, CustomPolicy, DatacenterSection, DomainSpec, FrontierKind, FrontierSpec,
    NodeTypeFilter, PolicyDocument, PredicateSpec, ScenarioKind, ScenarioSearch, SearchRequest, SweepSection,
};
pub use report::{
    run_search, verify_result, ReportContext, ResultDocument, SolutionRecord, StepRecord, NO_SOLUTION_MESSAGE,
};
pub use topology::{
    load_topology, parse_topology, property_to_value, topology_to_json, value_to_property, LinkDocument,
    NodeDocument, TopologyDocument,
};

pub const FORMAT_VERSION: u32 = 1;

/// Environment variable holding the default safety cap.
pub const SAFETY_CAP_ENV: &str = "GAPWALK_SAFETY_CAP";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("custom policy has no prune rule bounding traversal length; pass an explicit safety cap to run it anyway")]
    NoPruneHorizon,
    #[error("result does not verify: {0}")]
    Verification(String),
}

impl IoError {
    /// Failures of the inputs themselves, as opposed to the search.
    pub fn is_validation(&self) -> bool {
        !matches!(self, IoError::Search(SearchError::SafetyCapExceeded { .. }))
    }
}

pub(crate) fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => IoError::Schema {
                field: format!("line {} column {}", e.line(), e.column()),
                message: e.to_string(),
            },
            _ => IoError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })
}
