//! Game instances, flows and cost evaluation.

mod cost;
mod evaluate;
mod flow;
mod instance;
pub mod json;
mod paths;

use thiserror::Error;

pub use cost::CostFunction;
pub use evaluate::{perceived_path_cost, social_cost, true_path_cost, type_aggregate_cost};
pub use flow::{derive_edge_flows, FlowAssignment, FEASIBILITY_TOL};
pub use instance::{
    Edge, GameInstance, InstanceBuilder, Uncertainty, UncertaintySpec, UserType,
    DEFAULT_PATH_CAP,
};
pub use paths::{enumerate_paths, Arc, EdgeIdx, NodeIdx, Path};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("more than {cap} simple paths")]
    PathExplosion { cap: usize },
    #[error("no path from node {from} to node {to}")]
    NoPath { from: NodeIdx, to: NodeIdx },
    #[error("user type {0} has no source-sink path")]
    NoPathForType(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("unknown user type {0}")]
    UnknownType(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("edge costs must share one degree")]
    MixedDegree,
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("user type {0} has negative demand")]
    InvalidDemand(String),
    #[error("user type {0} has a nonpositive uncertainty factor")]
    InvalidUncertainty(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("infeasible flow: {0}")]
    Infeasible(String),
    #[error("no uncertainty factor given for edge {0}")]
    MissingUncertainty(String),
}
