//! Series-parallel, linearly independent and serially linearly
//! independent two-terminal networks.
//!
//! The serial class is read recursively: any number of linearly
//! independent blocks joined in series qualifies, not only two.

pub mod generate;
mod independence;
mod network;
mod series_parallel;

use serde::Serialize;
use thiserror::Error;

pub use independence::{decompose_series, linear_independence_certificate, SliBlock, SliDecomposition};
pub use network::{NetworkEdge, TwoTerminalNetwork};
pub use series_parallel::{is_series_parallel_by_paths, series_parallel_certificate};

use crate::model::DEFAULT_PATH_CAP;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("source and sink coincide")]
    SameTerminals,
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("source and sink are not connected")]
    Disconnected,
    #[error("edge {0} lies on no source-sink path")]
    Dangling(String),
    #[error("more than {0} source-sink paths")]
    PathExplosion(usize),
}

/// Certificate that a network falls outside a class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two `s`–`t` paths crossing `edge` in opposite directions; their
    /// union contains an embedded Wheatstone network.
    Wheatstone {
        edge: String,
        forward: Vec<String>,
        backward: Vec<String>,
    },
    /// Edges left after exhaustive series and parallel reduction, reported
    /// when the reduced core has too many paths to search.
    IrreducibleCore { edges: Vec<String> },
    /// A path all of whose edges lie on other paths as well.
    SharedPath { path: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    #[serde(rename = "sp")]
    pub is_series_parallel: bool,
    #[serde(rename = "li")]
    pub is_linearly_independent: bool,
    #[serde(rename = "sli")]
    pub is_sli: bool,
    /// Series blocks when the network is serially independent, else empty.
    pub sli_decomposition: Vec<SliBlock>,
    pub witness: Option<Witness>,
}

/// `(is_sp, certificate)`.
pub fn is_series_parallel(net: &TwoTerminalNetwork) -> (bool, Option<Witness>) {
    let cert = series_parallel_certificate(net, DEFAULT_PATH_CAP);
    (cert.is_none(), cert)
}

/// `(is_li, path without a private edge)`.
pub fn is_linearly_independent(
    net: &TwoTerminalNetwork,
    cap: usize,
) -> Result<(bool, Option<Vec<String>>), TopologyError> {
    let cert = linear_independence_certificate(net, cap)?;
    Ok((cert.is_none(), cert))
}

/// Series decomposition with the failing block, if any.
pub fn decompose_sli(net: &TwoTerminalNetwork, cap: usize) -> Result<SliDecomposition, TopologyError> {
    decompose_series(net, cap)
}

pub fn classify(net: &TwoTerminalNetwork, cap: usize) -> Result<TopologyReport, TopologyError> {
    let (sp, sp_cert) = is_series_parallel(net);
    let (li, li_cert) = is_linearly_independent(net, cap)?;
    let decomposition = decompose_sli(net, cap)?;
    let sli = decomposition.is_sli();
    let witness = sp_cert.or_else(|| li_cert.map(|path| Witness::SharedPath { path }));
    Ok(TopologyReport {
        is_series_parallel: sp,
        is_linearly_independent: li,
        is_sli: sli,
        sli_decomposition: if sli { decomposition.blocks } else { Vec::new() },
        witness,
    })
}

/// Whether `LI ⇒ SLI ⇒ SP` holds for the three recognizers on `net`.
pub fn check_containment(net: &TwoTerminalNetwork, cap: usize) -> Result<bool, TopologyError> {
    let r = classify(net, cap)?;
    Ok((!r.is_linearly_independent || r.is_sli) && (!r.is_sli || r.is_series_parallel))
}
