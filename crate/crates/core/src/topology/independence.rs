use serde::Serialize;

use super::network::TwoTerminalNetwork;
use super::TopologyError;

/// `Ok(None)` when every `s`–`t` path has an edge no other path uses;
/// otherwise the edge ids of the first path without one.
pub fn linear_independence_certificate(
    net: &TwoTerminalNetwork,
    cap: usize,
) -> Result<Option<Vec<String>>, TopologyError> {
    let paths = net.paths(cap)?;
    let mut uses = vec![0usize; net.edges().len()];
    for p in &paths {
        for &e in &p.edges {
            uses[e] += 1;
        }
    }
    Ok(paths
        .iter()
        .find(|p| p.edges.iter().all(|&e| uses[e] > 1))
        .map(|p| p.edges.iter().map(|&e| net.edges()[e].id.clone()).collect()))
}

/// One series block between consecutive cut nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliBlock {
    pub source: String,
    pub sink: String,
    pub edges: Vec<String>,
    pub linearly_independent: bool,
}

/// Series blocks of a network; `failing` indexes the first block that is
/// not linearly independent together with its certificate path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliDecomposition {
    pub blocks: Vec<SliBlock>,
    pub failing: Option<(usize, Vec<String>)>,
}

impl SliDecomposition {
    pub fn is_sli(&self) -> bool {
        self.failing.is_none()
    }
}

/// Splits the network at every node all `s`–`t` paths pass through and
/// tests each block for linear independence. Any number of blocks is
/// accepted, reading the series definition recursively.
pub fn decompose_series(net: &TwoTerminalNetwork, cap: usize) -> Result<SliDecomposition, TopologyError> {
    let mut terminals = vec![net.source()];
    terminals.extend(net.cut_vertices());
    terminals.push(net.sink());
    let position = |v: usize| terminals.iter().position(|&x| x == v);

    // Components of the graph without the terminals; each touches exactly
    // two consecutive terminals.
    let n = net.nodes().len();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if component[start] != usize::MAX || position(start).is_some() {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(u) = stack.pop() {
            for e in net.edges() {
                let w = if e.u == u {
                    e.v
                } else if e.v == u {
                    e.u
                } else {
                    continue;
                };
                if position(w).is_none() && component[w] == usize::MAX {
                    component[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    let mut component_block = vec![usize::MAX; count];
    for e in net.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if let (Some(pa), None) = (position(a), position(b)) {
                let c = component[b];
                component_block[c] = component_block[c].min(pa);
            }
        }
    }
    let mut block_edges: Vec<Vec<usize>> = vec![Vec::new(); terminals.len() - 1];
    for (i, e) in net.edges().iter().enumerate() {
        let block = match (position(e.u), position(e.v)) {
            (Some(a), Some(b)) => a.min(b),
            (None, _) => component_block[component[e.u]],
            (_, None) => component_block[component[e.v]],
        };
        block_edges[block].push(i);
    }

    let mut blocks = Vec::with_capacity(block_edges.len());
    let mut failing = None;
    for (k, edges) in block_edges.iter().enumerate() {
        let sub = net.restrict(edges, terminals[k], terminals[k + 1])?;
        let witness = linear_independence_certificate(&sub, cap)?;
        if failing.is_none() {
            if let Some(path) = &witness {
                failing = Some((k, path.clone()));
            }
        }
        blocks.push(SliBlock {
            source: net.nodes()[terminals[k]].clone(),
            sink: net.nodes()[terminals[k + 1]].clone(),
            edges: edges.iter().map(|&e| net.edges()[e].id.clone()).collect(),
            linearly_independent: witness.is_none(),
        });
    }
    Ok(SliDecomposition { blocks, failing })
}
