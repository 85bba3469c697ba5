use serde::Serialize;

use super::ModelError;

pub type NodeIdx = usize;
pub type EdgeIdx = usize;

/// One traversable direction of an edge. Undirected edges contribute two
/// antiparallel arcs that share the edge index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub edge: EdgeIdx,
    pub from: NodeIdx,
    pub to: NodeIdx,
}

/// A simple path, stored as the edges it uses and the nodes it visits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Path {
    pub edges: Vec<EdgeIdx>,
    pub nodes: Vec<NodeIdx>,
}

impl Path {
    pub fn contains(&self, edge: EdgeIdx) -> bool {
        self.edges.contains(&edge)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// All simple `source → sink` paths over `arcs`, ordered lexicographically
/// by edge index sequence.
pub fn enumerate_paths(
    node_count: usize,
    arcs: &[Arc],
    source: NodeIdx,
    sink: NodeIdx,
    cap: usize,
) -> Result<Vec<Path>, ModelError> {
    if source >= node_count || sink >= node_count {
        return Err(ModelError::UnknownNode(format!(
            "{} (graph has {node_count} nodes)",
            source.max(sink)
        )));
    }
    let mut out_arcs: Vec<Vec<Arc>> = vec![Vec::new(); node_count];
    for arc in arcs {
        out_arcs[arc.from].push(*arc);
    }
    for list in &mut out_arcs {
        list.sort_by_key(|a| (a.edge, a.to));
    }

    let mut paths = Vec::new();
    if source == sink {
        return Err(ModelError::NoPath {
            from: source,
            to: sink,
        });
    }
    let mut on_path = vec![false; node_count];
    let mut nodes = vec![source];
    let mut edges = Vec::new();
    on_path[source] = true;
    dfs(
        &out_arcs,
        sink,
        cap,
        &mut on_path,
        &mut nodes,
        &mut edges,
        &mut paths,
    )?;
    if paths.is_empty() {
        return Err(ModelError::NoPath {
            from: source,
            to: sink,
        });
    }
    paths.sort();
    Ok(paths)
}

fn dfs(
    out_arcs: &[Vec<Arc>],
    sink: NodeIdx,
    cap: usize,
    on_path: &mut [bool],
    nodes: &mut Vec<NodeIdx>,
    edges: &mut Vec<EdgeIdx>,
    paths: &mut Vec<Path>,
) -> Result<(), ModelError> {
    let here = *nodes.last().expect("path starts at source");
    if here == sink {
        if paths.len() == cap {
            return Err(ModelError::PathExplosion { cap });
        }
        paths.push(Path {
            edges: edges.clone(),
            nodes: nodes.clone(),
        });
        return Ok(());
    }
    for arc in &out_arcs[here] {
        if on_path[arc.to] {
            continue;
        }
        on_path[arc.to] = true;
        nodes.push(arc.to);
        edges.push(arc.edge);
        dfs(out_arcs, sink, cap, on_path, nodes, edges, paths)?;
        edges.pop();
        nodes.pop();
        on_path[arc.to] = false;
    }
    Ok(())
}
