use std::collections::HashMap;

use serde::Serialize;

use crate::model::{enumerate_paths, Arc, GameInstance, ModelError, Path};
use crate::scalar::Scalar;

use super::TopologyError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetworkEdge {
    pub id: String,
    pub u: usize,
    pub v: usize,
}

/// Undirected two-terminal multigraph in which every edge lies on some
/// simple `s`–`t` path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoTerminalNetwork {
    nodes: Vec<String>,
    edges: Vec<NetworkEdge>,
    source: usize,
    sink: usize,
}

impl TwoTerminalNetwork {
    /// Builds from `(id, u, v)` triples; nodes are taken from the edges.
    pub fn new(source: &str, sink: &str, edges: &[(&str, &str, &str)]) -> Result<Self, TopologyError> {
        let mut nodes: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let mut index = |name: &str, nodes: &mut Vec<String>| -> usize {
            *lookup.entry(name.to_string()).or_insert_with(|| {
                nodes.push(name.to_string());
                nodes.len() - 1
            })
        };
        let s = index(source, &mut nodes);
        let t = index(sink, &mut nodes);
        let edges = edges
            .iter()
            .map(|(id, u, v)| NetworkEdge {
                id: id.to_string(),
                u: index(u, &mut nodes),
                v: index(v, &mut nodes),
            })
            .collect();
        Self::from_parts(nodes, edges, s, t)
    }

    pub fn from_parts(
        nodes: Vec<String>,
        edges: Vec<NetworkEdge>,
        source: usize,
        sink: usize,
    ) -> Result<Self, TopologyError> {
        let n = nodes.len();
        if source >= n || sink >= n {
            return Err(TopologyError::UnknownNode(source.max(sink).to_string()));
        }
        if source == sink {
            return Err(TopologyError::SameTerminals);
        }
        let mut ids = std::collections::HashSet::new();
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(TopologyError::UnknownNode(e.u.max(e.v).to_string()));
            }
            if e.u == e.v {
                return Err(TopologyError::SelfLoop(e.id.clone()));
            }
            if !ids.insert(e.id.clone()) {
                return Err(TopologyError::DuplicateEdge(e.id.clone()));
            }
        }
        let net = Self {
            nodes,
            edges,
            source,
            sink,
        };
        let on_path = net.edges_on_st_paths();
        if !on_path.iter().any(|&b| b) {
            return Err(TopologyError::Disconnected);
        }
        if let Some(e) = on_path.iter().position(|&b| !b) {
            return Err(TopologyError::Dangling(net.edges[e].id.clone()));
        }
        Ok(net)
    }

    /// Undirected view of an instance with the terminals of type `ty`.
    pub fn from_instance<T: Scalar>(instance: &GameInstance<T>, ty: usize) -> Result<Self, TopologyError> {
        let user = instance.user_type(ty);
        let edges = instance
            .edges()
            .iter()
            .map(|e| NetworkEdge {
                id: e.id.clone(),
                u: e.tail,
                v: e.head,
            })
            .collect();
        Self::from_parts(instance.nodes().to_vec(), edges, user.source, user.sink)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> Vec<Arc> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(i, e)| {
                [
                    Arc { edge: i, from: e.u, to: e.v },
                    Arc { edge: i, from: e.v, to: e.u },
                ]
            })
            .collect()
    }

    /// All simple `s`–`t` paths.
    pub fn paths(&self, cap: usize) -> Result<Vec<Path>, TopologyError> {
        enumerate_paths(self.nodes.len(), &self.arcs(), self.source, self.sink, cap).map_err(|e| match e {
            ModelError::PathExplosion { cap } => TopologyError::PathExplosion(cap),
            _ => TopologyError::Disconnected,
        })
    }

    /// An edge lies on a simple `s`–`t` path iff it shares a biconnected
    /// component with a virtual `s`–`t` edge.
    fn edges_on_st_paths(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let virtual_edge = self.edges.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        adj[self.source].push((self.sink, virtual_edge));
        adj[self.sink].push((self.source, virtual_edge));

        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut stack: Vec<usize> = Vec::new();
        let mut result = vec![false; self.edges.len()];
        // Iterative Tarjan over edges: (node, parent edge, next adjacency index).
        let mut frames: Vec<(usize, usize, usize)> = vec![(self.source, usize::MAX, 0)];
        disc[self.source] = 0;
        low[self.source] = 0;
        timer += 1;
        while let Some(top) = frames.len().checked_sub(1) {
            let (u, parent, next) = frames[top];
            if next < adj[u].len() {
                let (w, e) = adj[u][next];
                frames[top].2 += 1;
                if e == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    stack.push(e);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, e, 0));
                } else if disc[w] < disc[u] {
                    stack.push(e);
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _, _)) = frames.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = stack.pop() {
                            block.push(e);
                            if e == parent {
                                break;
                            }
                        }
                        if block.contains(&virtual_edge) {
                            for e in block {
                                if e != virtual_edge {
                                    result[e] = true;
                                }
                            }
                        }
                    }
                }
            }
        }
        result
    }

    /// Nodes other than the terminals whose removal disconnects `s` from
    /// `t`, in the order every `s`–`t` path visits them.
    pub fn cut_vertices(&self) -> Vec<usize> {
        let reach = |skip: usize| -> Vec<Option<usize>> {
            let mut parent = vec![None; self.nodes.len()];
            let mut seen = vec![false; self.nodes.len()];
            seen[self.source] = true;
            let mut queue = std::collections::VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                for e in &self.edges {
                    let w = if e.u == u {
                        e.v
                    } else if e.v == u {
                        e.u
                    } else {
                        continue;
                    };
                    if w != skip && !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        queue.push_back(w);
                    }
                }
            }
            if seen[self.sink] {
                parent
            } else {
                Vec::new()
            }
        };
        let parent = reach(usize::MAX);
        let mut path = vec![self.sink];
        while let Some(p) = parent[*path.last().expect("nonempty")] {
            path.push(p);
        }
        path.reverse();
        path.into_iter()
            .filter(|&v| v != self.source && v != self.sink && reach(v).is_empty())
            .collect()
    }

    /// Sub-network on a subset of edges with new terminals.
    pub(crate) fn restrict(&self, edges: &[usize], source: usize, sink: usize) -> Result<Self, TopologyError> {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut local = |v: usize, nodes: &mut Vec<String>| {
            *map.entry(v).or_insert_with(|| {
                nodes.push(self.nodes[v].clone());
                nodes.len() - 1
            })
        };
        let s = local(source, &mut nodes);
        let t = local(sink, &mut nodes);
        let sub = edges
            .iter()
            .map(|&i| {
                let e = &self.edges[i];
                NetworkEdge {
                    id: e.id.clone(),
                    u: local(e.u, &mut nodes),
                    v: local(e.v, &mut nodes),
                }
            })
            .collect();
        Self::from_parts(nodes, sub, s, t)
    }
}
