use super::network::TwoTerminalNetwork;
use super::{TopologyError, Witness};
use crate::model::{enumerate_paths, Arc};

/// Oriented original edges `(edge, from, to)` realizing one reduced edge.
type Trace = Vec<(usize, usize, usize)>;

#[derive(Clone, Debug)]
struct Reduced {
    u: usize,
    v: usize,
    trace: Trace,
}

fn reversed(trace: &Trace) -> Trace {
    trace.iter().rev().map(|&(e, a, b)| (e, b, a)).collect()
}

/// Applies parallel and series reductions until none applies.
fn reduce(net: &TwoTerminalNetwork) -> Vec<Reduced> {
    let (s, t) = (net.source(), net.sink());
    let mut edges: Vec<Option<Reduced>> = net
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Some(Reduced {
                u: e.u,
                v: e.v,
                trace: vec![(i, e.u, e.v)],
            })
        })
        .collect();
    loop {
        let mut changed = false;
        // Parallel: keep the lower-index edge of each endpoint pair.
        for i in 0..edges.len() {
            let Some(a) = edges[i].as_ref() else { continue };
            let key = (a.u.min(a.v), a.u.max(a.v));
            for j in (i + 1)..edges.len() {
                if let Some(b) = &edges[j] {
                    if (b.u.min(b.v), b.u.max(b.v)) == key {
                        edges[j] = None;
                        changed = true;
                    }
                }
            }
        }
        // Series: splice out interior nodes of degree two.
        for x in 0..net.nodes().len() {
            if x == s || x == t {
                continue;
            }
            let incident: Vec<usize> = (0..edges.len())
                .filter(|&i| edges[i].as_ref().is_some_and(|e| e.u == x || e.v == x))
                .collect();
            if incident.len() != 2 {
                continue;
            }
            let orient = |i: usize, edges: &[Option<Reduced>]| {
                let e = edges[i].as_ref().expect("live");
                if e.v == x {
                    (e.u, e.trace.clone())
                } else {
                    (e.v, reversed(&e.trace))
                }
            };
            let (a, into_x) = orient(incident[0], &edges);
            let (b, into_x_from_b) = orient(incident[1], &edges);
            if a == b {
                continue;
            }
            let mut trace = into_x;
            trace.extend(reversed(&into_x_from_b));
            edges[incident[0]] = Some(Reduced { u: a, v: b, trace });
            edges[incident[1]] = None;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    edges.into_iter().flatten().collect()
}

/// Series-parallel test by reduction; `None` means series-parallel.
pub fn series_parallel_certificate(
    net: &TwoTerminalNetwork,
    cap: usize,
) -> Option<Witness> {
    let core = reduce(net);
    let (s, t) = (net.source(), net.sink());
    if core.len() == 1 && (core[0].u.min(core[0].v), core[0].u.max(core[0].v)) == (s.min(t), s.max(t)) {
        return None;
    }
    let ids = |trace: &Trace| trace.iter().map(|&(e, _, _)| net.edges()[e].id.clone()).collect::<Vec<_>>();
    let arcs: Vec<Arc> = core
        .iter()
        .enumerate()
        .flat_map(|(i, e)| [Arc { edge: i, from: e.u, to: e.v }, Arc { edge: i, from: e.v, to: e.u }])
        .collect();
    let crossing = enumerate_paths(net.nodes().len(), &arcs, s, t, cap)
        .ok()
        .and_then(|paths| opposite_traversal(&paths));
    Some(match crossing {
        Some((edge, forward, backward)) => {
            let expand = |path: &crate::model::Path| -> Trace {
                path.edges
                    .iter()
                    .zip(path.nodes.iter())
                    .flat_map(|(&e, &from)| {
                        let r = &core[e];
                        if r.u == from {
                            r.trace.clone()
                        } else {
                            reversed(&r.trace)
                        }
                    })
                    .collect()
            };
            let fwd = expand(&forward);
            let bwd = expand(&backward);
            // Pick an original edge inside the crossing core edge.
            let shared = core[edge].trace[0].0;
            Witness::Wheatstone {
                edge: net.edges()[shared].id.clone(),
                forward: ids(&fwd),
                backward: ids(&bwd),
            }
        }
        None => Witness::IrreducibleCore {
            edges: core.iter().flat_map(|r| ids(&r.trace)).collect(),
        },
    })
}

/// First edge (by path order) that two paths traverse in opposite
/// directions, with those two paths.
fn opposite_traversal(
    paths: &[crate::model::Path],
) -> Option<(usize, crate::model::Path, crate::model::Path)> {
    use std::collections::HashMap;
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, p) in paths.iter().enumerate() {
        for (&e, &from) in p.edges.iter().zip(p.nodes.iter()) {
            seen.entry((e, from)).or_insert(k);
        }
    }
    for p in paths {
        for (i, &e) in p.edges.iter().enumerate() {
            let to = p.nodes[i + 1];
            if let Some(&k) = seen.get(&(e, to)) {
                return Some((e, p.clone(), paths[k].clone()));
            }
        }
    }
    None
}

/// Direct check of the path definition: no two simple `s`–`t` paths
/// traverse one edge in opposite directions.
pub fn is_series_parallel_by_paths(net: &TwoTerminalNetwork, cap: usize) -> Result<bool, TopologyError> {
    Ok(opposite_traversal(&net.paths(cap)?).is_none())
}
