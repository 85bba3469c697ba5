//! Network families: fixed fixtures and random grammar generators.

use rand::Rng;

use super::network::{NetworkEdge, TwoTerminalNetwork};

/// Edge list over nodes `0 = s`, `1 = t`, `2..` interior.
#[derive(Clone, Debug, Default)]
struct Sketch {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Sketch {
    fn new() -> Self {
        Self {
            nodes: 2,
            edges: Vec::new(),
        }
    }

    fn fresh(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn finish(self) -> TwoTerminalNetwork {
        let nodes = (0..self.nodes)
            .map(|i| match i {
                0 => "s".to_string(),
                1 => "t".to_string(),
                _ => format!("v{}", i - 1),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| NetworkEdge {
                id: format!("e{}", i + 1),
                u,
                v,
            })
            .collect();
        TwoTerminalNetwork::from_parts(nodes, edges, 0, 1).expect("generated networks are valid")
    }
}

pub fn single_edge() -> TwoTerminalNetwork {
    parallel_links(1)
}

pub fn parallel_links(count: usize) -> TwoTerminalNetwork {
    let mut sk = Sketch::new();
    sk.edges = vec![(0, 1); count.max(1)];
    sk.finish()
}

/// Four nodes, five edges; `e5` is the bridge `a`–`b`.
pub fn wheatstone() -> TwoTerminalNetwork {
    TwoTerminalNetwork::new(
        "s",
        "t",
        &[
            ("e1", "s", "a"),
            ("e2", "s", "b"),
            ("e3", "a", "t"),
            ("e4", "b", "t"),
            ("e5", "a", "b"),
        ],
    )
    .expect("valid fixture")
}

/// Three nodes `s`, `i`, `t`: `e1` = s–t, `e2`/`e4` = s–i, `e3`/`e5` = i–t.
pub fn braess_layout() -> TwoTerminalNetwork {
    TwoTerminalNetwork::new(
        "s",
        "t",
        &[
            ("e1", "s", "t"),
            ("e2", "s", "i"),
            ("e3", "i", "t"),
            ("e4", "s", "i"),
            ("e5", "i", "t"),
        ],
    )
    .expect("valid fixture")
}

/// Starts from one `s`–`t` edge and repeatedly replaces a random edge by
/// two edges in series or in parallel until `edges` edges exist.
pub fn random_series_parallel<R: Rng + ?Sized>(rng: &mut R, edges: usize) -> TwoTerminalNetwork {
    let mut sk = Sketch::new();
    sk.edges.push((0, 1));
    while sk.edges.len() < edges.max(1) {
        let i = rng.random_range(0..sk.edges.len());
        let (u, v) = sk.edges[i];
        if rng.random_bool(0.5) {
            let m = sk.fresh();
            sk.edges[i] = (u, m);
            sk.edges.push((m, v));
        } else {
            sk.edges.push((u, v));
        }
    }
    sk.finish()
}

/// Linearly independent grammar: a single edge, two linearly independent
/// networks in parallel, or one in series with a single edge.
pub fn random_linearly_independent<R: Rng + ?Sized>(rng: &mut R, edges: usize) -> TwoTerminalNetwork {
    let mut sk = Sketch::new();
    grow_li(rng, &mut sk, 0, 1, edges.max(1));
    sk.finish()
}

fn grow_li<R: Rng + ?Sized>(rng: &mut R, sk: &mut Sketch, u: usize, v: usize, budget: usize) {
    if budget <= 1 || rng.random_bool(0.2) {
        sk.edges.push((u, v));
        return;
    }
    if rng.random_bool(0.5) {
        let left = rng.random_range(1..budget);
        grow_li(rng, sk, u, v, left);
        grow_li(rng, sk, u, v, budget - left);
    } else {
        let m = sk.fresh();
        if rng.random_bool(0.5) {
            grow_li(rng, sk, u, m, budget - 1);
            sk.edges.push((m, v));
        } else {
            sk.edges.push((u, m));
            grow_li(rng, sk, m, v, budget - 1);
        }
    }
}

/// `blocks` linearly independent networks joined in series.
pub fn random_serially_independent<R: Rng + ?Sized>(
    rng: &mut R,
    blocks: usize,
    edges_per_block: usize,
) -> TwoTerminalNetwork {
    let mut sk = Sketch::new();
    let blocks = blocks.max(1);
    let mut from = 0;
    for k in 0..blocks {
        let to = if k + 1 == blocks { 1 } else { sk.fresh() };
        let budget = rng.random_range(1..=edges_per_block.max(1));
        grow_li(rng, &mut sk, from, to, budget);
        from = to;
    }
    sk.finish()
}
