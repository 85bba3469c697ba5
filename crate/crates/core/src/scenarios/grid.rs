use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::parking::{apply_parking_transform, ParkingDemand, ParkingSpec, RoadEdge, ThroughDemand};
use super::{ScenarioError, ScenarioInstance};

/// Coefficients of a synthetic downtown grid. Every road shares the cost
/// `a·x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCitySpec {
    pub a: f64,
    pub b: f64,
    pub a_os: f64,
    pub b_os: f64,
    pub a_pg: f64,
    pub b_pg: f64,
    pub price_multiplier: f64,
    pub parking_demand: f64,
    pub through_demand: f64,
    /// Number of parking origins drawn from the eligible nodes.
    pub origins: usize,
    pub seed: u64,
    pub r: f64,
}

impl Default for GridCitySpec {
    fn default() -> Self {
        Self {
            a: 0.05,
            b: 0.1,
            a_os: 2.0,
            b_os: 0.5,
            a_pg: 0.0,
            b_pg: 1.2,
            price_multiplier: 1.0,
            parking_demand: 1.0,
            through_demand: 1.0,
            origins: 2,
            seed: 0,
            r: 1.0,
        }
    }
}

fn node(i: usize, j: usize) -> String {
    format!("g{i}_{j}")
}

/// Directed grid with roads pointing right and down; through traffic runs
/// from every node to the bottom-right corner. The on-street zone is the
/// top-right quadrant: roads entering it are on-street and its bottom-right
/// node is the zone exit. The garage sits at the bottom row, just left of
/// the zone's columns. Parking origins are drawn from the top-left quadrant,
/// which reaches both.
pub fn build_grid_city(rows: usize, cols: usize, spec: &GridCitySpec) -> Result<ScenarioInstance<f64>, ScenarioError> {
    if rows < 2 || cols < 2 {
        return Err(ScenarioError::InvalidGrid(format!("need at least 2x2, got {rows}x{cols}")));
    }
    let zone_rows = rows / 2;
    let zone_col = cols / 2;
    let in_zone = |i: usize, j: usize| i < zone_rows && j >= zone_col;
    let mut roads = Vec::new();
    let mut onstreet = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let mut push = |id: String, to: (usize, usize)| {
                if in_zone(to.0, to.1) {
                    onstreet.push(id.clone());
                }
                roads.push(RoadEdge {
                    id,
                    from: node(i, j),
                    to: node(to.0, to.1),
                    a: spec.a,
                    b: spec.b,
                });
            };
            if j + 1 < cols {
                push(format!("h{i}_{j}"), (i, j + 1));
            }
            if i + 1 < rows {
                push(format!("v{i}_{j}"), (i + 1, j));
            }
        }
    }
    let mut eligible: Vec<String> = (0..zone_rows)
        .flat_map(|i| (0..zone_col).map(move |j| node(i, j)))
        .collect();
    if spec.origins == 0 || spec.origins > eligible.len() {
        return Err(ScenarioError::SpecInvalid {
            field: "origins".into(),
            reason: format!("must lie in 1..={}, got {}", eligible.len(), spec.origins),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    eligible.shuffle(&mut rng);
    eligible.truncate(spec.origins);
    eligible.sort();
    let share = spec.parking_demand / spec.origins as f64;
    let exit = node(rows - 1, cols - 1);
    let through_share = spec.through_demand / (rows * cols - 1) as f64;
    let through = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| node(i, j)))
        .filter(|n| *n != exit)
        .map(|source| ThroughDemand {
            source,
            sink: exit.clone(),
            demand: through_share,
        })
        .collect();
    let parking = ParkingSpec {
        roads,
        onstreet_edges: onstreet,
        onstreet_exits: vec![node(zone_rows - 1, cols - 1)],
        a_os: spec.a_os,
        b_os: spec.b_os,
        garage_nodes: vec![node(rows - 1, zone_col - 1)],
        a_pg: spec.a_pg,
        b_pg: spec.b_pg,
        price_multiplier: spec.price_multiplier,
        parking_sink: "t_park".into(),
        parking: eligible
            .into_iter()
            .map(|source| ParkingDemand { source, demand: share })
            .collect(),
        through,
        r: spec.r,
    };
    apply_parking_transform(&parking)
}
