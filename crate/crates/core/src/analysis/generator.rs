//! Seeded random instances for the property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{CostFunction, GameInstance, InstanceBuilder, UncertaintySpec};
use crate::topology::generate::{
    parallel_links, random_linearly_independent, random_serially_independent, random_series_parallel,
};
use crate::topology::TwoTerminalNetwork;

/// Largest `r_max/γ` the samplers produce, keeping the bound finite.
pub const MAX_R_OVER_GAMMA: f64 = 3.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Directed acyclic graph with random origin-destination pairs.
    Dag,
    SeriesParallel,
    LinearlyIndependent,
    /// Linearly independent blocks joined in series.
    SerialLi,
    /// `n` parallel `s`–`t` links.
    Parallel(usize),
    /// One of the above, drawn per seed.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintySampling {
    /// `r = 1` for every type.
    Certain,
    /// The same `r` for every type.
    Uniform(f64),
    /// One factor per type from `[lo, hi]`, with `r_max ≤ 3.5·γ`.
    PerType { lo: f64, hi: f64 },
    /// Exactly two types sharing `s` and `t`: `r = 1` and `r ~ U[lo, hi]`.
    TwoCommodity { lo: f64, hi: f64 },
    /// Edge-dependent factors `r_θ(e) = κ_e / w_θ`, which always admit a
    /// potential; `κ_e ~ U[lo, hi]`, `w_θ ~ U[1, 1.3]`.
    EdgeDependent { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomProfile {
    pub family: Family,
    /// Inclusive range for the number of user types.
    pub types: (usize, usize),
    /// Inclusive range for the number of edges (per block for `SerialLi`).
    pub edges: (usize, usize),
    pub degree: u32,
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub demand: (f64, f64),
    /// Probability that an edge gets a constant cost (`a = 0`).
    pub constant_edge_probability: f64,
    pub uncertainty: UncertaintySampling,
}

impl Default for RandomProfile {
    fn default() -> Self {
        Self {
            family: Family::Mixed,
            types: (2, 4),
            edges: (3, 8),
            degree: 1,
            a: (0.5, 3.0),
            b: (0.0, 3.0),
            demand: (0.5, 2.0),
            constant_edge_probability: 0.0,
            uncertainty: UncertaintySampling::Certain,
        }
    }
}

impl RandomProfile {
    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn with_uncertainty(mut self, uncertainty: UncertaintySampling) -> Self {
        self.uncertainty = uncertainty;
        self
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn count<R: Rng>(rng: &mut R, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(lo.min(hi)..=hi.max(lo))
}

/// Per-type factors with `r_max² ≤ 3.5·r_min`.
fn per_type_factors<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let hi = hi.min(MAX_R_OVER_GAMMA);
    let lo = lo.min(hi);
    let r_max = uniform(rng, (lo, hi));
    let floor = lo.max(r_max * r_max / MAX_R_OVER_GAMMA).min(r_max);
    let mut rs: Vec<f64> = (0..n)
        .map(|i| if i == 0 { r_max } else { uniform(rng, (floor, r_max)) })
        .collect();
    rs.shuffle(rng);
    rs
}

fn network<R: Rng>(rng: &mut R, family: Family, edges: (usize, usize)) -> TwoTerminalNetwork {
    match family {
        Family::SeriesParallel => {
            let n = count(rng, edges);
            random_series_parallel(rng, n)
        }
        Family::LinearlyIndependent => {
            let n = count(rng, edges);
            random_linearly_independent(rng, n)
        }
        Family::SerialLi => {
            let blocks = rng.random_range(2..=3);
            random_serially_independent(rng, blocks, edges.1.clamp(1, 4))
        }
        Family::Parallel(n) => parallel_links(n),
        Family::Dag | Family::Mixed => unreachable!("resolved by caller"),
    }
}

/// Deterministic in `seed`; every instance passes construction checks.
/// Draws are repeated until some type has a route choice, so suites are
/// not padded with trivially tight single-path instances.
pub fn generate_random_instance(seed: u64, profile: &RandomProfile) -> GameInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instance = draw(&mut rng, profile);
    for _ in 0..MAX_REDRAWS {
        if (0..instance.types().len()).any(|ty| instance.catalog(ty).len() > 1) {
            break;
        }
        instance = draw(&mut rng, profile);
    }
    instance
}

const MAX_REDRAWS: usize = 64;

fn draw(rng: &mut ChaCha8Rng, profile: &RandomProfile) -> GameInstance<f64> {
    let family = match profile.family {
        Family::Mixed => [
            Family::Dag,
            Family::SeriesParallel,
            Family::LinearlyIndependent,
            Family::SerialLi,
            Family::Parallel(2),
            Family::Parallel(3),
        ][rng.random_range(0..6)],
        f => f,
    };
    let two_commodity = matches!(profile.uncertainty, UncertaintySampling::TwoCommodity { .. });
    let n_types = if two_commodity { 2 } else { count(rng, profile.types).max(1) };

    let mut builder = InstanceBuilder::<f64>::new();
    let mut edge_ids: Vec<String> = Vec::new();
    let cost = |rng: &mut ChaCha8Rng| {
        let a = if rng.random_bool(profile.constant_edge_probability.clamp(0.0, 1.0)) {
            0.0
        } else {
            uniform(rng, profile.a)
        };
        CostFunction::new(a, uniform(rng, profile.b), profile.degree).expect("nonnegative coefficients")
    };

    // Endpoints per type.
    let terminals: Vec<(String, String)> = if family == Family::Dag {
        let n = rng.random_range(4..=6);
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        for name in &names {
            builder.node(name.clone());
        }
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || rng.random_bool(0.35) {
                    k += 1;
                    let c = cost(rng);
                    builder.edge(format!("e{k}"), &names[i], &names[j], c).expect("fresh edge");
                    edge_ids.push(format!("e{k}"));
                }
            }
        }
        (0..n_types)
            .map(|_| {
                if two_commodity {
                    return (names[0].clone(), names[n - 1].clone());
                }
                let s = rng.random_range(0..n - 1);
                let t = rng.random_range(s + 1..n);
                (names[s].clone(), names[t].clone())
            })
            .collect()
    } else {
        let net = network(rng, family, profile.edges);
        builder.undirected(true);
        for name in net.nodes() {
            builder.node(name.clone());
        }
        for e in net.edges() {
            let c = cost(rng);
            builder
                .edge(e.id.clone(), &net.nodes()[e.u], &net.nodes()[e.v], c)
                .expect("fresh edge");
            edge_ids.push(e.id.clone());
        }
        let (s, t) = (net.nodes()[net.source()].clone(), net.nodes()[net.sink()].clone());
        vec![(s, t); n_types]
    };

    let factors: Vec<UncertaintySpec<f64>> = match profile.uncertainty {
        UncertaintySampling::Certain => vec![UncertaintySpec::Uniform(1.0); n_types],
        UncertaintySampling::Uniform(r) => vec![UncertaintySpec::Uniform(r); n_types],
        UncertaintySampling::PerType { lo, hi } => per_type_factors(rng, n_types, lo, hi)
            .into_iter()
            .map(UncertaintySpec::Uniform)
            .collect(),
        UncertaintySampling::TwoCommodity { lo, hi } => {
            vec![UncertaintySpec::Uniform(1.0), UncertaintySpec::Uniform(uniform(rng, (lo, hi)))]
        }
        UncertaintySampling::EdgeDependent { lo, hi } => {
            let kappa: Vec<f64> = edge_ids.iter().map(|_| uniform(rng, (lo, hi))).collect();
            (0..n_types)
                .map(|_| {
                    let w = uniform(rng, (1.0, 1.3));
                    UncertaintySpec::PerEdge(
                        edge_ids.iter().zip(&kappa).map(|(id, k)| (id.clone(), k / w)).collect(),
                    )
                })
                .collect()
        }
    };

    for (i, ((s, t), r)) in terminals.iter().zip(factors).enumerate() {
        let id = match (two_commodity, i) {
            (true, 0) => "certain".to_string(),
            (true, _) => "uncertain".to_string(),
            _ => format!("type{}", i + 1),
        };
        let demand = uniform(rng, profile.demand);
        builder.user_type(id, s, t, demand, r);
    }
    builder.build().expect("generated instances are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{classify, is_linearly_independent};

    #[test]
    fn deterministic_in_seed() {
        let p = RandomProfile::default().with_uncertainty(UncertaintySampling::PerType { lo: 0.5, hi: 3.0 });
        for seed in 0..20 {
            assert_eq!(generate_random_instance(seed, &p), generate_random_instance(seed, &p));
        }
    }

    #[test]
    fn linearly_independent_profile() {
        let p = RandomProfile::default().with_family(Family::LinearlyIndependent);
        for seed in 0..30 {
            let inst = generate_random_instance(seed, &p);
            let net = TwoTerminalNetwork::from_instance(&inst, 0).unwrap();
            assert!(is_linearly_independent(&net, 10_000).unwrap().0);
        }
    }

    #[test]
    fn serial_profile_is_sli() {
        let p = RandomProfile::default()
            .with_family(Family::SerialLi)
            .with_uncertainty(UncertaintySampling::TwoCommodity { lo: 1.0, hi: 2.0 });
        for seed in 0..30 {
            let inst = generate_random_instance(seed, &p);
            assert_eq!(inst.types().len(), 2);
            let net = TwoTerminalNetwork::from_instance(&inst, 0).unwrap();
            assert!(classify(&net, 10_000).unwrap().is_sli);
        }
    }

    #[test]
    fn parallel_two_is_pigou_shaped() {
        let p = RandomProfile::default().with_family(Family::Parallel(2));
        let inst = generate_random_instance(3, &p);
        assert_eq!(inst.edges().len(), 2);
        assert_eq!(inst.catalog(0).len(), 2);
    }

    #[test]
    fn per_type_factors_respect_ratio() {
        let p = RandomProfile::default().with_uncertainty(UncertaintySampling::PerType { lo: 0.3, hi: 5.0 });
        for seed in 0..200 {
            let inst = generate_random_instance(seed, &p);
            let rs: Vec<f64> = inst.types().iter().map(|t| *t.uncertainty.as_uniform().unwrap()).collect();
            let max = rs.iter().cloned().fold(0.0, f64::max);
            let min = rs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max <= MAX_R_OVER_GAMMA * min / max + 1e-12);
        }
    }
}
