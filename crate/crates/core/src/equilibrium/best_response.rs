use crate::model::{FlowAssignment, GameInstance, Path};
use crate::scalar::Real;

use super::verify::{verify_equilibrium, EquilibriumReport};
use super::{Init, SolverConfig};

const BISECTION_STEPS: usize = 100;

/// Last iterate of [`best_response_dynamics`] with its verification.
#[derive(Clone, Debug)]
pub struct BestResponseResult<T> {
    pub flow: FlowAssignment<T>,
    pub converged: bool,
    pub iterations: usize,
    pub report: EquilibriumReport<T>,
}

/// Round-robin damped best responses on perceived costs.
///
/// In each round every type moves flow from each of its used paths to its
/// currently cheapest path, shifting just enough to equalize the two
/// perceived costs. Rounds stop once [`verify_equilibrium`] passes at
/// `config.equilibrium_check_tol` or after `config.max_iterations` rounds.
/// Nothing guarantees convergence when the instance has no potential.
pub fn best_response_dynamics<T: Real>(
    instance: &GameInstance<T>,
    config: &SolverConfig,
) -> BestResponseResult<T> {
    let factors: Vec<Vec<Option<T>>> = instance
        .types()
        .iter()
        .map(|t| {
            (0..instance.edges().len())
                .map(|e| t.uncertainty.on_edge(e).copied())
                .collect()
        })
        .collect();
    let defined = (0..instance.types().len()).all(|ty| {
        instance
            .catalog(ty)
            .iter()
            .all(|p| p.edges.iter().all(|&e| factors[ty][e].is_some()))
    });

    let choice: Vec<usize> = (0..instance.types().len())
        .map(|ty| match config.init {
            Init::FreeFlowShortest => {
                let catalog = instance.catalog(ty);
                let weight = |p: &Path| {
                    p.edges
                        .iter()
                        .fold(T::zero(), |s, &e| s + *instance.edge(e).cost.b())
                };
                (0..catalog.len())
                    .fold(0, |best, i| if weight(&catalog[i]) < weight(&catalog[best]) { i } else { best })
            }
            Init::LastPath => instance.catalog(ty).len() - 1,
        })
        .collect();
    let mut flow = FlowAssignment::all_or_nothing(instance, &choice);
    let mut paths = flow.path_flows().to_vec();
    let mut load = flow.edge_flows().to_vec();

    let mut iterations = 0;
    let mut report = verify_equilibrium(instance, &flow, config.equilibrium_check_tol);
    while defined && !report.passed && iterations < config.max_iterations {
        for ty in 0..instance.types().len() {
            let catalog = instance.catalog(ty);
            let r = &factors[ty];
            let edge_cost = |e: usize, x: T| {
                let c = &instance.edge(e).cost;
                r[e].expect("checked") * *c.a() * x.max(T::zero()).powi(c.degree() as i32) + *c.b()
            };
            for p in 0..catalog.len() {
                if paths[ty][p] <= T::zero() {
                    continue;
                }
                let costs: Vec<T> = catalog
                    .iter()
                    .map(|q| q.edges.iter().fold(T::zero(), |s, &e| s + edge_cost(e, load[e])))
                    .collect();
                let m = (0..costs.len()).fold(0, |b, i| if costs[i] < costs[b] { i } else { b });
                if m == p || costs[p] <= costs[m] {
                    continue;
                }
                let (from, to) = (&catalog[p], &catalog[m]);
                let excess = |delta: T| {
                    let lose = from
                        .edges
                        .iter()
                        .filter(|e| !to.contains(**e))
                        .fold(T::zero(), |s, &e| s + edge_cost(e, load[e] - delta));
                    let gain = to
                        .edges
                        .iter()
                        .filter(|e| !from.contains(**e))
                        .fold(T::zero(), |s, &e| s + edge_cost(e, load[e] + delta));
                    lose - gain
                };
                let amount = paths[ty][p];
                let delta = if excess(amount) >= T::zero() {
                    amount
                } else {
                    let (mut lo, mut hi) = (T::zero(), amount);
                    for _ in 0..BISECTION_STEPS {
                        let mid = (lo + hi) / T::from(2.0).unwrap();
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if excess(mid) > T::zero() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    (lo + hi) / T::from(2.0).unwrap()
                };
                paths[ty][p] = if delta >= amount { T::zero() } else { paths[ty][p] - delta };
                paths[ty][m] = paths[ty][m] + delta;
                for &e in &from.edges {
                    load[e] = load[e] - delta;
                }
                for &e in &to.edges {
                    load[e] = load[e] + delta;
                }
            }
        }
        iterations += 1;
        flow = FlowAssignment::from_path_flows_unchecked(instance, paths.clone());
        load = flow.edge_flows().to_vec();
        report = verify_equilibrium(instance, &flow, config.equilibrium_check_tol);
    }
    BestResponseResult {
        converged: report.passed,
        flow,
        iterations,
        report,
    }
}
