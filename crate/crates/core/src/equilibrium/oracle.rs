use crate::model::{FlowAssignment, GameInstance};
use crate::scalar::Real;

use super::objective::potential_weights;
use super::EquilibriumError;

/// Largest total catalog size the exhaustive oracle accepts.
pub const ORACLE_PATH_LIMIT: usize = 6;

const REFINE_SWEEPS: usize = 400;
const GOLDEN_STEPS: usize = 80;

/// Potential evaluated straight from path flows, without the solver's
/// edge-gradient machinery.
struct PathPotential<'a, T> {
    instance: &'a GameInstance<T>,
    kappa_a: Vec<T>,
    /// `w_θ·Σ_{e∈p} b_e` per type and path.
    path_constants: Vec<Vec<T>>,
}

impl<'a, T: Real> PathPotential<'a, T> {
    fn new(instance: &'a GameInstance<T>) -> Result<Self, EquilibriumError> {
        let weights = potential_weights(instance)?;
        let kappa_a = instance
            .edges()
            .iter()
            .zip(&weights.edge_factors)
            .map(|(e, k)| *k * *e.cost.a())
            .collect();
        let path_constants = (0..instance.types().len())
            .map(|ty| {
                instance
                    .catalog(ty)
                    .iter()
                    .map(|p| {
                        weights.type_weights[ty]
                            * p.edges.iter().fold(T::zero(), |s, &e| s + *instance.edge(e).cost.b())
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            instance,
            kappa_a,
            path_constants,
        })
    }

    fn eval(&self, flows: &[Vec<T>]) -> T {
        let mut load = vec![T::zero(); self.kappa_a.len()];
        let mut total = T::zero();
        for (ty, xs) in flows.iter().enumerate() {
            for (p, &x) in xs.iter().enumerate() {
                total = total + x * self.path_constants[ty][p];
                for &e in &self.instance.catalog(ty)[p].edges {
                    load[e] = load[e] + x;
                }
            }
        }
        let d = self.instance.degree();
        let d1 = T::from(d + 1).unwrap();
        for (ka, x) in self.kappa_a.iter().zip(&load) {
            total = total + *ka * x.powi(d as i32 + 1) / d1;
        }
        total
    }
}

/// Calls `visit` with every split of `units` into `parts` nonnegative parts.
fn compositions(units: usize, parts: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(units);
        visit(prefix);
        prefix.pop();
        return;
    }
    for k in 0..=units {
        prefix.push(k);
        compositions(units - k, parts - 1, prefix, visit);
        prefix.pop();
    }
}

/// Minimizes the potential over a product-of-simplices grid with
/// `resolution` steps per type, then polishes the best grid point by
/// pairwise golden-section moves. Test oracle for tiny instances.
pub fn brute_force_equilibrium<T: Real>(
    instance: &GameInstance<T>,
    resolution: usize,
) -> Result<FlowAssignment<T>, EquilibriumError> {
    let paths = instance.total_paths();
    if paths > ORACLE_PATH_LIMIT {
        return Err(EquilibriumError::TooManyPaths {
            paths,
            limit: ORACLE_PATH_LIMIT,
        });
    }
    let resolution = resolution.max(1);
    let phi = PathPotential::new(instance)?;
    let demands: Vec<T> = instance.types().iter().map(|t| t.demand).collect();
    let sizes: Vec<usize> = (0..demands.len()).map(|ty| instance.catalog(ty).len()).collect();

    let mut per_type: Vec<Vec<Vec<T>>> = Vec::new();
    for (ty, &k) in sizes.iter().enumerate() {
        let mut points = Vec::new();
        let unit = demands[ty] / T::from(resolution).unwrap();
        compositions(resolution, k, &mut Vec::new(), &mut |c| {
            points.push(c.iter().map(|&n| unit * T::from(n).unwrap()).collect());
        });
        per_type.push(points);
    }

    let mut best: Option<(T, Vec<Vec<T>>)> = None;
    let mut index = vec![0usize; per_type.len()];
    loop {
        let candidate: Vec<Vec<T>> = index
            .iter()
            .enumerate()
            .map(|(ty, &i)| per_type[ty][i].clone())
            .collect();
        let value = phi.eval(&candidate);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, candidate));
        }
        let mut ty = 0;
        while ty < index.len() {
            index[ty] += 1;
            if index[ty] < per_type[ty].len() {
                break;
            }
            index[ty] = 0;
            ty += 1;
        }
        if ty == index.len() {
            break;
        }
    }
    let (mut value, mut flows) = best.expect("at least one grid point");

    let golden = T::from((5f64.sqrt() - 1.0) / 2.0).unwrap();
    for _ in 0..REFINE_SWEEPS {
        let before = value;
        for ty in 0..flows.len() {
            for i in 0..sizes[ty] {
                for j in (i + 1)..sizes[ty] {
                    // Move t from path i to path j, t ∈ [−x_j, x_i].
                    let (mut lo, mut hi) = (-flows[ty][j], flows[ty][i]);
                    if hi - lo <= T::zero() {
                        continue;
                    }
                    let at = |t: T, flows: &mut Vec<Vec<T>>| {
                        let (xi, xj) = (flows[ty][i], flows[ty][j]);
                        flows[ty][i] = (xi - t).max(T::zero());
                        flows[ty][j] = (xj + t).max(T::zero());
                        let v = phi.eval(flows);
                        flows[ty][i] = xi;
                        flows[ty][j] = xj;
                        v
                    };
                    let mut a = hi - golden * (hi - lo);
                    let mut b = lo + golden * (hi - lo);
                    let mut fa = at(a, &mut flows);
                    let mut fb = at(b, &mut flows);
                    for _ in 0..GOLDEN_STEPS {
                        if fa < fb {
                            hi = b;
                            b = a;
                            fb = fa;
                            a = hi - golden * (hi - lo);
                            fa = at(a, &mut flows);
                        } else {
                            lo = a;
                            a = b;
                            fa = fb;
                            b = lo + golden * (hi - lo);
                            fb = at(b, &mut flows);
                        }
                    }
                    let t = (lo + hi) / T::from(2.0).unwrap();
                    let v = at(t, &mut flows);
                    if v < value {
                        let (xi, xj) = (flows[ty][i], flows[ty][j]);
                        flows[ty][i] = (xi - t).max(T::zero());
                        flows[ty][j] = (xj + t).max(T::zero());
                        value = v;
                    }
                }
            }
        }
        if before - value <= T::epsilon() * value.abs().max(T::one()) {
            break;
        }
    }
    Ok(FlowAssignment::from_path_flows_unchecked(instance, flows))
}
