use std::collections::HashMap;

use crate::model::{derive_edge_flows, EdgeIdx, FlowAssignment, GameInstance, Path};
use crate::scalar::Real;

use super::objective::Objective;
use super::{Init, SolveResult, StepRule};

const BISECTION_STEPS: usize = 100;

/// Path-based Frank-Wolfe descent on a separable [`Objective`].
///
/// The linearized subproblem for a type is the cheapest catalog path under
/// the current edge gradients (ties go to the lowest path index).
#[derive(Clone, Debug)]
pub struct FrankWolfe<'a, T> {
    instance: &'a GameInstance<T>,
    objective: Objective<T>,
    rule: StepRule,
    path_flows: Vec<Vec<T>>,
    by_type: Vec<Vec<T>>,
    edge_flows: Vec<T>,
    /// Path moves of two types whose edge changes cancel.
    swaps: Vec<Swap>,
    iterations: usize,
}

impl<'a, T: Real> FrankWolfe<'a, T> {
    pub fn new(
        instance: &'a GameInstance<T>,
        objective: Objective<T>,
        init: Init,
        rule: StepRule,
    ) -> Self {
        let zeros: Vec<T> = vec![T::zero(); instance.edges().len()];
        let choice: Vec<usize> = (0..instance.types().len())
            .map(|ty| match init {
                Init::FreeFlowShortest => {
                    let weights: Vec<T> = (0..zeros.len())
                        .map(|e| objective.load_term(e, &zeros[e]) + *objective.linear_term(ty, e))
                        .collect();
                    cheapest(instance.catalog(ty), &weights).0
                }
                Init::LastPath => instance.catalog(ty).len() - 1,
            })
            .collect();
        let flow = FlowAssignment::all_or_nothing(instance, &choice);
        Self::from_flow(instance, objective, flow, rule)
    }

    /// Starts from a given feasible flow.
    pub fn from_flow(
        instance: &'a GameInstance<T>,
        objective: Objective<T>,
        flow: FlowAssignment<T>,
        rule: StepRule,
    ) -> Self {
        Self {
            instance,
            objective,
            rule,
            path_flows: flow.path_flows().to_vec(),
            by_type: flow.edge_flows_by_type().to_vec(),
            edge_flows: flow.edge_flows().to_vec(),
            swaps: matching_swaps(instance),
            iterations: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn objective_value(&self) -> T {
        self.objective.value_at(&self.by_type, &self.edge_flows)
    }

    pub fn flow(&self) -> FlowAssignment<T> {
        FlowAssignment::from_path_flows_unchecked(self.instance, self.path_flows.clone())
    }

    fn edge_gradients(&self, ty: usize) -> Vec<T> {
        self.edge_flows
            .iter()
            .enumerate()
            .map(|(e, x)| self.objective.load_term(e, x) + *self.objective.linear_term(ty, e))
            .collect()
    }

    /// Frank-Wolfe duality gap `Σ_θ Σ_p x_p^θ (g_p − min_q g_q)`.
    pub fn gap(&self) -> T {
        let mut gap = T::zero();
        for ty in 0..self.instance.types().len() {
            let weights = self.edge_gradients(ty);
            let catalog = self.instance.catalog(ty);
            let costs: Vec<T> = catalog.iter().map(|p| path_weight(p, &weights)).collect();
            let best = costs.iter().copied().fold(T::infinity(), T::min);
            for (x, g) in self.path_flows[ty].iter().zip(&costs) {
                if *x > T::zero() {
                    gap = gap + *x * (*g - best);
                }
            }
        }
        gap
    }

    /// One descent step.
    pub fn step(&mut self) {
        match self.rule {
            StepRule::ExactLineSearch | StepRule::Harmonic => self.classic_step(),
            StepRule::PairwiseExact => {
                self.pairwise_sweep();
                self.exchange_sweep();
            }
        }
        self.iterations += 1;
        let (by_type, total) = derive_edge_flows(self.instance, &self.path_flows);
        self.by_type = by_type;
        self.edge_flows = total;
    }

    fn classic_step(&mut self) {
        let types = self.instance.types().len();
        let edges = self.edge_flows.len();
        let mut targets = Vec::with_capacity(types);
        let mut delta_by_type = vec![vec![T::zero(); edges]; types];
        for ty in 0..types {
            let weights = self.edge_gradients(ty);
            let (best, _) = cheapest(self.instance.catalog(ty), &weights);
            targets.push(best);
            let demand = self.path_flows[ty].iter().fold(T::zero(), |a, x| a + *x);
            for &e in &self.instance.catalog(ty)[best].edges {
                delta_by_type[ty][e] = delta_by_type[ty][e] + demand;
            }
            for e in 0..edges {
                delta_by_type[ty][e] = delta_by_type[ty][e] - self.by_type[ty][e];
            }
        }
        let lambda = match self.rule {
            StepRule::Harmonic => T::from(2.0).unwrap() / T::from(self.iterations + 2).unwrap(),
            _ => {
                let delta: Vec<T> = (0..edges)
                    .map(|e| delta_by_type.iter().fold(T::zero(), |a, d| a + d[e]))
                    .collect();
                let mut constant = T::zero();
                for ty in 0..types {
                    for e in 0..edges {
                        constant = constant + *self.objective.linear_term(ty, e) * delta_by_type[ty][e];
                    }
                }
                let terms: Vec<(EdgeIdx, T, T)> = (0..edges)
                    .filter(|&e| delta[e] != T::zero())
                    .map(|e| (e, self.edge_flows[e], delta[e]))
                    .collect();
                self.line_search(&terms, constant)
            }
        };
        if lambda <= T::zero() {
            return;
        }
        for (ty, &best) in targets.iter().enumerate() {
            let demand = self.path_flows[ty].iter().fold(T::zero(), |a, x| a + *x);
            for (p, x) in self.path_flows[ty].iter_mut().enumerate() {
                let target = if p == best { demand } else { T::zero() };
                *x = if lambda >= T::one() {
                    target
                } else {
                    *x + lambda * (target - *x)
                };
            }
        }
    }

    /// For each type, moves flow from every used path to the currently
    /// cheapest one, each move sized by exact line search.
    fn pairwise_sweep(&mut self) {
        for ty in 0..self.instance.types().len() {
            let catalog = self.instance.catalog(ty);
            for p in 0..catalog.len() {
                if self.path_flows[ty][p] <= T::zero() {
                    continue;
                }
                let weights = self.edge_gradients(ty);
                let (best, best_cost) = cheapest(catalog, &weights);
                if best == p || path_weight(&catalog[p], &weights) <= best_cost {
                    continue;
                }
                let amount = self.path_flows[ty][p];
                let (from, to) = (&catalog[p], &catalog[best]);
                let mut terms: Vec<(EdgeIdx, T, T)> = Vec::new();
                let mut constant = T::zero();
                for &e in &to.edges {
                    if !from.contains(e) {
                        terms.push((e, self.edge_flows[e], amount));
                        constant = constant + *self.objective.linear_term(ty, e) * amount;
                    }
                }
                for &e in &from.edges {
                    if !to.contains(e) {
                        terms.push((e, self.edge_flows[e], -amount));
                        constant = constant - *self.objective.linear_term(ty, e) * amount;
                    }
                }
                let lambda = self.line_search(&terms, constant);
                if lambda <= T::zero() {
                    continue;
                }
                let shift = if lambda >= T::one() { amount } else { lambda * amount };
                self.path_flows[ty][p] = if lambda >= T::one() {
                    T::zero()
                } else {
                    self.path_flows[ty][p] - shift
                };
                self.path_flows[ty][best] = self.path_flows[ty][best] + shift;
                for &(e, _, d) in &terms {
                    let moved = if d > T::zero() { shift } else { -shift };
                    self.edge_flows[e] = self.edge_flows[e] + moved;
                    self.by_type[ty][e] = self.by_type[ty][e] + moved;
                }
            }
        }
    }

    /// Type `a` moves flow from path `i` to `j` while type `b` moves the
    /// same amount from `j'` to `i'`, where both moves change the same
    /// edges. Edge totals stay put, so the objective moves linearly and
    /// each swap is taken in full. Without these, types with nearly equal
    /// weights separate only through tiny single-type moves.
    fn exchange_sweep(&mut self) {
        if self.swaps.is_empty() {
            return;
        }
        let costs: Vec<Vec<T>> = (0..self.instance.types().len())
            .map(|ty| {
                let weights = self.edge_gradients(ty);
                self.instance.catalog(ty).iter().map(|p| path_weight(p, &weights)).collect()
            })
            .collect();
        for sw in &self.swaps {
            let (a, b) = (sw.a as usize, sw.b as usize);
            let [ai, aj, bi, bj] = sw.paths.map(|p| p as usize);
            if (costs[a][aj] - costs[a][ai]) + (costs[b][bi] - costs[b][bj]) >= T::zero() {
                continue;
            }
            let amount = self.path_flows[a][ai].min(self.path_flows[b][bj]);
            if amount <= T::zero() {
                continue;
            }
            self.path_flows[a][ai] = self.path_flows[a][ai] - amount;
            self.path_flows[a][aj] = self.path_flows[a][aj] + amount;
            self.path_flows[b][bj] = self.path_flows[b][bj] - amount;
            self.path_flows[b][bi] = self.path_flows[b][bi] + amount;
        }
    }

    /// Minimizes `λ ↦ F(x + λΔ)` on `[0, 1]` given the changed edges
    /// `(e, x_e, Δ_e)` and the constant linear part of the derivative.
    fn line_search(&self, terms: &[(EdgeIdx, T, T)], constant: T) -> T {
        let slope = |lambda: T| {
            terms.iter().fold(constant, |acc, &(e, x, d)| {
                let at = (x + lambda * d).max(T::zero());
                acc + self.objective.load_term(e, &at) * d
            })
        };
        let start = slope(T::zero());
        if start >= T::zero() {
            return T::zero();
        }
        let end = slope(T::one());
        if end <= T::zero() {
            return T::one();
        }
        if self.objective.degree == 1 {
            return (start / (start - end)).max(T::zero()).min(T::one());
        }
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..BISECTION_STEPS {
            let mid = (lo + hi) / T::from(2.0).unwrap();
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / T::from(2.0).unwrap()
    }

    /// Steps until the gap drops to `tol·max(1, |F|)` or the budget runs out.
    pub fn run(mut self, max_iterations: usize, tol: f64) -> SolveResult<T> {
        let tol = T::from(tol).unwrap();
        loop {
            let gap = self.gap();
            let value = self.objective_value();
            let converged = gap <= tol * value.abs().max(T::one());
            if converged || self.iterations >= max_iterations {
                return SolveResult {
                    flow: self.flow(),
                    potential_value: value,
                    converged,
                    iterations: self.iterations,
                    duality_gap: gap.max(T::zero()),
                };
            }
            self.step();
        }
    }
}

#[derive(Clone, Debug)]
struct Swap {
    a: u32,
    b: u32,
    /// `[i, j, i', j']`: `a` moves `i → j`, `b` moves `j' → i'`.
    paths: [u32; 4],
}

/// Beyond this many candidate swaps, or ordered path pairs to index, the
/// exchange step is skipped.
const MAX_SWAPS: usize = 200_000;
const MAX_PATH_PAIRS: usize = 500_000;

fn matching_swaps<T: Real>(instance: &GameInstance<T>) -> Vec<Swap> {
    let types = instance.types().len();
    let pairs: usize = (0..types).map(|ty| instance.catalog(ty).len().pow(2)).sum();
    if types < 2 || pairs > MAX_PATH_PAIRS {
        return Vec::new();
    }
    // Per type: (edges gained, edges lost) of each ordered path pair.
    let moves: Vec<HashMap<(Vec<EdgeIdx>, Vec<EdgeIdx>), Vec<(u32, u32)>>> = (0..types)
        .map(|ty| {
            let catalog = instance.catalog(ty);
            let mut map: HashMap<_, Vec<(u32, u32)>> = HashMap::new();
            for (i, from) in catalog.iter().enumerate() {
                for (j, to) in catalog.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let mut gained: Vec<EdgeIdx> = to.edges.iter().copied().filter(|e| !from.contains(*e)).collect();
                    let mut lost: Vec<EdgeIdx> = from.edges.iter().copied().filter(|e| !to.contains(*e)).collect();
                    gained.sort_unstable();
                    lost.sort_unstable();
                    map.entry((gained, lost)).or_default().push((i as u32, j as u32));
                }
            }
            map
        })
        .collect();
    let mut swaps = Vec::new();
    for a in 0..types {
        for b in (a + 1)..types {
            let mut keys: Vec<_> = moves[a].keys().filter(|k| moves[b].contains_key(*k)).collect();
            keys.sort();
            for key in keys {
                for &(i, j) in &moves[a][key] {
                    for &(bi, bj) in &moves[b][key] {
                        swaps.push(Swap {
                            a: a as u32,
                            b: b as u32,
                            paths: [i, j, bi, bj],
                        });
                        if swaps.len() > MAX_SWAPS {
                            return Vec::new();
                        }
                    }
                }
            }
        }
    }
    swaps
}

fn path_weight<T: Real>(path: &Path, weights: &[T]) -> T {
    path.edges.iter().fold(T::zero(), |acc, &e| acc + weights[e])
}

/// Index and weight of the lightest path; ties go to the lowest index.
fn cheapest<T: Real>(catalog: &[Path], weights: &[T]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (i, path) in catalog.iter().enumerate() {
        let w = path_weight(path, weights);
        if w < best.1 {
            best = (i, w);
        }
    }
    best
}
