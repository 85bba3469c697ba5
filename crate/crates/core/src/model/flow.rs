use super::instance::GameInstance;
use super::paths::EdgeIdx;
use super::ModelError;
use crate::scalar::Scalar;

/// Relative tolerance on `Σ_p x_p^θ = μ_θ`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Per-type path flows together with the edge flows they induce.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment<T> {
    path_flows: Vec<Vec<T>>,
    edge_flows_by_type: Vec<Vec<T>>,
    edge_flows: Vec<T>,
}

impl<T: Scalar> FlowAssignment<T> {
    /// Checks feasibility and derives edge flows.
    pub fn from_path_flows(
        instance: &GameInstance<T>,
        path_flows: Vec<Vec<T>>,
    ) -> Result<Self, ModelError> {
        check_feasible(instance, &path_flows)?;
        Ok(Self::from_path_flows_unchecked(instance, path_flows))
    }

    pub(crate) fn from_path_flows_unchecked(
        instance: &GameInstance<T>,
        path_flows: Vec<Vec<T>>,
    ) -> Self {
        let (edge_flows_by_type, edge_flows) = derive_edge_flows(instance, &path_flows);
        Self {
            path_flows,
            edge_flows_by_type,
            edge_flows,
        }
    }

    /// Splits one total flow per path among the types in proportion to
    /// their demand. Every type must share the same catalog.
    pub fn from_total_path_flows(
        instance: &GameInstance<T>,
        totals: &[T],
    ) -> Result<Self, ModelError> {
        let total_demand = instance.total_demand();
        if total_demand.is_zero() {
            return Err(ModelError::Infeasible("instance has zero total demand".into()));
        }
        let mut path_flows = Vec::with_capacity(instance.types().len());
        for (ty, user) in instance.types().iter().enumerate() {
            if instance.catalog(ty) != instance.catalog(0) || totals.len() != instance.catalog(ty).len() {
                return Err(ModelError::Infeasible(
                    "types do not share one path catalog".into(),
                ));
            }
            let share = user.demand.clone() / total_demand.clone();
            path_flows.push(totals.iter().map(|x| x.clone() * share.clone()).collect());
        }
        Self::from_path_flows(instance, path_flows)
    }

    /// All of each type's demand on one path per type.
    pub fn all_or_nothing(instance: &GameInstance<T>, choice: &[usize]) -> Self {
        let path_flows = instance
            .types()
            .iter()
            .enumerate()
            .map(|(ty, user)| {
                let mut flows = vec![T::zero(); instance.catalog(ty).len()];
                flows[choice[ty]] = user.demand.clone();
                flows
            })
            .collect();
        Self::from_path_flows_unchecked(instance, path_flows)
    }

    pub fn path_flows(&self) -> &[Vec<T>] {
        &self.path_flows
    }

    pub fn path_flow(&self, ty: usize, path: usize) -> &T {
        &self.path_flows[ty][path]
    }

    pub fn edge_flows(&self) -> &[T] {
        &self.edge_flows
    }

    pub fn edge_flow(&self, edge: EdgeIdx) -> &T {
        &self.edge_flows[edge]
    }

    pub fn edge_flows_by_type(&self) -> &[Vec<T>] {
        &self.edge_flows_by_type
    }

    pub fn edge_flow_of_type(&self, ty: usize, edge: EdgeIdx) -> &T {
        &self.edge_flows_by_type[ty][edge]
    }

    /// Flow summed over types for each path of the shared catalog.
    pub fn total_path_flows(&self) -> Vec<T> {
        let len = self.path_flows.first().map_or(0, Vec::len);
        (0..len)
            .map(|p| {
                self.path_flows
                    .iter()
                    .filter_map(|flows| flows.get(p))
                    .fold(T::zero(), |acc, x| acc + x.clone())
            })
            .collect()
    }
}

fn check_feasible<T: Scalar>(
    instance: &GameInstance<T>,
    path_flows: &[Vec<T>],
) -> Result<(), ModelError> {
    if path_flows.len() != instance.types().len() {
        return Err(ModelError::Infeasible(format!(
            "expected flows for {} types, got {}",
            instance.types().len(),
            path_flows.len()
        )));
    }
    let tol = T::from_f64(FEASIBILITY_TOL);
    for (ty, flows) in path_flows.iter().enumerate() {
        let user = instance.user_type(ty);
        if flows.len() != instance.catalog(ty).len() {
            return Err(ModelError::Infeasible(format!(
                "type {} has {} paths, got {} flows",
                user.id,
                instance.catalog(ty).len(),
                flows.len()
            )));
        }
        if flows.iter().any(|x| *x < T::zero()) {
            return Err(ModelError::Infeasible(format!(
                "negative path flow for type {}",
                user.id
            )));
        }
        let sum = flows.iter().fold(T::zero(), |acc, x| acc + x.clone());
        if (sum.clone() - user.demand.clone()).abs() > tol.clone() * user.demand.clone() {
            return Err(ModelError::Infeasible(format!(
                "type {} routes {} but demands {}",
                user.id, sum, user.demand
            )));
        }
    }
    Ok(())
}

/// `x_e^θ = Σ_{p ∋ e} x_p^θ` and `x_e = Σ_θ x_e^θ`.
pub fn derive_edge_flows<T: Scalar>(
    instance: &GameInstance<T>,
    path_flows: &[Vec<T>],
) -> (Vec<Vec<T>>, Vec<T>) {
    let edge_count = instance.edges().len();
    let mut total = vec![T::zero(); edge_count];
    let by_type = path_flows
        .iter()
        .enumerate()
        .map(|(ty, flows)| {
            let mut per_edge = vec![T::zero(); edge_count];
            for (path, x) in instance.catalog(ty).iter().zip(flows) {
                for &e in &path.edges {
                    per_edge[e] = per_edge[e].clone() + x.clone();
                }
            }
            for (acc, x) in total.iter_mut().zip(&per_edge) {
                *acc = acc.clone() + x.clone();
            }
            per_edge
        })
        .collect();
    (by_type, total)
}
