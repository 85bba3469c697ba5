use super::flow::FlowAssignment;
use super::instance::GameInstance;
use super::paths::Path;
use super::ModelError;
use crate::scalar::Scalar;

/// `Σ_{e∈p} (a_e·x_e^d + b_e)`.
pub fn true_path_cost<T: Scalar>(
    instance: &GameInstance<T>,
    flow: &FlowAssignment<T>,
    path: &Path,
) -> T {
    path.edges.iter().fold(T::zero(), |acc, &e| {
        acc + instance.edge(e).cost.evaluate(flow.edge_flow(e))
    })
}

/// `Σ_{e∈p} (r_θ(e)·a_e·x_e^d + b_e)` for user type `ty`.
pub fn perceived_path_cost<T: Scalar>(
    instance: &GameInstance<T>,
    flow: &FlowAssignment<T>,
    path: &Path,
    ty: usize,
) -> Result<T, ModelError> {
    let uncertainty = &instance.user_type(ty).uncertainty;
    path.edges.iter().try_fold(T::zero(), |acc, &e| {
        let edge = instance.edge(e);
        let r = uncertainty
            .on_edge(e)
            .ok_or_else(|| ModelError::MissingUncertainty(edge.id.clone()))?;
        Ok(acc + edge.cost.perceived(flow.edge_flow(e), r))
    })
}

/// `Σ_e C_e(x_e)·x_e` under true costs.
pub fn social_cost<T: Scalar>(instance: &GameInstance<T>, flow: &FlowAssignment<T>) -> T {
    instance
        .edges()
        .iter()
        .zip(flow.edge_flows())
        .fold(T::zero(), |acc, (edge, x)| {
            acc + edge.cost.evaluate(x) * x.clone()
        })
}

/// `Σ_e C_e(x_e)·x_e^θ`: the true cost borne by one type.
pub fn type_aggregate_cost<T: Scalar>(
    instance: &GameInstance<T>,
    flow: &FlowAssignment<T>,
    ty: usize,
) -> T {
    instance
        .edges()
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (e, edge)| {
            acc + edge.cost.evaluate(flow.edge_flow(e)) * flow.edge_flow_of_type(ty, e).clone()
        })
}
