use serde::Serialize;

use crate::model::{perceived_path_cost, FlowAssignment, GameInstance};
use crate::scalar::Scalar;

/// Used path whose perceived cost exceeds the type's cheapest path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub type_id: String,
    pub type_index: usize,
    pub path: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport<T> {
    pub passed: bool,
    pub tolerance: f64,
    /// Largest `(Ĉ_p − min_q Ĉ_q)/(1 + min_q Ĉ_q)` over used paths.
    pub worst_violation: T,
    pub violation: Option<Violation>,
    /// Set when a perceived cost could not be evaluated.
    pub error: Option<String>,
}

/// Checks the equilibrium condition: for every type, every path carrying
/// more than `tol·μ_θ` has perceived cost within `tol·(1 + min)` of the
/// cheapest path in the type's catalog.
pub fn verify_equilibrium<T: Scalar>(
    instance: &GameInstance<T>,
    flow: &FlowAssignment<T>,
    tol: f64,
) -> EquilibriumReport<T> {
    let tol_t = T::from_f64(tol);
    let mut worst = T::zero();
    let mut violation = None;
    for (ty, user) in instance.types().iter().enumerate() {
        let costs: Result<Vec<T>, _> = instance
            .catalog(ty)
            .iter()
            .map(|p| perceived_path_cost(instance, flow, p, ty))
            .collect();
        let costs = match costs {
            Ok(c) => c,
            Err(err) => {
                return EquilibriumReport {
                    passed: false,
                    tolerance: tol,
                    worst_violation: worst,
                    violation: None,
                    error: Some(err.to_string()),
                }
            }
        };
        let min = costs
            .iter()
            .cloned()
            .reduce(|a, b| a.min_of(b))
            .expect("catalogs are nonempty");
        let threshold = tol_t.clone() * user.demand.clone();
        for (p, cost) in costs.iter().enumerate() {
            if *flow.path_flow(ty, p) <= threshold {
                continue;
            }
            let excess = (cost.clone() - min.clone()) / (T::one() + min.clone());
            if excess > worst {
                worst = excess;
                violation = Some(Violation {
                    type_id: user.id.clone(),
                    type_index: ty,
                    path: p,
                });
            }
        }
    }
    let passed = worst <= tol_t;
    EquilibriumReport {
        passed,
        tolerance: tol,
        worst_violation: worst,
        violation: if passed { None } else { violation },
        error: None,
    }
}
