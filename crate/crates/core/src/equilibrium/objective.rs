use crate::model::{EdgeIdx, FlowAssignment, GameInstance, Uncertainty};
use crate::scalar::Scalar;

use super::EquilibriumError;

/// Per-type weights `w_θ` and per-edge factors `κ_e` with
/// `w_θ·r_θ(e) = κ_e` on every congestible edge a type can use.
///
/// With these, `Σ_e κ_e·a_e·x_e^{d+1}/(d+1) + Σ_{θ,e} w_θ·b_e·x_e^θ` has
/// gradient `w_θ·Ĉ_p^θ` in `x_p^θ`, so its minimizers are equilibria. For
/// scalar factors `w_θ = 1/r_θ` and `κ_e = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialWeights<T> {
    pub type_weights: Vec<T>,
    pub edge_factors: Vec<T>,
}

/// Outcome of [`is_potential_compatible`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    pub violating_edge: Option<String>,
    pub diagnosis: Option<String>,
}

fn close<T: Scalar>(x: &T, y: &T) -> bool {
    let scale = x.abs().max_of(y.abs());
    let tol = (64.0 * T::unit_roundoff()).max(1e-12);
    (x.clone() - y.clone()).abs() <= T::from_f64(tol) * scale
}

/// Types whose catalog uses each congestible edge, in type order.
fn edge_users<T: Scalar>(instance: &GameInstance<T>) -> Vec<Vec<usize>> {
    let mut users = vec![Vec::new(); instance.edges().len()];
    for ty in 0..instance.types().len() {
        let mut seen = vec![false; instance.edges().len()];
        for path in instance.catalog(ty) {
            for &e in &path.edges {
                if !seen[e] {
                    seen[e] = true;
                    users[e].push(ty);
                }
            }
        }
    }
    for (e, list) in users.iter_mut().enumerate() {
        if instance.edge(e).cost.is_constant() {
            list.clear();
        }
    }
    users
}

struct Incompatibility {
    edge: EdgeIdx,
    message: String,
}

fn factor<T: Scalar>(
    instance: &GameInstance<T>,
    ty: usize,
    e: EdgeIdx,
) -> Result<T, Incompatibility> {
    instance
        .user_type(ty)
        .uncertainty
        .on_edge(e)
        .cloned()
        .ok_or_else(|| Incompatibility {
            edge: e,
            message: format!(
                "type {} has no uncertainty factor on edge {}",
                instance.user_type(ty).id,
                instance.edge(e).id
            ),
        })
}

fn solve_weights<T: Scalar>(
    instance: &GameInstance<T>,
) -> Result<PotentialWeights<T>, Incompatibility> {
    let users = edge_users(instance);
    let type_count = instance.types().len();
    let mut edges_of_type: Vec<Vec<EdgeIdx>> = vec![Vec::new(); type_count];
    for (e, list) in users.iter().enumerate() {
        for &ty in list {
            edges_of_type[ty].push(e);
        }
    }

    // Propagate from the first type of each connected group, then check
    // every edge in index order.
    let mut weights: Vec<Option<T>> = vec![None; type_count];
    for root in 0..type_count {
        if weights[root].is_some() {
            continue;
        }
        weights[root] = Some(match &instance.user_type(root).uncertainty {
            Uncertainty::Uniform(r) => T::one() / r.clone(),
            Uncertainty::PerEdge(_) => T::one(),
        });
        let mut queue = vec![root];
        while let Some(ty) = queue.pop() {
            let w = weights[ty].clone().expect("assigned before queued");
            for &e in &edges_of_type[ty] {
                let kappa = w.clone() * factor(instance, ty, e)?;
                for &other in &users[e] {
                    if weights[other].is_none() {
                        weights[other] = Some(kappa.clone() / factor(instance, other, e)?);
                        queue.push(other);
                    }
                }
            }
        }
    }
    let type_weights: Vec<T> = weights
        .into_iter()
        .map(|w| w.expect("every type visited"))
        .collect();

    let mut edge_factors = vec![T::one(); instance.edges().len()];
    for (e, list) in users.iter().enumerate() {
        let mut kappa: Option<T> = None;
        for &ty in list {
            let here = type_weights[ty].clone() * factor(instance, ty, e)?;
            match &kappa {
                None => kappa = Some(here),
                Some(k) if close(k, &here) => {}
                Some(_) => {
                    return Err(Incompatibility {
                        edge: e,
                        message: format!(
                            "types sharing edge {} perceive it with inconsistent uncertainty",
                            instance.edge(e).id
                        ),
                    })
                }
            }
        }
        if let Some(k) = kappa {
            edge_factors[e] = k;
        }
    }
    Ok(PotentialWeights {
        type_weights,
        edge_factors,
    })
}

/// Solves for the weights; fails on the lowest-index edge whose users
/// cannot agree on one `κ_e`.
pub fn potential_weights<T: Scalar>(
    instance: &GameInstance<T>,
) -> Result<PotentialWeights<T>, EquilibriumError> {
    solve_weights(instance).map_err(|inc| EquilibriumError::NotPotentialCompatible(inc.message))
}

/// Whether the instance admits a potential; scalar uncertainty always does.
pub fn is_potential_compatible<T: Scalar>(instance: &GameInstance<T>) -> Compatibility {
    match solve_weights(instance) {
        Ok(_) => Compatibility {
            compatible: true,
            violating_edge: None,
            diagnosis: None,
        },
        Err(inc) => {
            // Blame the lowest-index edge whose users disagree on r_θ(e);
            // one always exists when the weights fail.
            let users = edge_users(instance);
            let literal = users.iter().enumerate().find_map(|(e, list)| {
                let mut values = list.iter().map(|&ty| instance.user_type(ty).uncertainty.on_edge(e));
                let first = values.next()?;
                values
                    .any(|v| match (v, first) {
                        (Some(v), Some(f)) => !close(v, f),
                        _ => true,
                    })
                    .then_some(e)
            });
            Compatibility {
                compatible: false,
                violating_edge: Some(instance.edge(literal.unwrap_or(inc.edge)).id.clone()),
                diagnosis: Some(inc.message),
            }
        }
    }
}

/// Separable convex objective
/// `F(x) = Σ_e c_e·x_e^{d+1}/(d+1) + Σ_{θ,e} β_{θ,e}·x_e^θ`
/// with edge-wise gradient `c_e·x_e^d + β_{θ,e}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective<T> {
    pub(crate) congestion: Vec<T>,
    pub(crate) linear: Vec<Vec<T>>,
    pub(crate) degree: u32,
}

impl<T: Scalar> Objective<T> {
    /// The potential whose minimizers are the equilibria.
    pub fn potential(instance: &GameInstance<T>) -> Result<Self, EquilibriumError> {
        let weights = potential_weights(instance)?;
        Ok(Self {
            congestion: instance
                .edges()
                .iter()
                .zip(&weights.edge_factors)
                .map(|(edge, k)| k.clone() * edge.cost.a().clone())
                .collect(),
            linear: weights
                .type_weights
                .iter()
                .map(|w| {
                    instance
                        .edges()
                        .iter()
                        .map(|edge| w.clone() * edge.cost.b().clone())
                        .collect()
                })
                .collect(),
            degree: instance.degree(),
        })
    }

    /// Social cost `Σ_e (a_e·x_e^{d+1} + b_e·x_e)`.
    pub fn social(instance: &GameInstance<T>) -> Self {
        let d1 = T::from_usize(instance.degree() as usize + 1);
        Self {
            congestion: instance
                .edges()
                .iter()
                .map(|edge| d1.clone() * edge.cost.a().clone())
                .collect(),
            linear: vec![
                instance.edges().iter().map(|e| e.cost.b().clone()).collect();
                instance.types().len()
            ],
            degree: instance.degree(),
        }
    }

    pub fn value_at(&self, edge_flows_by_type: &[Vec<T>], edge_flows: &[T]) -> T {
        let d1 = T::from_usize(self.degree as usize + 1);
        let mut total = T::zero();
        for (c, x) in self.congestion.iter().zip(edge_flows) {
            if !c.is_zero() {
                total = total + c.clone() * x.powu(self.degree + 1) / d1.clone();
            }
        }
        for (betas, flows) in self.linear.iter().zip(edge_flows_by_type) {
            for (beta, x) in betas.iter().zip(flows) {
                total = total + beta.clone() * x.clone();
            }
        }
        total
    }

    pub fn value(&self, flow: &FlowAssignment<T>) -> T {
        self.value_at(flow.edge_flows_by_type(), flow.edge_flows())
    }

    /// `c_e·x^d`, the type-independent part of the edge gradient.
    pub fn load_term(&self, edge: EdgeIdx, x: &T) -> T {
        self.congestion[edge].clone() * x.powu(self.degree)
    }

    pub fn linear_term(&self, ty: usize, edge: EdgeIdx) -> &T {
        &self.linear[ty][edge]
    }
}

/// `Φ(x)` for a potential-compatible instance.
pub fn potential_value<T: Scalar>(
    instance: &GameInstance<T>,
    flow: &FlowAssignment<T>,
) -> Result<T, EquilibriumError> {
    Ok(Objective::potential(instance)?.value(flow))
}
