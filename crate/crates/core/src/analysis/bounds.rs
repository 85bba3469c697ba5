use serde::Serialize;

use super::AnalysisError;
use crate::model::GameInstance;
use crate::scalar::Scalar;

fn undefined(r_max: f64, gamma: f64, degree: u32) -> AnalysisError {
    AnalysisError::BoundUndefined { r_max, gamma, degree }
}

fn check_profile(r_max: f64, gamma: f64, degree: u32) -> Result<(), AnalysisError> {
    let ok = r_max.is_finite() && r_max > 0.0 && gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 && degree >= 1;
    if ok {
        Ok(())
    } else {
        Err(undefined(r_max, gamma, degree))
    }
}

/// Price-of-anarchy bound `4/(4γ·r_max − r_max²)` for affine costs, defined
/// while `r_max < 4γ`.
pub fn poa_bound_linear(r_max: f64, gamma: f64) -> Result<f64, AnalysisError> {
    check_profile(r_max, gamma, 1)?;
    if r_max >= 4.0 * gamma {
        return Err(undefined(r_max, gamma, 1));
    }
    Ok(4.0 / (4.0 * gamma * r_max - r_max * r_max))
}

/// Bound for shifted monomials of degree `d`:
/// `(d+1)^{(d+1)/d} / (γ·r·(d+1)^{(d+1)/d} − d·r^{(d+1)/d})`, defined while
/// `r_max < (γ/d)^d·(d+1)^{d+1}`.
pub fn poa_bound_polynomial(r_max: f64, gamma: f64, degree: u32) -> Result<f64, AnalysisError> {
    check_profile(r_max, gamma, degree)?;
    let d = degree as f64;
    let limit = (gamma / d).powf(d) * (d + 1.0).powf(d + 1.0);
    if r_max >= limit {
        return Err(undefined(r_max, gamma, degree));
    }
    let k = (d + 1.0).powf((d + 1.0) / d);
    let denominator = gamma * r_max * k - d * r_max.powf((d + 1.0) / d);
    if denominator <= 0.0 {
        return Err(undefined(r_max, gamma, degree));
    }
    Ok(k / denominator)
}

/// Factors seen on one edge by the types whose catalogs use it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub edge: String,
    pub r_max: f64,
    pub gamma: f64,
    pub bound: f64,
}

/// Largest per-edge bound, evaluating the degree-`d` bound with each edge's
/// own `r_max(e)` and `γ(e)`.
pub fn poa_bound_edge_dependent<T: Scalar>(instance: &GameInstance<T>) -> Result<(f64, Vec<EdgeProfile>), AnalysisError> {
    let degree = instance.degree();
    let mut profiles = Vec::new();
    for (e, edge) in instance.edges().iter().enumerate() {
        let rs: Vec<f64> = (0..instance.types().len())
            .filter(|&ty| instance.type_uses_edge(ty, e))
            .map(|ty| {
                instance
                    .user_type(ty)
                    .uncertainty
                    .on_edge(e)
                    .map(Scalar::to_f64)
                    .ok_or_else(|| AnalysisError::UnsupportedUncertainty(format!("no factor on edge {}", edge.id)))
            })
            .collect::<Result<_, _>>()?;
        if rs.is_empty() {
            continue;
        }
        let r_max = rs.iter().cloned().fold(f64::MIN, f64::max);
        let r_min = rs.iter().cloned().fold(f64::MAX, f64::min);
        let gamma = r_min / r_max;
        let bound = poa_bound_polynomial(r_max, gamma, degree)?;
        profiles.push(EdgeProfile {
            edge: edge.id.clone(),
            r_max,
            gamma,
            bound,
        });
    }
    let worst = profiles.iter().map(|p| p.bound).fold(1.0, f64::max);
    Ok((worst, profiles))
}
