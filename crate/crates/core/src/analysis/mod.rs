//! Price-of-anarchy bounds, empirical inefficiency and executable forms of
//! the structural results on cautious routing.

mod bounds;
mod checks;
mod generator;
mod suites;

use serde::Serialize;
use thiserror::Error;

pub use bounds::{poa_bound_edge_dependent, poa_bound_linear, poa_bound_polynomial, EdgeProfile};
pub use checks::{
    check_lemma1, check_lemma2, check_lemma3, check_lemma5, check_thm1, check_thm3,
    check_thm4, two_commodity_shape,
};
pub use generator::{generate_random_instance, Family, RandomProfile, UncertaintySampling, MAX_R_OVER_GAMMA};
pub use suites::{run_suite, SuiteKind, SuiteOptions, SuiteReport};

use crate::equilibrium::{solve_equilibrium, solve_social_optimum, EquilibriumError, SolverConfig};
use crate::model::{social_cost, FlowAssignment, GameInstance, ModelError, Uncertainty};
use crate::topology::TopologyError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("bound undefined for r_max = {r_max}, gamma = {gamma}, degree {degree}")]
    BoundUndefined { r_max: f64, gamma: f64, degree: u32 },
    #[error("not a two-commodity instance: {0}")]
    NotTwoCommodity(String),
    #[error("unsupported uncertainty: {0}")]
    UnsupportedUncertainty(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Solver(#[from] EquilibriumError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Solver settings and the relative tolerance used by every check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub solver: SolverConfig,
    /// Inequalities are asserted up to `rel_tol` times the compared cost.
    pub rel_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig {
                potential_gap_tol: 1e-12,
                ..SolverConfig::default()
            },
            rel_tol: 1e-6,
        }
    }
}

/// Spread of the uncertainty factors of an instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyProfile {
    pub r_values: Vec<f64>,
    pub r_max: f64,
    pub r_min: f64,
    pub gamma: f64,
}

impl UncertaintyProfile {
    pub fn new(r_values: Vec<f64>) -> Result<Self, AnalysisError> {
        if r_values.is_empty() || r_values.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(AnalysisError::InvalidInput("uncertainty factors must be positive".into()));
        }
        let r_max = r_values.iter().cloned().fold(f64::MIN, f64::max);
        let r_min = r_values.iter().cloned().fold(f64::MAX, f64::min);
        Ok(Self {
            r_values,
            r_max,
            r_min,
            gamma: r_min / r_max,
        })
    }

    /// All factors of all types, per edge where edge-dependent.
    pub fn of_instance<T: crate::scalar::Scalar>(instance: &GameInstance<T>) -> Result<Self, AnalysisError> {
        let mut values = Vec::new();
        for user in instance.types() {
            match &user.uncertainty {
                Uncertainty::Uniform(r) => values.push(r.to_f64()),
                Uncertainty::PerEdge(map) => values.extend(map.values().map(|r| r.to_f64())),
            }
        }
        Self::new(values)
    }
}

/// Outcome of one executable statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Whether the instance satisfies the statement's hypotheses; failures
    /// outside them are reported but expected.
    pub in_hypothesis: bool,
    pub holds: bool,
    /// Signed slack; its orientation is documented per check.
    pub margin: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl CheckResult {
    pub fn failed_in_hypothesis(&self) -> bool {
        self.in_hypothesis && !self.holds
    }
}

/// Equilibrium and optimum of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct PoaSample {
    pub equilibrium: FlowAssignment<f64>,
    pub optimum: FlowAssignment<f64>,
    pub cost_equilibrium: f64,
    pub cost_optimum: f64,
    pub poa: f64,
}

pub fn measure_poa(instance: &GameInstance<f64>, config: &SolverConfig) -> Result<PoaSample, AnalysisError> {
    let eq = solve_equilibrium(instance, config)?.into_converged()?;
    let opt = solve_social_optimum(instance, config)?.into_converged()?;
    let cost_equilibrium = social_cost(instance, &eq.flow);
    let cost_optimum = social_cost(instance, &opt.flow);
    let poa = if cost_optimum > 0.0 {
        cost_equilibrium / cost_optimum
    } else {
        1.0
    };
    Ok(PoaSample {
        equilibrium: eq.flow,
        optimum: opt.flow,
        cost_equilibrium,
        cost_optimum,
        poa,
    })
}

/// `C(x̃)/C(x*)`; 1 when the optimum costs nothing.
pub fn empirical_poa(instance: &GameInstance<f64>, config: &SolverConfig) -> Result<f64, AnalysisError> {
    Ok(measure_poa(instance, config)?.poa)
}

/// The analytic bound matching the instance: per-edge when factors vary
/// by edge, otherwise the degree-`d` bound on `(r_max, γ)`.
pub fn analytic_poa_bound<T: crate::scalar::Scalar>(instance: &GameInstance<T>) -> Result<f64, AnalysisError> {
    let edge_dependent = instance
        .types()
        .iter()
        .any(|t| matches!(t.uncertainty, Uncertainty::PerEdge(_)));
    if edge_dependent {
        return Ok(poa_bound_edge_dependent(instance)?.0);
    }
    let profile = UncertaintyProfile::of_instance(instance)?;
    poa_bound_polynomial(profile.r_max, profile.gamma, instance.degree())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub social_cost_equilibrium: f64,
    pub social_cost_optimum: f64,
    pub empirical_poa: f64,
    /// `None` outside the bound's validity region.
    pub analytic_poa_bound: Option<f64>,
    pub uncertainty: UncertaintyProfile,
    pub checks: Vec<CheckResult>,
}

/// Solves the instance and runs every check whose inputs it provides.
pub fn analyze(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<AnalysisReport, AnalysisError> {
    let sample = measure_poa(instance, &config.solver)?;
    let uncertainty = UncertaintyProfile::of_instance(instance)?;
    let bound = analytic_poa_bound(instance).ok();
    let mut checks = Vec::new();
    if let Some(b) = bound {
        let tol = 1e-4;
        checks.push(CheckResult {
            name: "poa".into(),
            in_hypothesis: true,
            holds: sample.poa <= b + tol,
            margin: b - sample.poa,
            tolerance: tol,
            note: None,
        });
    }
    let uniform: Option<Vec<f64>> = instance
        .types()
        .iter()
        .map(|t| t.uncertainty.as_uniform().copied())
        .collect();
    if let Some(rs) = &uniform {
        if rs.windows(2).all(|w| w[0] == w[1]) {
            checks.push(check_thm1(instance, rs[0], config)?);
        }
        checks.push(check_lemma1(instance, &sample.optimum, config)?);
    }
    if two_commodity_shape(instance).is_ok() {
        checks.push(check_thm3(instance, config)?);
        checks.push(check_thm4(instance, config)?);
        checks.push(check_lemma3(instance, config)?);
    }
    Ok(AnalysisReport {
        social_cost_equilibrium: sample.cost_equilibrium,
        social_cost_optimum: sample.cost_optimum,
        empirical_poa: sample.poa,
        analytic_poa_bound: bound,
        uncertainty,
        checks,
    })
}
