//! Equilibria, social optima and their verification.

mod best_response;
mod frank_wolfe;
mod objective;
mod oracle;
mod verify;

use thiserror::Error;

pub use best_response::{best_response_dynamics, BestResponseResult};
pub use frank_wolfe::FrankWolfe;
pub use objective::{
    is_potential_compatible, potential_value, potential_weights, Compatibility, Objective,
    PotentialWeights,
};
pub use oracle::{brute_force_equilibrium, ORACLE_PATH_LIMIT};
pub use verify::{verify_equilibrium, EquilibriumReport, Violation};

use crate::model::{FlowAssignment, GameInstance, ModelError};
use crate::scalar::Real;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EquilibriumError {
    #[error("instance has no potential: {0}")]
    NotPotentialCompatible(String),
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    DidNotConverge { iterations: usize, gap: f64 },
    #[error("{paths} paths exceed the oracle limit of {limit}")]
    TooManyPaths { paths: usize, limit: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Classic Frank-Wolfe: all-or-nothing direction, exact line search.
    ExactLineSearch,
    /// Classic Frank-Wolfe with the step `2/(k+2)`.
    Harmonic,
    /// Pairwise Frank-Wolfe: per type, flow moves from used paths to the
    /// cheapest path with an exact line search per move.
    #[default]
    PairwiseExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Init {
    /// All-or-nothing on the cheapest path at zero flow.
    #[default]
    FreeFlowShortest,
    /// All-or-nothing on the last catalog path.
    LastPath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub potential_gap_tol: f64,
    pub step_rule: StepRule,
    pub equilibrium_check_tol: f64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            potential_gap_tol: 1e-10,
            step_rule: StepRule::default(),
            equilibrium_check_tol: 1e-6,
            init: Init::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), EquilibriumError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.max_iterations == 0 {
            return Err(EquilibriumError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !positive(self.potential_gap_tol) {
            return Err(EquilibriumError::InvalidConfig("potential_gap_tol must be positive".into()));
        }
        if !positive(self.equilibrium_check_tol) {
            return Err(EquilibriumError::InvalidConfig(
                "equilibrium_check_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T> {
    pub flow: FlowAssignment<T>,
    /// Objective value at `flow`: the potential for equilibria, the social
    /// cost for optima.
    pub potential_value: T,
    pub converged: bool,
    pub iterations: usize,
    pub duality_gap: T,
}

impl<T: Real> SolveResult<T> {
    /// Turns a non-converged result into [`EquilibriumError::DidNotConverge`].
    pub fn into_converged(self) -> Result<Self, EquilibriumError> {
        if self.converged {
            Ok(self)
        } else {
            Err(EquilibriumError::DidNotConverge {
                iterations: self.iterations,
                gap: crate::scalar::Scalar::to_f64(&self.duality_gap),
            })
        }
    }
}

/// Equilibrium as the minimizer of the potential.
pub fn solve_equilibrium<T: Real>(
    instance: &GameInstance<T>,
    config: &SolverConfig,
) -> Result<SolveResult<T>, EquilibriumError> {
    config.validate()?;
    let objective = Objective::potential(instance)?;
    Ok(FrankWolfe::new(instance, objective, config.init, config.step_rule)
        .run(config.max_iterations, config.potential_gap_tol))
}

/// Flow minimizing the social cost; uncertainty plays no role.
pub fn solve_social_optimum<T: Real>(
    instance: &GameInstance<T>,
    config: &SolverConfig,
) -> Result<SolveResult<T>, EquilibriumError> {
    config.validate()?;
    let objective = Objective::social(instance);
    Ok(FrankWolfe::new(instance, objective, config.init, config.step_rule)
        .run(config.max_iterations, config.potential_gap_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{social_cost, CostFunction, InstanceBuilder, UncertaintySpec};
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn single_edge<T: crate::scalar::Scalar>(a: T, b: T, demand: T, r: T) -> GameInstance<T> {
        let mut bld = InstanceBuilder::new();
        bld.node("s");
        bld.node("t");
        bld.edge("e", "s", "t", CostFunction::linear(a, b).unwrap()).unwrap();
        bld.user_type("u", "s", "t", demand, UncertaintySpec::Uniform(r));
        bld.build().unwrap()
    }

    fn pigou(epsilon: f64, r: f64) -> GameInstance<f64> {
        let mut b = InstanceBuilder::<f64>::new();
        b.node("s");
        b.node("t");
        b.edge("e1", "s", "t", CostFunction::linear(0.25, 2.5).unwrap()).unwrap();
        b.edge("e2", "s", "t", CostFunction::linear(1.0, 0.0).unwrap()).unwrap();
        b.user_type("certain", "s", "t", 1.0 - epsilon, UncertaintySpec::Uniform(1.0));
        b.user_type("uncertain", "s", "t", epsilon, UncertaintySpec::Uniform(r));
        b.build().unwrap()
    }

    fn fig3(epsilon: f64, r: f64) -> GameInstance<f64> {
        let mut b = InstanceBuilder::<f64>::new();
        b.undirected(true);
        for n in ["s", "i", "t"] {
            b.node(n);
        }
        let lin = |a: f64, c: f64| CostFunction::linear(a, c).unwrap();
        b.edge("e1", "s", "t", lin(5.0, 2.0)).unwrap();
        b.edge("e2", "s", "i", lin(1.0, 0.0)).unwrap();
        b.edge("e3", "i", "t", lin(1.5, 1.5)).unwrap();
        b.edge("e4", "s", "i", lin(0.0, 23.0 / 15.0)).unwrap();
        b.edge("e5", "i", "t", lin(3.0, 1.0)).unwrap();
        b.user_type("certain", "s", "t", 1.0 - epsilon, UncertaintySpec::Uniform(1.0));
        b.user_type("uncertain", "s", "t", epsilon, UncertaintySpec::Uniform(r));
        b.build().unwrap()
    }

    fn shared_edge(r1: f64, r2: f64) -> GameInstance<f64> {
        let mut b = InstanceBuilder::<f64>::new();
        b.node("s");
        b.node("t");
        b.edge("e1", "s", "t", CostFunction::linear(1.0, 0.0).unwrap()).unwrap();
        b.edge("e2", "s", "t", CostFunction::linear(1.0, 1.0).unwrap()).unwrap();
        b.user_type("a", "s", "t", 1.0, UncertaintySpec::PerEdge(vec![("e1".into(), r1), ("e2".into(), 1.0)]));
        b.user_type("b", "s", "t", 1.0, UncertaintySpec::PerEdge(vec![("e1".into(), r2), ("e2".into(), 1.0)]));
        b.build().unwrap()
    }

    #[test]
    fn potential_closed_forms() {
        let zero = single_edge(q(1, 1), q(1, 1), q(0, 1), q(1, 1));
        let flow = FlowAssignment::all_or_nothing(&zero, &[0]);
        assert_eq!(potential_value(&zero, &flow).unwrap(), q(0, 1));

        for r in [q(1, 2), q(1, 1), q(3, 1)] {
            let inst = single_edge(q(1, 1), q(0, 1), q(1, 1), r);
            let flow = FlowAssignment::all_or_nothing(&inst, &[0]);
            assert_eq!(potential_value(&inst, &flow).unwrap(), q(1, 2));
        }

        let inst = single_edge(q(0, 1), q(2, 1), q(1, 1), q(2, 1));
        let flow = FlowAssignment::all_or_nothing(&inst, &[0]);
        assert_eq!(potential_value(&inst, &flow).unwrap(), q(1, 1));
    }

    #[test]
    fn compatibility_of_shared_and_exclusive_edges() {
        assert!(is_potential_compatible(&pigou(0.3, 1.5)).compatible);
        let bad = is_potential_compatible(&shared_edge(1.0, 2.0));
        assert!(!bad.compatible);
        assert_eq!(bad.violating_edge.as_deref(), Some("e1"));
        assert!(matches!(
            solve_equilibrium(&shared_edge(1.0, 2.0), &SolverConfig::default()),
            Err(EquilibriumError::NotPotentialCompatible(_))
        ));
        assert!(is_potential_compatible(&shared_edge(2.0, 2.0)).compatible);

        // Uncertain edge reachable by one type only.
        let mut b = InstanceBuilder::<f64>::new();
        for n in ["s", "t", "p"] {
            b.node(n);
        }
        b.edge("road", "s", "t", CostFunction::linear(1.0, 0.0).unwrap()).unwrap();
        b.edge("fake", "t", "p", CostFunction::linear(2.0, 1.0).unwrap()).unwrap();
        b.user_type("through", "s", "t", 1.0, UncertaintySpec::Uniform(1.0));
        b.user_type(
            "park",
            "s",
            "p",
            1.0,
            UncertaintySpec::PerEdge(vec![("road".into(), 1.0), ("fake".into(), 3.0)]),
        );
        assert!(is_potential_compatible(&b.build().unwrap()).compatible);
    }

    #[test]
    fn edge_dependent_potential_gradient_is_scaled_perceived_cost() {
        // Weights must make ∂Φ/∂x_p = w_θ·Ĉ_p for every type.
        let mut b = InstanceBuilder::<f64>::new();
        for n in ["s", "m", "t"] {
            b.node(n);
        }
        b.edge("x", "s", "m", CostFunction::linear(1.0, 0.5).unwrap()).unwrap();
        b.edge("y", "m", "t", CostFunction::linear(2.0, 0.0).unwrap()).unwrap();
        b.edge("z", "s", "t", CostFunction::linear(0.5, 1.0).unwrap()).unwrap();
        b.user_type("one", "s", "t", 1.0, UncertaintySpec::PerEdge(vec![("x".into(), 2.0), ("y".into(), 4.0), ("z".into(), 1.0)]));
        b.user_type("two", "s", "m", 1.0, UncertaintySpec::Uniform(3.0));
        let inst = b.build().unwrap();
        let w = potential_weights(&inst).unwrap();
        assert!((w.type_weights[0] * 2.0 - w.type_weights[1] * 3.0).abs() < 1e-12);
        let flow = FlowAssignment::from_path_flows(&inst, vec![vec![0.3, 0.7], vec![1.0]]).unwrap();
        let phi = |f: &FlowAssignment<f64>| potential_value(&inst, f).unwrap();
        let h = 1e-6;
        let bumped = FlowAssignment::from_path_flows_unchecked(&inst, vec![vec![0.3 + h, 0.7], vec![1.0]]);
        let numeric = (phi(&bumped) - phi(&flow)) / h;
        let perceived = crate::model::perceived_path_cost(&inst, &flow, &inst.catalog(0)[0], 0).unwrap();
        assert!((numeric - w.type_weights[0] * perceived).abs() < 1e-5);
    }

    #[test]
    fn pigou_equilibria() {
        let res = solve_equilibrium(&pigou(0.0, 1.0), &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.flow.edge_flow(0).abs() < 1e-12);
        assert!((social_cost(&pigou(0.0, 1.0), &res.flow) - 1.0).abs() < 1e-9);

        let inst = pigou(0.2, 3.0);
        let res = solve_equilibrium(&inst, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.flow.edge_flow_of_type(1, 0) - 2.0 / 15.0).abs() < 1e-7);
        assert!(verify_equilibrium(&inst, &res.flow, 1e-6).passed);
    }

    #[test]
    fn fig3_certain_equilibrium() {
        let inst = fig3(0.0, 1.0);
        let res = solve_equilibrium(&inst, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        let expect = [4.0 / 21.0, 3.0 / 7.0, 8.0 / 21.0, 0.0, 0.0];
        for (p, x) in expect.iter().enumerate() {
            assert!((res.flow.path_flow(0, p) - x).abs() < 1e-6, "path {p}");
        }
    }

    #[test]
    fn every_step_rule_converges_on_fig3() {
        for (rule, tol) in [(StepRule::ExactLineSearch, 1e-6), (StepRule::Harmonic, 1e-3)] {
            let config = SolverConfig {
                step_rule: rule,
                potential_gap_tol: tol,
                ..SolverConfig::default()
            };
            let res = solve_equilibrium(&fig3(0.0, 1.0), &config).unwrap();
            assert!(res.converged, "{rule:?}");
            assert!((res.flow.path_flow(0, 1) - 3.0 / 7.0).abs() < 1e-2);
        }
    }

    #[test]
    fn exact_line_search_never_increases_potential() {
        let inst = fig3(0.3, 1.7);
        let obj = Objective::potential(&inst).unwrap();
        let mut fw = FrankWolfe::new(&inst, obj, Init::LastPath, StepRule::ExactLineSearch);
        let mut last = fw.objective_value();
        for _ in 0..200 {
            fw.step();
            let now = fw.objective_value();
            assert!(now <= last + 1e-12 * last.abs().max(1.0));
            last = now;
        }
    }

    #[test]
    fn social_optimum_matches_grid_oracle() {
        // min over y of (0.25y + 2.5)y + (1 − y)^2 on a fine grid.
        let (mut best_y, mut best) = (0.0, f64::INFINITY);
        for k in 0..=100_000 {
            let y = k as f64 / 100_000.0;
            let c = (0.25 * y + 2.5) * y + (1.0 - y) * (1.0 - y);
            if c < best {
                best = c;
                best_y = y;
            }
        }
        let inst = pigou(0.0, 1.0);
        let res = solve_social_optimum(&inst, &SolverConfig::default()).unwrap();
        assert!((res.flow.edge_flow(0) - best_y).abs() < 1e-4);
        assert!((social_cost(&inst, &res.flow) - best).abs() < 1e-8);

        let one = single_edge(2.0f64, 1.0, 1.5, 1.0);
        let res = solve_social_optimum(&one, &SolverConfig::default()).unwrap();
        assert!((social_cost(&one, &res.flow) - (2.0 * 1.5 + 1.0) * 1.5).abs() < 1e-12);
    }

    #[test]
    fn doubled_uncertainty_is_socially_optimal() {
        let inst = fig3(0.0, 1.0).with_uniform_uncertainty(2.0).unwrap();
        let eq = solve_equilibrium(&inst, &SolverConfig::default()).unwrap();
        let opt = solve_social_optimum(&inst, &SolverConfig::default()).unwrap();
        let (ce, co) = (social_cost(&inst, &eq.flow), social_cost(&inst, &opt.flow));
        assert!((ce - co).abs() <= 1e-8 * co);
    }

    #[test]
    fn verification_of_table_flows() {
        let certain = fig3(0.0, 1.0);
        let table = vec![vec![4.0 / 21.0, 3.0 / 7.0, 8.0 / 21.0, 0.0, 0.0], vec![0.0; 5]];
        let flow = FlowAssignment::from_path_flows(&certain, table).unwrap();
        assert!(verify_equilibrium(&certain, &flow, 1e-9).passed);

        let uncertain = fig3(0.05, 2.0);
        let totals = [4.0 / 21.0, 3.0 / 7.0, 8.0 / 21.0, 0.0, 0.0];
        let flow = FlowAssignment::from_total_path_flows(&uncertain, &totals).unwrap();
        let report = verify_equilibrium(&uncertain, &flow, 1e-6);
        assert!(!report.passed);
        assert_eq!(report.violation.unwrap().type_id, "uncertain");
    }

    #[test]
    fn oracle_agrees_on_tiny_instances() {
        let inst = pigou(0.0, 1.0);
        let oracle = brute_force_equilibrium(&inst, 40).unwrap();
        let res = solve_equilibrium(&inst, &SolverConfig::default()).unwrap();
        assert!((oracle.edge_flow(0) - res.flow.edge_flow(0)).abs() <= 2.0 / 40.0);

        let mut b = InstanceBuilder::<f64>::new();
        b.node("s");
        b.node("t");
        for id in ["a", "b"] {
            b.edge(id, "s", "t", CostFunction::linear(1.0, 1.0).unwrap()).unwrap();
        }
        b.user_type("u", "s", "t", 1.0, UncertaintySpec::Uniform(1.0));
        let twin = b.build().unwrap();
        let oracle = brute_force_equilibrium(&twin, 7).unwrap();
        assert!((oracle.path_flow(0, 0) - 0.5).abs() < 1e-6);

        assert!(matches!(
            brute_force_equilibrium(&fig3(0.1, 2.0), 4),
            Err(EquilibriumError::TooManyPaths { paths: 10, .. })
        ));
    }

    #[test]
    fn best_response_agrees_or_reports() {
        let inst = pigou(0.2, 3.0);
        let config = SolverConfig::default();
        let br = best_response_dynamics(&inst, &config);
        assert!(br.converged);
        let fw = solve_equilibrium(&inst, &config).unwrap();
        assert!((br.flow.edge_flow(0) - fw.flow.edge_flow(0)).abs() < 1e-5);

        let br = best_response_dynamics(&shared_edge(1.0, 2.0), &config);
        assert!(br.report.error.is_none());
        assert_eq!(br.converged, br.report.passed);

        let zero = single_edge(1.0f64, 1.0, 0.0, 1.0);
        let br = best_response_dynamics(&zero, &config);
        assert!(br.converged);
        assert_eq!(br.flow.edge_flow(0), &0.0);
    }

    #[test]
    fn rejects_bad_config_and_reports_non_convergence() {
        let config = SolverConfig {
            potential_gap_tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_equilibrium(&pigou(0.0, 1.0), &config),
            Err(EquilibriumError::InvalidConfig(_))
        ));
        let config = SolverConfig {
            max_iterations: 1,
            step_rule: StepRule::Harmonic,
            ..SolverConfig::default()
        };
        let res = solve_equilibrium(&fig3(0.0, 1.0), &config).unwrap();
        assert!(!res.converged);
        assert!(matches!(res.into_converged(), Err(EquilibriumError::DidNotConverge { .. })));
    }
}
