use cautious_routing::equilibrium::{solve_equilibrium, verify_equilibrium, SolverConfig};
use cautious_routing::model::{social_cost, true_path_cost, FlowAssignment};
use cautious_routing::scenarios::{build_grid_city, fig3, pigou, GridCitySpec, ScenarioError};
use cautious_routing::{BigRational, ExactInstance};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn path_costs(inst: &ExactInstance, flow: &FlowAssignment<BigRational>) -> Vec<BigRational> {
    inst.catalog(0).iter().map(|p| true_path_cost(inst, flow, p)).collect()
}

#[test]
fn fig3_certain_row_is_an_exact_equilibrium() {
    let inst = fig3(q(0, 1), q(2, 1)).unwrap().instance;
    let row = vec![q(4, 21), q(3, 7), q(8, 21), q(0, 1), q(0, 1)];
    let flow = FlowAssignment::from_path_flows(&inst, vec![row, vec![q(0, 1); 5]]).unwrap();
    assert!(verify_equilibrium(&inst, &flow, 0.0).passed);
    assert_eq!(social_cost(&inst, &flow), q(62, 21));
    assert_eq!(path_costs(&inst, &flow), vec![q(62, 21), q(62, 21), q(62, 21), q(386, 105), q(386, 105)]);
}

#[test]
fn fig3_printed_uncertain_row_is_not_an_equilibrium() {
    // Fourth entry read as 1/20 so that the row sums to the unit demand.
    let inst = fig3(q(1, 20), q(2, 1)).unwrap().instance;
    let totals = [q(11, 60), q(23, 60), q(23, 60), q(1, 20), q(0, 1)];
    let flow = FlowAssignment::from_total_path_flows(&inst, &totals).unwrap();
    assert_eq!(social_cost(&inst, &flow), q(591, 200));
    assert_eq!(path_costs(&inst, &flow), vec![q(35, 12), q(35, 12), q(35, 12), q(221, 60), q(221, 60)]);
    let report = verify_equilibrium(&inst, &flow, 1e-6);
    assert!(!report.passed);
}

#[test]
fn fig3_uncertain_equilibrium_keeps_the_certain_aggregate() {
    let inst = fig3(0.05f64, 2.0).unwrap().instance;
    let cfg = SolverConfig {
        potential_gap_tol: 1e-12,
        ..SolverConfig::default()
    };
    let eq = solve_equilibrium(&inst, &cfg).unwrap();
    assert!(eq.converged);
    let want = [4.0 / 21.0, 3.0 / 7.0, 8.0 / 21.0, 0.0, 0.0];
    for (x, y) in eq.flow.total_path_flows().iter().zip(want) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
    assert!((social_cost(&inst, &eq.flow) - 62.0 / 21.0).abs() < 1e-9);
    // Uncertain users avoid the congestible middle paths.
    let uncertain = inst.type_index("uncertain").unwrap();
    assert!((eq.flow.path_flow(uncertain, 0) - 0.05).abs() < 1e-6);
}

/// Certain users all on `e2`, uncertain users split `(y, ε − y)` over
/// `(e1, e2)`.
fn pigou_flow(inst: &ExactInstance, epsilon: &BigRational, y: BigRational) -> FlowAssignment<BigRational> {
    let certain = vec![q(0, 1), q(1, 1) - epsilon.clone()];
    let uncertain = vec![y.clone(), epsilon.clone() - y];
    FlowAssignment::from_path_flows(inst, vec![certain, uncertain]).unwrap()
}

#[test]
fn pigou_closed_form_is_exact_up_to_two_fifteenths() {
    for eps in [q(1, 20), q(1, 10), q(2, 15)] {
        let inst = pigou(eps.clone(), q(3, 1)).unwrap().instance;
        let flow = pigou_flow(&inst, &eps, eps.clone());
        assert!(verify_equilibrium(&inst, &flow, 0.0).passed);
        let want = q(1, 1) + q(1, 2) * eps.clone() + q(5, 4) * eps.clone() * eps.clone();
        assert_eq!(social_cost(&inst, &flow), want);
    }
}

#[test]
fn pigou_uncertain_flow_saturates_past_two_fifteenths() {
    for eps in [q(1, 5), q(1, 2), q(1, 1)] {
        let inst = pigou(eps.clone(), q(3, 1)).unwrap().instance;
        let flow = pigou_flow(&inst, &eps, q(2, 15));
        assert!(verify_equilibrium(&inst, &flow, 0.0).passed);
    }
    let inst = pigou(q(1, 1), q(3, 1)).unwrap().instance;
    let flow = pigou_flow(&inst, &q(1, 1), q(2, 15));
    assert_eq!(social_cost(&inst, &flow), q(49, 45));
}

#[test]
fn pigou_social_cost_at_one_tenth() {
    let inst = pigou(0.1f64, 3.0).unwrap().instance;
    let eq = solve_equilibrium(&inst, &SolverConfig::default()).unwrap();
    assert!((social_cost(&inst, &eq.flow) - 1.0625).abs() < 1e-9);
}

#[test]
fn grid_cities_scale_and_reject_degenerate_shapes() {
    let spec = GridCitySpec::default();
    let city = build_grid_city(4, 4, &spec).unwrap();
    assert_eq!(city.instance.edges().len(), 2 * 4 * 3 + 2);
    assert!(!city.onstreet_edges.is_empty());
    assert!(matches!(build_grid_city(1, 5, &spec), Err(ScenarioError::InvalidGrid(_))));
}
