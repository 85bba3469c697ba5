use super::{AnalysisError, CheckConfig, CheckResult};
use crate::equilibrium::{solve_equilibrium, SolveResult};
use crate::model::{social_cost, type_aggregate_cost, CostFunction, FlowAssignment, GameInstance};
use crate::topology::{classify, TopologyReport, TwoTerminalNetwork};

fn solve(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<SolveResult<f64>, AnalysisError> {
    Ok(solve_equilibrium(instance, &config.solver)?.into_converged()?)
}

fn tolerance(config: &CheckConfig, scale: f64) -> f64 {
    config.rel_tol * scale.abs() + 1e-12
}

/// Compares the equilibrium under a common factor `r` with the equilibrium
/// of the certain twin. `margin = C(x¹) − C(x̃)`: nonnegative is claimed
/// for `1 ≤ r ≤ d+1`, nonpositive for `r ≤ 1`. Named `thm1` for affine
/// costs and `prop3` otherwise.
pub fn check_thm1(instance: &GameInstance<f64>, r: f64, config: &CheckConfig) -> Result<CheckResult, AnalysisError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(AnalysisError::InvalidInput(format!("r must be positive, got {r}")));
    }
    let d = instance.degree();
    let uncertain = instance.with_uniform_uncertainty(r)?;
    let certain = instance.certain_twin();
    let c_tilde = social_cost(&uncertain, &solve(&uncertain, config)?.flow);
    let c_one = social_cost(&certain, &solve(&certain, config)?.flow);
    let margin = c_one - c_tilde;
    let tol = tolerance(config, c_one);
    let upper = (d + 1) as f64;
    let (in_hypothesis, holds, note) = if r >= 1.0 {
        (r <= upper, margin >= -tol, (r > upper).then(|| format!("r above {upper}")))
    } else {
        (true, margin <= tol, None)
    };
    Ok(CheckResult {
        name: if d == 1 { "thm1" } else { "prop3" }.into(),
        in_hypothesis,
        holds,
        margin,
        tolerance: tol,
        note,
    })
}

/// `C(x̃) − C(x) ≤ −Σ_θ ((d+1)/r_θ − 1)·Σ_e b_e·(x̃_e^θ − x_e^θ)` for the
/// equilibrium `x̃` and any feasible `reference`. `margin = RHS − LHS`.
pub fn check_lemma1(
    instance: &GameInstance<f64>,
    reference: &FlowAssignment<f64>,
    config: &CheckConfig,
) -> Result<CheckResult, AnalysisError> {
    let rs: Vec<f64> = instance
        .types()
        .iter()
        .map(|t| {
            t.uncertainty
                .as_uniform()
                .copied()
                .ok_or_else(|| AnalysisError::UnsupportedUncertainty(format!("type {} has edge-dependent factors", t.id)))
        })
        .collect::<Result<_, _>>()?;
    if reference.path_flows().len() != instance.types().len()
        || reference.edge_flows().len() != instance.edges().len()
    {
        return Err(AnalysisError::InvalidInput("reference flow does not match the instance".into()));
    }
    let eq = solve(instance, config)?.flow;
    let c_eq = social_cost(instance, &eq);
    let c_ref = social_cost(instance, reference);
    let d1 = (instance.degree() + 1) as f64;
    let mut rhs = 0.0;
    for (ty, r) in rs.iter().enumerate() {
        let weighted: f64 = instance
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| edge.cost.b() * (eq.edge_flow_of_type(ty, e) - reference.edge_flow_of_type(ty, e)))
            .sum();
        rhs -= (d1 / r - 1.0) * weighted;
    }
    let lhs = c_eq - c_ref;
    let tol = tolerance(config, c_eq.max(c_ref));
    Ok(CheckResult {
        name: "lemma1".into(),
        in_hypothesis: true,
        holds: lhs <= rhs + tol,
        margin: rhs - lhs,
        tolerance: tol,
        note: None,
    })
}

/// Ratio inequality for `f(y) = a·y + b`:
/// `f(x)·x / (f(x')·x' + Σ_i (x_i − x'_i)·f(r_i·x)) ≤ 4/(4r_* − (r^*)²)`
/// with `x = Σ x_i`, `x' = Σ x'_i`. `margin = bound − ratio`. Reported as
/// out of hypothesis when `4r_* ≤ (r^*)²` or the denominator is not
/// positive.
pub fn check_lemma2(x: &[f64], x_prime: &[f64], r: &[f64], a: f64, b: f64) -> Result<CheckResult, AnalysisError> {
    if x.len() != x_prime.len() || x.len() != r.len() || x.is_empty() {
        return Err(AnalysisError::InvalidInput("vectors must be nonempty and of equal length".into()));
    }
    if x.iter().chain(x_prime).any(|v| !(v.is_finite() && *v >= 0.0)) || a < 0.0 || b < 0.0 {
        return Err(AnalysisError::InvalidInput("flows and coefficients must be nonnegative".into()));
    }
    if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(AnalysisError::InvalidInput("factors must be positive".into()));
    }
    let f = |y: f64| a * y + b;
    let total: f64 = x.iter().sum();
    let total_prime: f64 = x_prime.iter().sum();
    let r_low = r.iter().cloned().fold(f64::MAX, f64::min);
    let r_high = r.iter().cloned().fold(f64::MIN, f64::max);
    let numerator = f(total) * total;
    let denominator = f(total_prime) * total_prime
        + x.iter()
            .zip(x_prime)
            .zip(r)
            .map(|((xi, xpi), ri)| (xi - xpi) * f(ri * total))
            .sum::<f64>();
    let tol = 1e-9;
    let skip = |note: &str| CheckResult {
        name: "lemma2".into(),
        in_hypothesis: false,
        holds: true,
        margin: f64::NAN,
        tolerance: tol,
        note: Some(note.into()),
    };
    if 4.0 * r_low <= r_high * r_high {
        return Ok(skip("4·r_min ≤ r_max², bound undefined"));
    }
    if denominator <= 0.0 {
        return Ok(skip("denominator not positive"));
    }
    let bound = 4.0 / (4.0 * r_low - r_high * r_high);
    let ratio = numerator / denominator;
    Ok(CheckResult {
        name: "lemma2".into(),
        in_hypothesis: true,
        holds: ratio <= bound * (1.0 + tol),
        margin: bound - ratio,
        tolerance: tol * bound,
        note: None,
    })
}

/// First-order bound `f(x₂) − f(x₁) ≤ f'(x₂)·(x₂ − x₁)` for the monomial
/// `a·x^d + b`. `margin = RHS − LHS`.
pub fn check_lemma5(cost: &CostFunction<f64>, x1: f64, x2: f64) -> Result<CheckResult, AnalysisError> {
    if !(x1 >= 0.0 && x2 >= 0.0 && x1.is_finite() && x2.is_finite()) {
        return Err(AnalysisError::InvalidInput("points must be nonnegative".into()));
    }
    let lhs = cost.evaluate(&x2) - cost.evaluate(&x1);
    let rhs = cost.derivative(&x2) * (x2 - x1);
    let tol = 1e-12 * (1.0 + lhs.abs() + rhs.abs());
    Ok(CheckResult {
        name: "lemma5".into(),
        in_hypothesis: true,
        holds: lhs <= rhs + tol,
        margin: rhs - lhs,
        tolerance: tol,
        note: None,
    })
}

/// `(certain type, uncertain type, r)` when the instance has exactly two
/// types with common terminals, scalar factors and one of them equal to 1.
pub fn two_commodity_shape(instance: &GameInstance<f64>) -> Result<(usize, usize, f64), AnalysisError> {
    let types = instance.types();
    if types.len() != 2 {
        return Err(AnalysisError::NotTwoCommodity(format!("{} user types", types.len())));
    }
    if types[0].source != types[1].source || types[0].sink != types[1].sink {
        return Err(AnalysisError::NotTwoCommodity("types have different terminals".into()));
    }
    let r0 = types[0].uncertainty.as_uniform().copied();
    let r1 = types[1].uncertainty.as_uniform().copied();
    match (r0, r1) {
        (Some(r0), Some(r1)) if r0 == 1.0 => Ok((0, 1, r1)),
        (Some(r0), Some(r1)) if r1 == 1.0 => Ok((1, 0, r0)),
        _ => Err(AnalysisError::NotTwoCommodity("no type with r = 1".into())),
    }
}

/// Topology of the common `s`–`t` network, or why it is unavailable.
fn topology(instance: &GameInstance<f64>) -> Result<TopologyReport, String> {
    if !instance.is_undirected() {
        return Err("instance is directed".into());
    }
    let net = TwoTerminalNetwork::from_instance(instance, 0).map_err(|e| e.to_string())?;
    classify(&net, crate::model::DEFAULT_PATH_CAP).map_err(|e| e.to_string())
}

struct TwinSolves {
    certain: usize,
    r: f64,
    uncertain_flow: FlowAssignment<f64>,
    twin: GameInstance<f64>,
    twin_flow: FlowAssignment<f64>,
}

fn solve_twins(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<TwinSolves, AnalysisError> {
    let (certain, _, r) = two_commodity_shape(instance)?;
    let twin = instance.certain_twin();
    Ok(TwinSolves {
        certain,
        r,
        uncertain_flow: solve(instance, config)?.flow,
        twin_flow: solve(&twin, config)?.flow,
        twin,
    })
}

/// Aggregate true cost of the certain type falls when the other type is
/// uncertain, on series-parallel networks. `margin = C^{θ1}(x¹) − C^{θ1}(x̃)`.
pub fn check_thm3(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<CheckResult, AnalysisError> {
    let s = solve_twins(instance, config)?;
    let before = type_aggregate_cost(&s.twin, &s.twin_flow, s.certain);
    let after = type_aggregate_cost(instance, &s.uncertain_flow, s.certain);
    let margin = before - after;
    let tol = tolerance(config, before);
    let (in_hypothesis, note) = match topology(instance) {
        Ok(t) if t.is_series_parallel => (true, None),
        Ok(_) => (false, Some("topology mismatch: not series-parallel".to_string())),
        Err(e) => (false, Some(format!("topology mismatch: {e}"))),
    };
    Ok(CheckResult {
        name: "thm3".into(),
        in_hypothesis,
        holds: margin >= -tol,
        margin,
        tolerance: tol,
        note,
    })
}

/// Social cost falls on serially linearly independent networks when
/// `1 ≤ r ≤ 2`. `margin = C(x¹) − C(x̃)`.
pub fn check_thm4(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<CheckResult, AnalysisError> {
    let s = solve_twins(instance, config)?;
    let before = social_cost(&s.twin, &s.twin_flow);
    let after = social_cost(instance, &s.uncertain_flow);
    let margin = before - after;
    let tol = tolerance(config, before);
    let mut notes = Vec::new();
    match topology(instance) {
        Ok(t) if t.is_sli => {}
        Ok(_) => notes.push("topology mismatch: not serially linearly independent".to_string()),
        Err(e) => notes.push(format!("topology mismatch: {e}")),
    }
    if !(1.0..=2.0).contains(&s.r) {
        notes.push(format!("r = {} outside [1, 2]", s.r));
    }
    Ok(CheckResult {
        name: "thm4".into(),
        in_hypothesis: notes.is_empty(),
        holds: margin >= -tol,
        margin,
        tolerance: tol,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// On linearly independent networks the certain type's flow on every path
/// is at most the total flow on that path without uncertainty.
/// `margin = min_p (y¹_p − y_p^{θ1})`.
pub fn check_lemma3(instance: &GameInstance<f64>, config: &CheckConfig) -> Result<CheckResult, AnalysisError> {
    let s = solve_twins(instance, config)?;
    if instance.catalog(0) != instance.catalog(1) {
        return Err(AnalysisError::NotTwoCommodity("types have different path catalogs".into()));
    }
    let totals = s.twin_flow.total_path_flows();
    let margin = s
        .uncertain_flow
        .path_flows()[s.certain]
        .iter()
        .zip(&totals)
        .map(|(y_certain, y_one)| y_one - y_certain)
        .fold(f64::INFINITY, f64::min);
    let tol = tolerance(config, instance.total_demand());
    let (in_hypothesis, note) = match topology(instance) {
        Ok(t) if t.is_linearly_independent => (true, None),
        Ok(_) => (false, Some("topology mismatch: not linearly independent".to_string())),
        Err(e) => (false, Some(format!("topology mismatch: {e}"))),
    };
    Ok(CheckResult {
        name: "lemma3".into(),
        in_hypothesis,
        holds: margin >= -tol,
        margin,
        tolerance: tol,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_social_optimum;
    use crate::model::{InstanceBuilder, UncertaintySpec};

    fn pigou(eps: f64, r: f64) -> GameInstance<f64> {
        let mut b = InstanceBuilder::<f64>::new();
        b.undirected(true);
        b.node("s");
        b.node("t");
        b.edge("e1", "s", "t", CostFunction::linear(0.25, 2.5).unwrap()).unwrap();
        b.edge("e2", "s", "t", CostFunction::linear(1.0, 0.0).unwrap()).unwrap();
        b.user_type("certain", "s", "t", 1.0 - eps, UncertaintySpec::Uniform(1.0));
        b.user_type("uncertain", "s", "t", eps, UncertaintySpec::Uniform(r));
        b.build().unwrap()
    }

    #[test]
    fn unit_factor_gives_zero_margin() {
        let cfg = CheckConfig::default();
        let c = check_thm1(&pigou(0.3, 1.0), 1.0, &cfg).unwrap();
        assert!(c.holds && c.in_hypothesis);
        assert!(c.margin.abs() < 1e-9);
    }

    #[test]
    fn factor_two_on_pigou_reaches_optimum() {
        let cfg = CheckConfig::default();
        let inst = pigou(0.0, 1.0);
        let c = check_thm1(&inst, 2.0, &cfg).unwrap();
        assert!(c.holds && c.in_hypothesis);
        // C(x¹) = 1 and C(x*) = 1 on this instance, so the margin is 0.
        assert!(c.margin.abs() < 1e-6, "{c:?}");
    }

    #[test]
    fn lemma1_at_equilibrium_and_optimum() {
        let cfg = CheckConfig::default();
        let inst = pigou(0.4, 2.0);
        let eq = solve_equilibrium(&inst, &cfg.solver).unwrap().flow;
        let c = check_lemma1(&inst, &eq, &cfg).unwrap();
        assert!(c.holds && c.margin.abs() < 1e-6);
        let both = inst.with_uniform_uncertainty(2.0).unwrap();
        let opt = solve_social_optimum(&both, &cfg.solver).unwrap().flow;
        let c = check_lemma1(&both, &opt, &cfg).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn lemma2_tight_case() {
        let x = [0.3, 0.5, 0.2];
        let half: Vec<f64> = x.iter().map(|v| v / 2.0).collect();
        let c = check_lemma2(&x, &half, &[1.0; 3], 2.0, 0.0).unwrap();
        assert!(c.holds && c.in_hypothesis);
        assert!(c.margin.abs() < 1e-12, "{c:?}");
        let same = check_lemma2(&x, &x, &[1.05, 0.95, 1.0], 1.0, 1.0).unwrap();
        assert!(same.holds);
    }

    #[test]
    fn lemma2_skips_vacuous_cases() {
        let c = check_lemma2(&[1.0], &[0.0], &[4.0], 1.0, 0.0).unwrap();
        assert!(!c.in_hypothesis);
    }

    #[test]
    fn lemma5_on_cubic() {
        let f = CostFunction::new(2.0, 1.0, 3).unwrap();
        for (x1, x2) in [(0.0, 1.0), (2.0, 0.5), (1.0, 1.0)] {
            assert!(check_lemma5(&f, x1, x2).unwrap().holds);
        }
    }

    #[test]
    fn heterogeneous_pigou_checks() {
        let cfg = CheckConfig::default();
        let inst = pigou(0.2, 3.0);
        let t3 = check_thm3(&inst, &cfg).unwrap();
        assert!(t3.in_hypothesis && t3.holds, "{t3:?}");
        let t4 = check_thm4(&pigou(0.05, 2.0), &cfg).unwrap();
        assert!(t4.in_hypothesis && t4.holds, "{t4:?}");
        // r = 3 is outside the hypothesis and the cost rises from 1 to 49/45.
        let t4 = check_thm4(&pigou(1.0, 3.0), &cfg).unwrap();
        assert!(!t4.in_hypothesis && !t4.holds);
        assert!((t4.margin + 4.0 / 45.0).abs() < 1e-6, "{t4:?}");
        let l3 = check_lemma3(&pigou(0.5, 1.7), &cfg).unwrap();
        assert!(l3.in_hypothesis && l3.holds, "{l3:?}");
    }
}
