use super::{ScenarioError, ScenarioInstance};
use crate::model::{CostFunction, InstanceBuilder, UncertaintySpec};
use crate::scalar::Scalar;

fn ratio<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(&num_rational::BigRational::new(n.into(), d.into()))
}

fn check_epsilon<T: Scalar>(epsilon: &T) -> Result<(), ScenarioError> {
    if *epsilon < T::zero() || *epsilon > T::one() {
        return Err(ScenarioError::InvalidEpsilon(epsilon.to_f64()));
    }
    Ok(())
}

/// Two parallel links: `e1` with `0.25x + 2.5` and `e2` with `x`. A mass
/// `1 − ε` of certain users and `ε` of users with factor `r`. The cheap
/// congestible link `e2` is reported as the on-street option.
pub fn pigou<T: Scalar>(epsilon: T, r: T) -> Result<ScenarioInstance<T>, ScenarioError> {
    check_epsilon(&epsilon)?;
    let mut b = InstanceBuilder::<T>::new();
    b.undirected(true);
    b.node("s");
    b.node("t");
    let e1 = b.edge("e1", "s", "t", CostFunction::linear(ratio(1, 4), ratio(5, 2))?)?;
    let e2 = b.edge("e2", "s", "t", CostFunction::linear(T::one(), T::zero())?)?;
    b.user_type("certain", "s", "t", T::one() - epsilon.clone(), UncertaintySpec::Uniform(T::one()));
    b.user_type("uncertain", "s", "t", epsilon, UncertaintySpec::Uniform(r));
    Ok(ScenarioInstance {
        instance: b.build()?,
        onstreet_edges: vec![e2],
        garage_edges: vec![e1],
    })
}

/// Five edges on nodes `s`, `i`, `t`: `e1 = s–t (5x + 2)`, `e2 = s–i (x)`,
/// `e3 = i–t (1.5x + 1.5)`, `e4 = s–i (23/15)`, `e5 = i–t (3x + 1)`, with
/// unit demand split into certain users and a mass `ε` with factor `r`.
/// Paths enumerate as `(e1)`, `(e2, e3)`, `(e2, e5)`, `(e4, e3)`, `(e4, e5)`.
pub fn fig3<T: Scalar>(epsilon: T, r: T) -> Result<ScenarioInstance<T>, ScenarioError> {
    check_epsilon(&epsilon)?;
    let mut b = InstanceBuilder::<T>::new();
    b.undirected(true);
    for n in ["s", "i", "t"] {
        b.node(n);
    }
    let lin = |a: T, c: T| CostFunction::linear(a, c);
    b.edge("e1", "s", "t", lin(ratio(5, 1), ratio(2, 1))?)?;
    b.edge("e2", "s", "i", lin(T::one(), T::zero())?)?;
    b.edge("e3", "i", "t", lin(ratio(3, 2), ratio(3, 2))?)?;
    b.edge("e4", "s", "i", lin(T::zero(), ratio(23, 15))?)?;
    b.edge("e5", "i", "t", lin(ratio(3, 1), T::one())?)?;
    b.user_type("certain", "s", "t", T::one() - epsilon.clone(), UncertaintySpec::Uniform(T::one()));
    b.user_type("uncertain", "s", "t", epsilon, UncertaintySpec::Uniform(r));
    Ok(ScenarioInstance {
        instance: b.build()?,
        onstreet_edges: Vec::new(),
        garage_edges: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, SolverConfig};
    use crate::model::social_cost;
    use crate::topology::{classify, TwoTerminalNetwork};
    use num_rational::BigRational;

    #[test]
    fn epsilon_out_of_range() {
        assert_eq!(pigou(1.5, 2.0).unwrap_err(), ScenarioError::InvalidEpsilon(1.5));
        assert!(fig3(-0.1, 2.0).is_err());
    }

    #[test]
    fn pigou_equilibria() {
        let cfg = SolverConfig::default();
        let s = pigou(0.0f64, 1.0).unwrap();
        let eq = solve_equilibrium(&s.instance, &cfg).unwrap();
        assert!((social_cost(&s.instance, &eq.flow) - 1.0).abs() < 1e-8);
        let s = pigou(0.1f64, 3.0).unwrap();
        let eq = solve_equilibrium(&s.instance, &cfg).unwrap();
        assert!((social_cost(&s.instance, &eq.flow) - 1.0625).abs() < 1e-8);
        let s = pigou(0.5f64, 3.0).unwrap();
        let eq = solve_equilibrium(&s.instance, &cfg).unwrap();
        assert!((eq.flow.edge_flow_of_type(1, 0) - 2.0 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn fig3_is_series_parallel_but_not_serial() {
        let s = fig3::<BigRational>(ratio(1, 20), ratio(2, 1)).unwrap();
        let t = classify(&TwoTerminalNetwork::from_instance(&s.instance, 0).unwrap(), 1000).unwrap();
        assert!(t.is_series_parallel && !t.is_linearly_independent && !t.is_sli);
        let ids: Vec<Vec<&str>> = s
            .instance
            .catalog(0)
            .iter()
            .map(|p| p.edges.iter().map(|&e| s.instance.edge(e).id.as_str()).collect())
            .collect();
        assert_eq!(ids, vec![vec!["e1"], vec!["e2", "e3"], vec!["e2", "e5"], vec!["e4", "e3"], vec!["e4", "e5"]]);
    }
}
