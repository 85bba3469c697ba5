//! Parking choice folded into a two-commodity routing game.
//!
//! On-street edges keep only their travel latency; the parking part of
//! their cost, summed over the zone, moves to a fake edge from each zone
//! exit to a new parking sink. A garage edge joins each garage node to the
//! same sink. Parking users scale the congestion term of these fake edges
//! by `r`; everything else is perceived truthfully.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{ScenarioError, ScenarioInstance};
use crate::model::{CostFunction, GameInstance, InstanceBuilder, UncertaintySpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParkingDemand {
    pub source: String,
    pub demand: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughDemand {
    pub source: String,
    pub sink: String,
    pub demand: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParkingSpec {
    /// Directed road network with latency costs `a·x + b`.
    pub roads: Vec<RoadEdge>,
    /// Road edges forming the on-street zone.
    pub onstreet_edges: Vec<String>,
    /// Zone nodes joined to the parking sink by a fake edge.
    pub onstreet_exits: Vec<String>,
    /// Accumulated on-street parking congestion coefficient.
    pub a_os: f64,
    /// Accumulated on-street price, before the price multiplier.
    pub b_os: f64,
    pub garage_nodes: Vec<String>,
    pub a_pg: f64,
    pub b_pg: f64,
    /// Trade-off between money and time applied to both prices.
    pub price_multiplier: f64,
    pub parking_sink: String,
    pub parking: Vec<ParkingDemand>,
    pub through: Vec<ThroughDemand>,
    /// Uncertainty of parking users on the fake edges.
    pub r: f64,
}

impl ParkingSpec {
    /// Small stylized network: from `s`, one branch crosses the on-street
    /// zone (`s1 → {v1, v2} → o1`) and continues to `t`; the other passes
    /// the garage node `o2` on its way to `t`. Unit parking and unit
    /// through demand leave `s`.
    pub fn stylized() -> Self {
        let road = |id: &str, from: &str, to: &str, a: f64, b: f64| RoadEdge {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            a,
            b,
        };
        Self {
            roads: vec![
                road("r1", "s", "s1", 0.01, 0.2),
                road("r2", "s1", "v1", 0.01, 0.2),
                road("r3", "s1", "v2", 0.01, 0.3),
                road("r4", "v1", "o1", 0.01, 0.2),
                road("r5", "v2", "o1", 0.01, 0.1),
                road("r6", "o1", "t", 0.01, 0.3),
                road("r7", "s", "o2", 0.01, 0.4),
                road("r8", "o2", "t", 0.01, 0.4),
            ],
            onstreet_edges: vec!["r2".into(), "r3".into(), "r4".into(), "r5".into()],
            onstreet_exits: vec!["o1".into()],
            a_os: 2.0,
            b_os: 0.5,
            garage_nodes: vec!["o2".into()],
            a_pg: 0.0,
            b_pg: 1.6,
            price_multiplier: 1.0,
            parking_sink: "t_park".into(),
            parking: vec![ParkingDemand {
                source: "s".into(),
                demand: 1.0,
            }],
            through: vec![ThroughDemand {
                source: "s".into(),
                sink: "t".into(),
                demand: 1.0,
            }],
            r: 1.0,
        }
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |field: &str, reason: String| Err(ScenarioError::SpecInvalid {
            field: field.into(),
            reason,
        });
        for (field, v) in [
            ("a_os", self.a_os),
            ("b_os", self.b_os),
            ("a_pg", self.a_pg),
            ("b_pg", self.b_pg),
            ("price_multiplier", self.price_multiplier),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(field, format!("must be a nonnegative number, got {v}"));
            }
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return invalid("r", format!("must be positive, got {}", self.r));
        }
        let mut nodes = HashSet::new();
        let mut ids = HashSet::new();
        for e in &self.roads {
            if !(e.a >= 0.0 && e.b >= 0.0 && e.a.is_finite() && e.b.is_finite()) {
                return invalid("roads", format!("edge {} has a negative coefficient", e.id));
            }
            if !ids.insert(e.id.as_str()) {
                return invalid("roads", format!("duplicate edge id {}", e.id));
            }
            nodes.insert(e.from.as_str());
            nodes.insert(e.to.as_str());
        }
        if self.onstreet_edges.is_empty() {
            return invalid("onstreet_edges", "must not be empty".into());
        }
        if let Some(e) = self.onstreet_edges.iter().find(|e| !ids.contains(e.as_str())) {
            return invalid("onstreet_edges", format!("unknown road {e}"));
        }
        for (field, list) in [("onstreet_exits", &self.onstreet_exits), ("garage_nodes", &self.garage_nodes)] {
            if list.is_empty() {
                return invalid(field, "must not be empty".into());
            }
            if let Some(n) = list.iter().find(|n| !nodes.contains(n.as_str())) {
                return invalid(field, format!("unknown node {n}"));
            }
        }
        if nodes.contains(self.parking_sink.as_str()) {
            return invalid("parking_sink", format!("{} already names a road node", self.parking_sink));
        }
        if self.parking.is_empty() {
            return invalid("parking", "needs at least one origin".into());
        }
        for d in &self.parking {
            if !nodes.contains(d.source.as_str()) || !(d.demand >= 0.0 && d.demand.is_finite()) {
                return invalid("parking", format!("bad origin {} or demand {}", d.source, d.demand));
            }
        }
        for d in &self.through {
            if !nodes.contains(d.source.as_str())
                || !nodes.contains(d.sink.as_str())
                || !(d.demand >= 0.0 && d.demand.is_finite())
            {
                return invalid("through", format!("bad pair {} -> {} or demand {}", d.source, d.sink, d.demand));
            }
        }
        Ok(())
    }

    /// Sum of the parking cost over the zone evaluated at the fake-edge
    /// flows, i.e. the part of the social cost not carried by roads.
    pub fn parking_cost(&self, onstreet_flows: &[f64], garage_flows: &[f64]) -> f64 {
        let m = self.price_multiplier;
        onstreet_flows.iter().map(|x| (self.a_os * x + m * self.b_os) * x).sum::<f64>()
            + garage_flows.iter().map(|x| (self.a_pg * x + m * self.b_pg) * x).sum::<f64>()
    }
}

/// Builds the directed two-commodity instance described by `spec`.
pub fn apply_parking_transform(spec: &ParkingSpec) -> Result<ScenarioInstance<f64>, ScenarioError> {
    spec.validate()?;
    let mut b = InstanceBuilder::<f64>::new();
    for e in &spec.roads {
        b.node(e.from.clone());
        b.node(e.to.clone());
    }
    b.node(spec.parking_sink.clone());
    for e in &spec.roads {
        b.edge(e.id.clone(), &e.from, &e.to, CostFunction::linear(e.a, e.b)?)?;
    }
    let m = spec.price_multiplier;
    let mut onstreet = Vec::new();
    for (k, exit) in spec.onstreet_exits.iter().enumerate() {
        let cost = CostFunction::linear(spec.a_os, m * spec.b_os)?;
        onstreet.push(b.edge(format!("onstreet{}", k + 1), exit, &spec.parking_sink, cost)?);
    }
    let mut garage = Vec::new();
    for (k, node) in spec.garage_nodes.iter().enumerate() {
        let cost = CostFunction::linear(spec.a_pg, m * spec.b_pg)?;
        garage.push(b.edge(format!("garage{}", k + 1), node, &spec.parking_sink, cost)?);
    }
    let fake: HashSet<usize> = onstreet.iter().chain(&garage).copied().collect();
    let road_ids: Vec<String> = spec.roads.iter().map(|e| e.id.clone()).collect();
    let fake_ids: Vec<String> = (1..=onstreet.len())
        .map(|k| format!("onstreet{k}"))
        .chain((1..=garage.len()).map(|k| format!("garage{k}")))
        .collect();
    debug_assert_eq!(fake.len(), fake_ids.len());
    let parking_factors: Vec<(String, f64)> = road_ids
        .iter()
        .map(|id| (id.clone(), 1.0))
        .chain(fake_ids.iter().map(|id| (id.clone(), spec.r)))
        .collect();
    for (k, d) in spec.parking.iter().enumerate() {
        b.user_type(
            format!("parking{}", k + 1),
            &d.source,
            &spec.parking_sink,
            d.demand,
            UncertaintySpec::PerEdge(parking_factors.clone()),
        );
    }
    for (k, d) in spec.through.iter().enumerate() {
        b.user_type(format!("through{}", k + 1), &d.source, &d.sink, d.demand, UncertaintySpec::Uniform(1.0));
    }
    Ok(ScenarioInstance {
        instance: b.build()?,
        onstreet_edges: onstreet,
        garage_edges: garage,
    })
}

/// Indices of the parking types in an instance built by
/// [`apply_parking_transform`].
pub fn parking_types(instance: &GameInstance<f64>) -> Vec<usize> {
    instance
        .types()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.id.starts_with("parking"))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{is_potential_compatible, solve_equilibrium, SolverConfig};
    use crate::model::{perceived_path_cost, social_cost, true_path_cost, FlowAssignment};

    #[test]
    fn unit_factor_is_truthful() {
        let s = apply_parking_transform(&ParkingSpec::stylized()).unwrap();
        assert!(is_potential_compatible(&s.instance).compatible);
        let inst = &s.instance;
        let flow = FlowAssignment::all_or_nothing(inst, &vec![0; inst.types().len()]);
        for ty in 0..inst.types().len() {
            for p in inst.catalog(ty) {
                assert_eq!(perceived_path_cost(inst, &flow, p, ty).unwrap(), true_path_cost(inst, &flow, p));
            }
        }
    }

    #[test]
    fn fake_edges_only_in_parking_catalogs() {
        let s = apply_parking_transform(&ParkingSpec::stylized().with_r(1.7)).unwrap();
        let parking = parking_types(&s.instance);
        for ty in 0..s.instance.types().len() {
            for &e in s.onstreet_edges.iter().chain(&s.garage_edges) {
                assert_eq!(s.instance.type_uses_edge(ty, e), parking.contains(&ty));
            }
        }
        assert!(is_potential_compatible(&s.instance).compatible);
    }

    #[test]
    fn uncapacitated_garage_is_constant() {
        let spec = ParkingSpec::stylized();
        assert_eq!(spec.a_pg, 0.0);
        for r in [0.5, 1.0, 3.0] {
            let s = apply_parking_transform(&spec.with_r(r)).unwrap();
            let g = s.instance.edge(s.garage_edges[0]);
            let ty = parking_types(&s.instance)[0];
            let factor = s.instance.user_type(ty).uncertainty.on_edge(s.garage_edges[0]).unwrap();
            assert_eq!(g.cost.perceived(&5.0, factor), spec.b_pg);
        }
    }

    #[test]
    fn conservation_and_cost_decomposition() {
        let spec = ParkingSpec::stylized().with_r(1.3);
        let s = apply_parking_transform(&spec).unwrap();
        let eq = solve_equilibrium(&s.instance, &SolverConfig::default()).unwrap().flow;
        let os: Vec<f64> = s.onstreet_edges.iter().map(|&e| *eq.edge_flow(e)).collect();
        let pg: Vec<f64> = s.garage_edges.iter().map(|&e| *eq.edge_flow(e)).collect();
        let demand: f64 = spec.parking.iter().map(|d| d.demand).sum();
        assert!((os.iter().sum::<f64>() + pg.iter().sum::<f64>() - demand).abs() < 1e-9);
        let latency: f64 = spec
            .roads
            .iter()
            .map(|r| {
                let x = *eq.edge_flow(s.instance.edge_index(&r.id).unwrap());
                (r.a * x + r.b) * x
            })
            .sum();
        let total = social_cost(&s.instance, &eq);
        assert!((total - latency - spec.parking_cost(&os, &pg)).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let mut spec = ParkingSpec::stylized();
        spec.a_os = -1.0;
        assert!(matches!(apply_parking_transform(&spec), Err(ScenarioError::SpecInvalid { field, .. }) if field == "a_os"));
        let mut spec = ParkingSpec::stylized();
        spec.onstreet_edges.clear();
        assert!(matches!(apply_parking_transform(&spec), Err(ScenarioError::SpecInvalid { field, .. }) if field == "onstreet_edges"));
        let mut spec = ParkingSpec::stylized();
        spec.garage_nodes = vec!["nowhere".into()];
        assert!(matches!(apply_parking_transform(&spec), Err(ScenarioError::SpecInvalid { field, .. }) if field == "garage_nodes"));
    }
}
