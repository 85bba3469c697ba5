use std::collections::{BTreeMap, HashMap};

use super::cost::CostFunction;
use super::paths::{enumerate_paths, Arc, EdgeIdx, NodeIdx, Path};
use super::ModelError;
use crate::scalar::Scalar;

pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub id: String,
    pub tail: NodeIdx,
    pub head: NodeIdx,
    pub cost: CostFunction<T>,
}

/// How a user type distorts the congestion term of edge costs.
#[derive(Clone, Debug, PartialEq)]
pub enum Uncertainty<T> {
    /// One factor `r_θ` applied on every edge.
    Uniform(T),
    /// Edge-dependent factors `r_θ(e)`; edges missing from the map are
    /// undefined for this type.
    PerEdge(BTreeMap<EdgeIdx, T>),
}

impl<T: Scalar> Uncertainty<T> {
    pub fn on_edge(&self, edge: EdgeIdx) -> Option<&T> {
        match self {
            Uncertainty::Uniform(r) => Some(r),
            Uncertainty::PerEdge(map) => map.get(&edge),
        }
    }

    pub fn as_uniform(&self) -> Option<&T> {
        match self {
            Uncertainty::Uniform(r) => Some(r),
            Uncertainty::PerEdge(_) => None,
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = &T> + '_> {
        match self {
            Uncertainty::Uniform(r) => Box::new(std::iter::once(r)),
            Uncertainty::PerEdge(map) => Box::new(map.values()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserType<T> {
    pub id: String,
    pub source: NodeIdx,
    pub sink: NodeIdx,
    pub demand: T,
    pub uncertainty: Uncertainty<T>,
}

/// A routing game: graph, edge costs, user types and their path catalogs.
///
/// Undirected instances keep one [`Edge`] per undirected edge (one cost and
/// one flow accumulator) and expose two antiparallel [`Arc`]s for it.
#[derive(Clone, Debug, PartialEq)]
pub struct GameInstance<T> {
    nodes: Vec<String>,
    edges: Vec<Edge<T>>,
    types: Vec<UserType<T>>,
    catalog: Vec<Vec<Path>>,
    arcs: Vec<Arc>,
    undirected: bool,
    degree: u32,
}

impl<T: Scalar> GameInstance<T> {
    pub fn builder() -> InstanceBuilder<T> {
        InstanceBuilder::new()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<NodeIdx> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, edge: EdgeIdx) -> &Edge<T> {
        &self.edges[edge]
    }

    pub fn edge_index(&self, id: &str) -> Option<EdgeIdx> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn types(&self) -> &[UserType<T>] {
        &self.types
    }

    pub fn user_type(&self, ty: usize) -> &UserType<T> {
        &self.types[ty]
    }

    pub fn type_index(&self, id: &str) -> Option<usize> {
        self.types.iter().position(|t| t.id == id)
    }

    /// Path catalog `𝒫_θ` of one type.
    pub fn catalog(&self, ty: usize) -> &[Path] {
        &self.catalog[ty]
    }

    pub fn total_paths(&self) -> usize {
        self.catalog.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    /// Common monomial degree of every edge cost.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn total_demand(&self) -> T {
        self.types
            .iter()
            .fold(T::zero(), |acc, t| acc + t.demand.clone())
    }

    /// Whether edge `edge` appears in the catalog of type `ty`.
    pub fn type_uses_edge(&self, ty: usize, edge: EdgeIdx) -> bool {
        self.catalog[ty].iter().any(|p| p.contains(edge))
    }

    /// Same instance with every type's uncertainty replaced.
    pub fn with_uncertainties(
        &self,
        mut uncertainty: impl FnMut(usize, &UserType<T>) -> Uncertainty<T>,
    ) -> Result<Self, ModelError> {
        let mut out = self.clone();
        for (i, ty) in out.types.iter_mut().enumerate() {
            ty.uncertainty = uncertainty(i, &self.types[i]);
        }
        out.validate_types()?;
        Ok(out)
    }

    /// Every type gets the same scalar factor `r`.
    pub fn with_uniform_uncertainty(&self, r: T) -> Result<Self, ModelError> {
        self.with_uncertainties(|_, _| Uncertainty::Uniform(r.clone()))
    }

    /// The twin instance with no uncertainty (`r_θ = 1` for all types).
    pub fn certain_twin(&self) -> Self {
        self.with_uniform_uncertainty(T::one())
            .expect("unit uncertainty is always valid")
    }

    /// Same instance with edge costs replaced (degree must stay uniform).
    pub fn with_costs(
        &self,
        mut cost: impl FnMut(EdgeIdx, &Edge<T>) -> CostFunction<T>,
    ) -> Result<Self, ModelError> {
        let mut out = self.clone();
        for (i, edge) in out.edges.iter_mut().enumerate() {
            edge.cost = cost(i, &self.edges[i]);
        }
        out.degree = uniform_degree(&out.edges)?;
        Ok(out)
    }

    /// Converts every scalar with `f`, keeping structure and catalogs.
    pub fn map_scalars<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GameInstance<U> {
        GameInstance {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    id: e.id.clone(),
                    tail: e.tail,
                    head: e.head,
                    cost: CostFunction::new(f(e.cost.a()), f(e.cost.b()), e.cost.degree())
                        .expect("conversion keeps coefficients nonnegative"),
                })
                .collect(),
            types: self
                .types
                .iter()
                .map(|t| UserType {
                    id: t.id.clone(),
                    source: t.source,
                    sink: t.sink,
                    demand: f(&t.demand),
                    uncertainty: match &t.uncertainty {
                        Uncertainty::Uniform(r) => Uncertainty::Uniform(f(r)),
                        Uncertainty::PerEdge(map) => Uncertainty::PerEdge(
                            map.iter().map(|(e, r)| (*e, f(r))).collect(),
                        ),
                    },
                })
                .collect(),
            catalog: self.catalog.clone(),
            arcs: self.arcs.clone(),
            undirected: self.undirected,
            degree: self.degree,
        }
    }

    fn validate_types(&self) -> Result<(), ModelError> {
        for ty in &self.types {
            validate_type(ty, self.edges.len())?;
        }
        Ok(())
    }
}

fn validate_type<T: Scalar>(ty: &UserType<T>, edge_count: usize) -> Result<(), ModelError> {
    if ty.demand < T::zero() {
        return Err(ModelError::InvalidDemand(ty.id.clone()));
    }
    if ty.uncertainty.values().any(|r| *r <= T::zero()) {
        return Err(ModelError::InvalidUncertainty(ty.id.clone()));
    }
    if let Uncertainty::PerEdge(map) = &ty.uncertainty {
        if let Some(edge) = map.keys().find(|&&e| e >= edge_count) {
            return Err(ModelError::UnknownEdge(edge.to_string()));
        }
    }
    Ok(())
}

fn uniform_degree<T: Scalar>(edges: &[Edge<T>]) -> Result<u32, ModelError> {
    let mut degrees = edges.iter().map(|e| e.cost.degree());
    let first = degrees.next().unwrap_or(1);
    if degrees.any(|d| d != first) {
        return Err(ModelError::MixedDegree);
    }
    Ok(first)
}

/// Uncertainty specified by edge name, resolved at build time.
#[derive(Clone, Debug)]
pub enum UncertaintySpec<T> {
    Uniform(T),
    PerEdge(Vec<(String, T)>),
}

#[derive(Clone, Debug)]
struct TypeSpec<T> {
    id: String,
    source: String,
    sink: String,
    demand: T,
    uncertainty: UncertaintySpec<T>,
}

/// Incremental constructor for [`GameInstance`]; nodes, edges and types are
/// referenced by name.
#[derive(Clone, Debug)]
pub struct InstanceBuilder<T> {
    nodes: Vec<String>,
    node_lookup: HashMap<String, NodeIdx>,
    edges: Vec<Edge<T>>,
    types: Vec<TypeSpec<T>>,
    catalogs: HashMap<String, Vec<Vec<String>>>,
    undirected: bool,
    path_cap: usize,
}

impl<T: Scalar> Default for InstanceBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> InstanceBuilder<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            node_lookup: HashMap::new(),
            edges: Vec::new(),
            types: Vec::new(),
            catalogs: HashMap::new(),
            undirected: false,
            path_cap: DEFAULT_PATH_CAP,
        }
    }

    pub fn undirected(&mut self, undirected: bool) -> &mut Self {
        self.undirected = undirected;
        self
    }

    pub fn path_cap(&mut self, cap: usize) -> &mut Self {
        self.path_cap = cap;
        self
    }

    /// Adds a node; returns the existing index when the name is known.
    pub fn node(&mut self, name: impl Into<String>) -> NodeIdx {
        let name = name.into();
        if let Some(&idx) = self.node_lookup.get(&name) {
            return idx;
        }
        self.nodes.push(name.clone());
        self.node_lookup.insert(name, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn has_node(&self, name: &str) -> bool {
        self.node_lookup.contains_key(name)
    }

    pub fn edge(
        &mut self,
        id: impl Into<String>,
        tail: &str,
        head: &str,
        cost: CostFunction<T>,
    ) -> Result<EdgeIdx, ModelError> {
        let id = id.into();
        if self.edges.iter().any(|e| e.id == id) {
            return Err(ModelError::DuplicateId(id));
        }
        let tail_idx = self.lookup(tail)?;
        let head_idx = self.lookup(head)?;
        if tail_idx == head_idx {
            return Err(ModelError::SelfLoop(id));
        }
        self.edges.push(Edge {
            id,
            tail: tail_idx,
            head: head_idx,
            cost,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn user_type(
        &mut self,
        id: impl Into<String>,
        source: &str,
        sink: &str,
        demand: T,
        uncertainty: UncertaintySpec<T>,
    ) -> &mut Self {
        self.types.push(TypeSpec {
            id: id.into(),
            source: source.to_string(),
            sink: sink.to_string(),
            demand,
            uncertainty,
        });
        self
    }

    /// Overrides the enumerated catalog of type `ty` with explicit paths
    /// given as edge-id sequences.
    pub fn catalog(&mut self, ty: impl Into<String>, paths: Vec<Vec<String>>) -> &mut Self {
        self.catalogs.insert(ty.into(), paths);
        self
    }

    fn lookup(&self, name: &str) -> Result<NodeIdx, ModelError> {
        self.node_lookup
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownNode(name.to_string()))
    }

    fn edge_lookup(&self, id: &str) -> Result<EdgeIdx, ModelError> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| ModelError::UnknownEdge(id.to_string()))
    }

    pub fn build(&self) -> Result<GameInstance<T>, ModelError> {
        let degree = uniform_degree(&self.edges)?;
        let mut arcs = Vec::with_capacity(self.edges.len() * 2);
        for (i, e) in self.edges.iter().enumerate() {
            arcs.push(Arc {
                edge: i,
                from: e.tail,
                to: e.head,
            });
            if self.undirected {
                arcs.push(Arc {
                    edge: i,
                    from: e.head,
                    to: e.tail,
                });
            }
        }

        let mut seen_types = HashMap::new();
        let mut types = Vec::with_capacity(self.types.len());
        let mut catalog = Vec::with_capacity(self.types.len());
        for spec in &self.types {
            if seen_types.insert(spec.id.clone(), ()).is_some() {
                return Err(ModelError::DuplicateId(spec.id.clone()));
            }
            let source = self.lookup(&spec.source)?;
            let sink = self.lookup(&spec.sink)?;
            let uncertainty = match &spec.uncertainty {
                UncertaintySpec::Uniform(r) => Uncertainty::Uniform(r.clone()),
                UncertaintySpec::PerEdge(entries) => {
                    let mut map = BTreeMap::new();
                    for (edge, r) in entries {
                        map.insert(self.edge_lookup(edge)?, r.clone());
                    }
                    Uncertainty::PerEdge(map)
                }
            };
            let ty = UserType {
                id: spec.id.clone(),
                source,
                sink,
                demand: spec.demand.clone(),
                uncertainty,
            };
            validate_type(&ty, self.edges.len())?;
            let paths = match self.catalogs.get(&spec.id) {
                Some(explicit) => self.explicit_catalog(&ty, explicit)?,
                None => enumerate_paths(self.nodes.len(), &arcs, source, sink, self.path_cap)
                    .map_err(|err| match err {
                        ModelError::NoPath { .. } => ModelError::NoPathForType(spec.id.clone()),
                        other => other,
                    })?,
            };
            types.push(ty);
            catalog.push(paths);
        }
        if let Some(unknown) = self.catalogs.keys().find(|k| !seen_types.contains_key(*k)) {
            return Err(ModelError::UnknownType(unknown.clone()));
        }

        Ok(GameInstance {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            types,
            catalog,
            arcs,
            undirected: self.undirected,
            degree,
        })
    }

    fn explicit_catalog(
        &self,
        ty: &UserType<T>,
        explicit: &[Vec<String>],
    ) -> Result<Vec<Path>, ModelError> {
        if explicit.is_empty() {
            return Err(ModelError::NoPathForType(ty.id.clone()));
        }
        let mut out = Vec::with_capacity(explicit.len());
        for edge_ids in explicit {
            let mut nodes = vec![ty.source];
            let mut edges = Vec::with_capacity(edge_ids.len());
            for id in edge_ids {
                let idx = self.edge_lookup(id)?;
                let edge = &self.edges[idx];
                let here = *nodes.last().expect("nonempty");
                let next = if edge.tail == here {
                    edge.head
                } else if self.undirected && edge.head == here {
                    edge.tail
                } else {
                    return Err(ModelError::InvalidPath(format!(
                        "{} does not continue from node {}",
                        id, self.nodes[here]
                    )));
                };
                if nodes.contains(&next) {
                    return Err(ModelError::InvalidPath(format!(
                        "path of type {} revisits node {}",
                        ty.id, self.nodes[next]
                    )));
                }
                nodes.push(next);
                edges.push(idx);
            }
            if nodes.last() != Some(&ty.sink) {
                return Err(ModelError::InvalidPath(format!(
                    "path of type {} does not end at its sink",
                    ty.id
                )));
            }
            let path = Path { edges, nodes };
            if out.contains(&path) {
                return Err(ModelError::InvalidPath(format!(
                    "duplicate path in catalog of type {}",
                    ty.id
                )));
            }
            out.push(path);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pigou_builder() -> InstanceBuilder<f64> {
        let mut b = InstanceBuilder::new();
        b.node("s");
        b.node("t");
        b.edge("e1", "s", "t", CostFunction::linear(0.25, 2.5).unwrap())
            .unwrap();
        b.edge("e2", "s", "t", CostFunction::linear(1.0, 0.0).unwrap())
            .unwrap();
        b
    }

    #[test]
    fn builds_catalog_by_enumeration() {
        let mut b = pigou_builder();
        b.user_type("all", "s", "t", 1.0, UncertaintySpec::Uniform(1.0));
        let inst = b.build().unwrap();
        assert_eq!(inst.catalog(0).len(), 2);
        assert_eq!(inst.degree(), 1);
        assert!(inst.type_uses_edge(0, 1));
    }

    #[test]
    fn rejects_self_loops_duplicates_and_unknown_nodes() {
        let mut b = pigou_builder();
        assert!(matches!(
            b.edge("loop", "s", "s", CostFunction::constant(1.0).unwrap()),
            Err(ModelError::SelfLoop(_))
        ));
        assert!(matches!(
            b.edge("e1", "s", "t", CostFunction::constant(1.0).unwrap()),
            Err(ModelError::DuplicateId(_))
        ));
        assert!(matches!(
            b.edge("e9", "s", "x", CostFunction::constant(1.0).unwrap()),
            Err(ModelError::UnknownNode(_))
        ));
    }

    #[test]
    fn rejects_mixed_degree() {
        let mut b = pigou_builder();
        b.node("u");
        b.edge("e3", "t", "u", CostFunction::new(1.0, 0.0, 2).unwrap())
            .unwrap();
        b.user_type("all", "s", "t", 1.0, UncertaintySpec::Uniform(1.0));
        assert!(matches!(b.build(), Err(ModelError::MixedDegree)));
    }

    #[test]
    fn rejects_bad_types() {
        let mut b = pigou_builder();
        b.user_type("neg", "s", "t", -1.0, UncertaintySpec::Uniform(1.0));
        assert!(matches!(b.build(), Err(ModelError::InvalidDemand(_))));

        let mut b = pigou_builder();
        b.user_type("zero-r", "s", "t", 1.0, UncertaintySpec::Uniform(0.0));
        assert!(matches!(b.build(), Err(ModelError::InvalidUncertainty(_))));

        let mut b = pigou_builder();
        b.user_type("back", "t", "s", 1.0, UncertaintySpec::Uniform(1.0));
        assert!(matches!(b.build(), Err(ModelError::NoPathForType(_))));
    }

    #[test]
    fn explicit_catalog_override_is_validated() {
        let mut b = pigou_builder();
        b.user_type("all", "s", "t", 1.0, UncertaintySpec::Uniform(1.0));
        b.catalog("all", vec![vec!["e2".to_string()]]);
        let inst = b.build().unwrap();
        assert_eq!(inst.catalog(0).len(), 1);
        assert_eq!(inst.catalog(0)[0].edges, vec![1]);

        b.catalog("all", vec![vec!["e2".to_string(), "e1".to_string()]]);
        assert!(matches!(b.build(), Err(ModelError::InvalidPath(_))));
    }

    #[test]
    fn undirected_edges_expand_to_antiparallel_arcs() {
        let mut b = pigou_builder();
        b.undirected(true);
        b.user_type("back", "t", "s", 1.0, UncertaintySpec::Uniform(1.0));
        let inst = b.build().unwrap();
        assert_eq!(inst.arcs().len(), 4);
        assert_eq!(inst.catalog(0).len(), 2);
        assert_eq!(inst.edges().len(), 2);
    }

    #[test]
    fn twins_share_structure() {
        let mut b = pigou_builder();
        b.user_type("u", "s", "t", 1.0, UncertaintySpec::Uniform(3.0));
        let inst = b.build().unwrap();
        let twin = inst.certain_twin();
        assert_eq!(twin.user_type(0).uncertainty, Uncertainty::Uniform(1.0));
        assert_eq!(twin.catalog(0), inst.catalog(0));
        assert!(inst.with_uniform_uncertainty(-1.0).is_err());
    }
}
