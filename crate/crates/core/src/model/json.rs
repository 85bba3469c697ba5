//! Instance file format.
//!
//! ```json
//! {"nodes": ["s", "t"],
//!  "edges": [{"id": "e1", "tail": "s", "head": "t", "a": "1/4", "b": 2.5, "d": 1}],
//!  "types": [{"id": "u", "source": "s", "sink": "t", "demand": 1, "r": 3}],
//!  "undirected": false}
//! ```
//!
//! Numbers may be JSON numbers or strings holding decimals or fractions.
//! A type carries either `"r"` or `"r_edges": {"edge-id": value}`. An
//! optional `"paths": {"type-id": [["e1", ...], ...]}` replaces the
//! enumerated catalog of a type.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::cost::CostFunction;
use super::instance::{GameInstance, InstanceBuilder, Uncertainty, UncertaintySpec};
use super::ModelError;
use crate::scalar::{parse_rational, Scalar};

#[derive(Debug, Error)]
pub enum InstanceParseError {
    #[error("malformed JSON at line {line}, column {column}: {message}\n  {context}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        context: String,
    },
    #[error("invalid number {0:?}")]
    Number(String),
    #[error("type {0} must give exactly one of \"r\" and \"r_edges\"")]
    Uncertainty(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum Literal {
    Number(serde_json::Number),
    Text(String),
}

impl Literal {
    fn parse<T: Scalar>(&self) -> Result<T, InstanceParseError> {
        let text = match self {
            Literal::Number(n) => n.to_string(),
            Literal::Text(s) => s.clone(),
        };
        parse_rational(&text)
            .map(|r: BigRational| T::from_ratio(&r))
            .ok_or(InstanceParseError::Number(text))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(untagged)]
enum Name {
    Text(String),
    Int(i64),
}

impl Name {
    fn text(&self) -> String {
        match self {
            Name::Text(s) => s.clone(),
            Name::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: Name,
    tail: Name,
    head: Name,
    a: Literal,
    b: Literal,
    #[serde(default)]
    d: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDoc {
    id: Name,
    source: Name,
    sink: Name,
    demand: Literal,
    #[serde(default)]
    r: Option<Literal>,
    #[serde(default)]
    r_edges: Option<BTreeMap<String, Literal>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    nodes: Vec<Name>,
    edges: Vec<EdgeDoc>,
    types: Vec<TypeDoc>,
    #[serde(default)]
    undirected: bool,
    #[serde(default)]
    paths: Option<BTreeMap<String, Vec<Vec<Name>>>>,
}

/// Parses an instance document.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<GameInstance<T>, InstanceParseError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|err| {
        let line = err.line();
        let context = text
            .lines()
            .nth(line.saturating_sub(1))
            .unwrap_or("")
            .trim_end()
            .to_string();
        InstanceParseError::Syntax {
            line,
            column: err.column(),
            message: err.to_string(),
            context,
        }
    })?;
    build_from_doc(doc)
}

fn build_from_doc<T: Scalar>(doc: InstanceDoc) -> Result<GameInstance<T>, InstanceParseError> {
    let mut builder = InstanceBuilder::<T>::new();
    builder.undirected(doc.undirected);
    for node in &doc.nodes {
        let name = node.text();
        if builder.has_node(&name) {
            return Err(ModelError::DuplicateId(name).into());
        }
        builder.node(name);
    }
    for edge in &doc.edges {
        let cost = CostFunction::new(edge.a.parse()?, edge.b.parse()?, edge.d.unwrap_or(1))?;
        builder.edge(edge.id.text(), &edge.tail.text(), &edge.head.text(), cost)?;
    }
    for ty in &doc.types {
        let id = ty.id.text();
        let uncertainty = match (&ty.r, &ty.r_edges) {
            (Some(r), None) => UncertaintySpec::Uniform(r.parse()?),
            (None, Some(map)) => UncertaintySpec::PerEdge(
                map.iter()
                    .map(|(edge, r)| Ok((edge.clone(), r.parse()?)))
                    .collect::<Result<_, InstanceParseError>>()?,
            ),
            _ => return Err(InstanceParseError::Uncertainty(id)),
        };
        builder.user_type(
            id,
            &ty.source.text(),
            &ty.sink.text(),
            ty.demand.parse()?,
            uncertainty,
        );
    }
    if let Some(paths) = doc.paths {
        for (ty, list) in paths {
            builder.catalog(
                ty,
                list.into_iter()
                    .map(|p| p.iter().map(Name::text).collect())
                    .collect(),
            );
        }
    }
    Ok(builder.build()?)
}

fn literal<T: Scalar>(value: &T) -> Value {
    let text = value.to_string();
    match text.parse::<serde_json::Number>() {
        Ok(n) if !text.contains('/') => Value::Number(n),
        _ => Value::String(text),
    }
}

/// Serializes an instance in the document format; the explicit path
/// catalog is always written so the document round-trips exactly.
pub fn instance_to_json<T: Scalar>(instance: &GameInstance<T>) -> Value {
    let node = |idx: usize| Value::String(instance.nodes()[idx].clone());
    let edges: Vec<Value> = instance
        .edges()
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "tail": node(e.tail),
                "head": node(e.head),
                "a": literal(e.cost.a()),
                "b": literal(e.cost.b()),
                "d": e.cost.degree(),
            })
        })
        .collect();
    let types: Vec<Value> = instance
        .types()
        .iter()
        .map(|t| {
            let mut obj = Map::new();
            obj.insert("id".into(), Value::String(t.id.clone()));
            obj.insert("source".into(), node(t.source));
            obj.insert("sink".into(), node(t.sink));
            obj.insert("demand".into(), literal(&t.demand));
            match &t.uncertainty {
                Uncertainty::Uniform(r) => {
                    obj.insert("r".into(), literal(r));
                }
                Uncertainty::PerEdge(map) => {
                    let entries = map
                        .iter()
                        .map(|(e, r)| (instance.edge(*e).id.clone(), literal(r)))
                        .collect();
                    obj.insert("r_edges".into(), Value::Object(entries));
                }
            }
            Value::Object(obj)
        })
        .collect();
    let paths: Map<String, Value> = instance
        .types()
        .iter()
        .enumerate()
        .map(|(ty, t)| {
            let list = instance
                .catalog(ty)
                .iter()
                .map(|p| {
                    Value::Array(
                        p.edges
                            .iter()
                            .map(|&e| Value::String(instance.edge(e).id.clone()))
                            .collect(),
                    )
                })
                .collect();
            (t.id.clone(), Value::Array(list))
        })
        .collect();
    json!({
        "nodes": instance.nodes(),
        "edges": edges,
        "types": types,
        "undirected": instance.is_undirected(),
        "paths": paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIGOU: &str = r#"{
        "nodes": ["s", "t"],
        "edges": [
            {"id": "e1", "tail": "s", "head": "t", "a": "1/4", "b": 2.5},
            {"id": "e2", "tail": "s", "head": "t", "a": 1, "b": 0}
        ],
        "types": [
            {"id": "certain", "source": "s", "sink": "t", "demand": 0.9, "r": 1},
            {"id": "cautious", "source": "s", "sink": "t", "demand": "1/10", "r_edges": {"e1": 3, "e2": 3}}
        ]
    }"#;

    #[test]
    fn parses_fractions_into_exact_rationals() {
        let inst: GameInstance<BigRational> = parse_instance(PIGOU).unwrap();
        assert_eq!(*inst.edge(0).cost.a(), BigRational::new(1.into(), 4.into()));
        assert_eq!(inst.user_type(0).demand, BigRational::new(9.into(), 10.into()));
        assert!(matches!(inst.user_type(1).uncertainty, Uncertainty::PerEdge(_)));
    }

    #[test]
    fn round_trips_through_json() {
        let inst: GameInstance<BigRational> = parse_instance(PIGOU).unwrap();
        let text = instance_to_json(&inst).to_string();
        let back: GameInstance<BigRational> = parse_instance(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn reports_line_of_syntax_error() {
        let broken = "{\n  \"nodes\": [\"s\"],\n  \"edges\": [oops]\n}";
        match parse_instance::<f64>(broken) {
            Err(InstanceParseError::Syntax { line, context, .. }) => {
                assert_eq!(line, 3);
                assert!(context.contains("oops"));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_both_or_neither_uncertainty_forms() {
        let text = PIGOU.replace("\"r\": 1", "\"r\": 1, \"r_edges\": {}");
        assert!(matches!(
            parse_instance::<f64>(&text),
            Err(InstanceParseError::Uncertainty(_))
        ));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_numbers() {
        let text = PIGOU.replace("\"b\": 0", "\"b\": 0, \"c\": 1");
        assert!(matches!(
            parse_instance::<f64>(&text),
            Err(InstanceParseError::Syntax { .. })
        ));
        let text = PIGOU.replace("\"1/4\"", "\"1/0\"");
        assert!(matches!(
            parse_instance::<f64>(&text),
            Err(InstanceParseError::Number(_))
        ));
    }
}
