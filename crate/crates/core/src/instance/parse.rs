use std::fmt::Write as _;

use num_traits::{Signed, ToPrimitive};

use super::{Edge, Instance, InstanceError, Vertex, VertexId};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: negative {what} {value}")]
    Negative {
        line: usize,
        what: &'static str,
        value: Rational,
    },
    #[error("line {line}: multiplicity {value} is not a nonnegative integer")]
    NonIntegralMultiplicity { line: usize, value: Rational },
    #[error("line {line}: vertex {vertex} listed twice in one edge")]
    DuplicateVertex { line: usize, vertex: VertexId },
    #[error("line {line}: unknown vertex id {vertex}")]
    UnknownVertex { line: usize, vertex: usize },
    #[error("missing `p vchc` header")]
    MissingHeader,
    #[error("header declares {declared} {what}, file has {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("vertex {0} is never declared")]
    MissingVertex(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn quantity(line: usize, token: &str, what: &'static str) -> Result<Rational, ParseError> {
    let value = parse_rational(token).ok_or_else(|| syntax(line, format!("bad {what} {token:?}")))?;
    if value.is_negative() {
        return Err(ParseError::Negative { line, what, value });
    }
    Ok(value)
}

fn count(line: usize, token: Option<&str>, what: &str) -> Result<usize, ParseError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("bad {what} {token:?}")))
}

/// Parses the line-oriented `p vchc` format.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut vertices: Vec<Option<Vertex>> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(kind) = tokens.next() else { continue };
        match kind {
            "p" => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if tokens.next() != Some("vchc") {
                    return Err(syntax(line, "expected `p vchc <n> <m>`"));
                }
                let n = count(line, tokens.next(), "vertex count")?;
                let m = count(line, tokens.next(), "edge count")?;
                if tokens.next().is_some() {
                    return Err(syntax(line, "trailing tokens after header"));
                }
                header = Some((n, m));
                vertices = vec![None; n];
            }
            "v" => {
                let (n, _) = header.ok_or(ParseError::MissingHeader)?;
                let id = count(line, tokens.next(), "vertex id")?;
                let cap = tokens.next().ok_or_else(|| syntax(line, "missing capacity"))?;
                let mult = tokens.next().ok_or_else(|| syntax(line, "missing multiplicity"))?;
                if tokens.next().is_some() {
                    return Err(syntax(line, "trailing tokens after vertex"));
                }
                if id == 0 || id > n {
                    return Err(ParseError::UnknownVertex { line, vertex: id });
                }
                let capacity = quantity(line, cap, "capacity")?;
                let mult = quantity(line, mult, "multiplicity")?;
                let multiplicity = if mult.is_integer() {
                    mult.to_integer().to_u64()
                } else {
                    None
                }
                .ok_or(ParseError::NonIntegralMultiplicity { line, value: mult })?;
                if vertices[id - 1].is_some() {
                    return Err(syntax(line, format!("vertex {id} declared twice")));
                }
                vertices[id - 1] = Some(Vertex {
                    capacity,
                    multiplicity,
                });
            }
            "e" => {
                let (n, _) = header.ok_or(ParseError::MissingHeader)?;
                let dem = tokens.next().ok_or_else(|| syntax(line, "missing demand"))?;
                let demand = quantity(line, dem, "demand")?;
                let mut members: Vec<VertexId> = Vec::new();
                for tok in tokens {
                    let id: usize = tok
                        .parse()
                        .map_err(|_| syntax(line, format!("bad vertex id {tok:?}")))?;
                    if id == 0 || id > n {
                        return Err(ParseError::UnknownVertex { line, vertex: id });
                    }
                    let vid = VertexId(id);
                    if members.contains(&vid) {
                        return Err(ParseError::DuplicateVertex { line, vertex: vid });
                    }
                    members.push(vid);
                }
                if members.is_empty() {
                    return Err(syntax(line, "edge has no vertices"));
                }
                edges.push(Edge {
                    demand,
                    vertices: members,
                });
            }
            other => return Err(syntax(line, format!("unknown record type {other:?}"))),
        }
    }

    let (n, m) = header.ok_or(ParseError::MissingHeader)?;
    if edges.len() != m {
        return Err(ParseError::CountMismatch {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }
    let vertices = vertices
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(ParseError::MissingVertex(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(vertices.len(), n);
    Ok(Instance::new(vertices, edges)?)
}

/// Renders an instance in the format accepted by [`parse_instance`].
pub fn render_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p vchc {} {}", inst.num_vertices(), inst.num_edges());
    for v in inst.vertex_ids() {
        let vx = inst.vertex(v);
        let _ = writeln!(out, "v {} {} {}", v.0, vx.capacity, vx.multiplicity);
    }
    for e in inst.edges() {
        let _ = write!(out, "e {}", e.demand);
        for v in &e.vertices {
            let _ = write!(out, " {}", v.0);
        }
        out.push('\n');
    }
    out
}
