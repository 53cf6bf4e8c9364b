//! Problem instances and the working parameter tuple of the relaxation.

mod generate;
mod parse;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

pub use generate::{generate_instance, GeneratorParams};
pub use parse::{parse_instance, render_instance, ParseError};

/// 1-based vertex identifier, as written in instance files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

/// 1-based edge identifier; edges are numbered in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        VertexId(index + 1)
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        EdgeId(index + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub capacity: Rational,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub demand: Rational,
    /// Incident vertices in ascending id order.
    pub vertices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("edge {edge} has no vertices")]
    EmptyEdge { edge: EdgeId },
    #[error("edge {edge} lists vertex {vertex} more than once")]
    DuplicateVertex { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: EdgeId, vertex: VertexId },
    #[error("negative {what} {value} at {location}")]
    Negative {
        what: &'static str,
        location: String,
        value: Rational,
    },
}

/// A validated instance. Immutable once built; `f` is always recomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    f: usize,
}

impl Instance {
    /// Edges are given as vertex-id lists; order within an edge is normalized.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, InstanceError> {
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if v.capacity.is_negative() {
                return Err(InstanceError::Negative {
                    what: "capacity",
                    location: VertexId::from_index(i).to_string(),
                    value: v.capacity.clone(),
                });
            }
        }
        let mut incident = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, mut edge) in edges.into_iter().enumerate() {
            let id = EdgeId::from_index(i);
            if edge.demand.is_negative() {
                return Err(InstanceError::Negative {
                    what: "demand",
                    location: id.to_string(),
                    value: edge.demand,
                });
            }
            if edge.vertices.is_empty() {
                return Err(InstanceError::EmptyEdge { edge: id });
            }
            for &v in &edge.vertices {
                if v.0 == 0 || v.0 > n {
                    return Err(InstanceError::UnknownVertex { edge: id, vertex: v });
                }
            }
            edge.vertices.sort_unstable();
            if let Some(w) = edge.vertices.windows(2).find(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateVertex {
                    edge: id,
                    vertex: w[0],
                });
            }
            for &v in &edge.vertices {
                incident[v.index()].push(id);
            }
            normalized.push(edge);
        }
        let f = normalized
            .iter()
            .map(|e| e.vertices.len())
            .max()
            .unwrap_or(1);
        Ok(Instance {
            vertices,
            edges: normalized,
            incident,
            f,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Maximum edge size; 1 for an instance without edges.
    pub fn f(&self) -> usize {
        self.f
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.index()]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId::from_index)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId::from_index)
    }

    /// E[v]: edges incident to `v`, ascending.
    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.index()]
    }

    pub fn capacity(&self, v: VertexId) -> &Rational {
        &self.vertices[v.index()].capacity
    }

    pub fn multiplicity(&self, v: VertexId) -> u64 {
        self.vertices[v.index()].multiplicity
    }

    pub fn demand(&self, e: EdgeId) -> &Rational {
        &self.edges[e.index()].demand
    }

    pub fn total_demand(&self) -> Rational {
        self.edges.iter().map(|e| &e.demand).sum()
    }

    /// All capacities and demands are integers.
    pub fn has_integral_data(&self) -> bool {
        self.vertices.iter().all(|v| v.capacity.is_integer())
            && self.edges.iter().all(|e| e.demand.is_integer())
    }

    /// Number of integral multiplicity vectors `0 <= x <= m`, saturating.
    pub fn search_space(&self) -> u128 {
        self.vertices.iter().fold(1u128, |acc, v| {
            acc.saturating_mul(u128::from(v.multiplicity).saturating_add(1))
        })
    }
}

/// Working parameters of the relaxation: active edges, lower bounds `ℓ`,
/// and residual capacities `c′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamTuple {
    /// Ascending.
    pub active_edges: Vec<EdgeId>,
    pub lower_bounds: Vec<Rational>,
    pub residual_capacities: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TupleError {
    #[error("lower bound of {vertex} is {value}, outside [0, m_v]")]
    LowerBoundRange { vertex: VertexId, value: Rational },
    #[error("positive lower bound of {vertex} is {value}, outside [1/f, 1]")]
    LowerBoundSandwich { vertex: VertexId, value: Rational },
    #[error("residual capacity of {vertex} is {value}, outside [0, c_v]")]
    ResidualCapacity { vertex: VertexId, value: Rational },
    #[error("tuple shape does not match the instance")]
    Shape,
}

impl ParamTuple {
    pub fn is_active(&self, e: EdgeId) -> bool {
        self.active_edges.binary_search(&e).is_ok()
    }

    pub fn lower_bound(&self, v: VertexId) -> &Rational {
        &self.lower_bounds[v.index()]
    }

    pub fn residual_capacity(&self, v: VertexId) -> &Rational {
        &self.residual_capacities[v.index()]
    }

    /// Checks `0 <= ℓ <= m`, `0 <= c′ <= c`, and `ℓ_v > 0 ⟹ 1/f <= ℓ_v <= 1`.
    pub fn validate(&self, inst: &Instance) -> Result<(), TupleError> {
        let n = inst.num_vertices();
        if self.lower_bounds.len() != n || self.residual_capacities.len() != n {
            return Err(TupleError::Shape);
        }
        if self.active_edges.iter().any(|e| e.0 == 0 || e.0 > inst.num_edges())
            || self.active_edges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(TupleError::Shape);
        }
        let inv_f = Rational::new(BigInt::from(1), BigInt::from(inst.f()));
        for v in inst.vertex_ids() {
            let l = self.lower_bound(v);
            let m = Rational::from_integer(BigInt::from(inst.multiplicity(v)));
            if l.is_negative() || *l > m {
                return Err(TupleError::LowerBoundRange {
                    vertex: v,
                    value: l.clone(),
                });
            }
            if l.is_positive() && (*l < inv_f || *l > rational::one()) {
                return Err(TupleError::LowerBoundSandwich {
                    vertex: v,
                    value: l.clone(),
                });
            }
            let c = self.residual_capacity(v);
            if c.is_negative() || c > inst.capacity(v) {
                return Err(TupleError::ResidualCapacity {
                    vertex: v,
                    value: c.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Ψ0 = (E, 0, c).
pub fn initial_tuple(inst: &Instance) -> ParamTuple {
    ParamTuple {
        active_edges: inst.edge_ids().collect(),
        lower_bounds: vec![Rational::zero(); inst.num_vertices()],
        residual_capacities: inst.vertices().iter().map(|v| v.capacity.clone()).collect(),
    }
}
