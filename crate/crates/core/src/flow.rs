//! Max-flow feasibility checks and integral assignment extraction.
//!
//! The cover network has four layers: source → edge nodes (capacity `d_e`)
//! → incident vertex nodes (capacity `d_e`) → sink (capacity = the vertex
//! budget). Rational data is scaled by the least common denominator so the
//! augmenting-path search runs on integers.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::instance::{EdgeId, Instance, VertexId};
use crate::rational::{self, Rational};

/// `h_{e,v}` for every incidence `(e, v)`, zeros included.
pub type Assignment = BTreeMap<(EdgeId, VertexId), Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutWitness {
    /// The listed edges demand more than their usable neighbours can hold.
    DemandExceedsBudget {
        edges: Vec<EdgeId>,
        vertices: Vec<VertexId>,
        #[serde(with = "rational::as_string")]
        demand: Rational,
        #[serde(with = "rational::as_string")]
        budget: Rational,
    },
    /// A zero-demand edge with no incident vertex allowed a copy.
    UncoverableZeroDemandEdge { edge: EdgeId },
}

impl std::fmt::Display for CutWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CutWitness::DemandExceedsBudget {
                edges,
                vertices,
                demand,
                budget,
            } => {
                let es: Vec<String> = edges.iter().map(ToString::to_string).collect();
                let vs: Vec<String> = vertices.iter().map(ToString::to_string).collect();
                write!(
                    f,
                    "edges {{{}}} demand {} but their vertices {{{}}} offer only {}",
                    es.join(", "),
                    demand,
                    vs.join(", "),
                    budget
                )
            }
            CutWitness::UncoverableZeroDemandEdge { edge } => {
                write!(f, "zero-demand edge {edge} has no incident vertex with a copy available")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Assignment),
    Infeasible(CutWitness),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityCheck {
    pub max_flow: Rational,
    pub total_demand: Rational,
    pub outcome: Feasibility,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("integral extraction needs integral demands and capacities")]
    NonIntegralData,
    #[error("multiplicity vector has {found} entries, instance has {expected} vertices")]
    Shape { expected: usize, found: usize },
    #[error("x*_{vertex} = {value} exceeds m_v = {max}")]
    MultiplicityOutOfRange { vertex: VertexId, value: u64, max: u64 },
    #[error("budgets cannot cover the demand: {0}")]
    BudgetInsufficient(CutWitness),
}

struct Arc {
    to: usize,
    cap: BigInt,
}

/// Residual network with paired arcs (`i ^ 1` is the reverse of `i`).
struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: BigInt) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc {
            to: from,
            cap: BigInt::zero(),
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn flow_on(&self, arc: usize) -> &BigInt {
        &self.arcs[arc ^ 1].cap
    }

    /// Edmonds–Karp: shortest augmenting paths.
    fn max_flow(&mut self, source: usize, sink: usize) -> BigInt {
        let mut total = BigInt::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if !seen[arc.to] && arc.cap.is_positive() {
                        seen[arc.to] = true;
                        pred[arc.to] = Some(a);
                        queue.push_back(arc.to);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck: Option<BigInt> = None;
            let mut node = sink;
            while let Some(a) = pred[node] {
                let cap = &self.arcs[a].cap;
                if bottleneck.as_ref().is_none_or(|b| cap < b) {
                    bottleneck = Some(cap.clone());
                }
                node = self.arcs[a ^ 1].to;
            }
            let push = bottleneck.expect("augmenting path has at least one arc");
            let mut node = sink;
            while let Some(a) = pred[node] {
                self.arcs[a].cap -= &push;
                self.arcs[a ^ 1].cap += &push;
                node = self.arcs[a ^ 1].to;
            }
            total += push;
        }
    }

    fn reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if !seen[arc.to] && arc.cap.is_positive() {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}

/// The four-layer network for given per-vertex budgets. Vertices with
/// `allowed[v] == false` get no incoming arcs, which encodes `h_{e,v} <= x_v = 0`.
pub struct CoverNetwork<'a> {
    inst: &'a Instance,
    budgets: Vec<Rational>,
    allowed: Vec<bool>,
}

impl<'a> CoverNetwork<'a> {
    pub fn new(inst: &'a Instance, budgets: Vec<Rational>, allowed: Vec<bool>) -> Self {
        debug_assert!(budgets.iter().all(|b| !b.is_negative()));
        CoverNetwork {
            inst,
            budgets,
            allowed,
        }
    }

    /// Budgets `c_v · x_v` with arcs only into vertices where `x_v >= 1`.
    pub fn for_multiplicities(inst: &'a Instance, x: &[u64]) -> Self {
        let budgets = inst
            .vertex_ids()
            .map(|v| inst.capacity(v) * Rational::from_integer(BigInt::from(x[v.index()])))
            .collect();
        let allowed = x.iter().map(|&k| k >= 1).collect();
        Self::new(inst, budgets, allowed)
    }

    pub fn solve(&self) -> FeasibilityCheck {
        let inst = self.inst;
        let n = inst.num_vertices();
        let m = inst.num_edges();
        let scale = rational::common_denominator(
            inst.edges()
                .iter()
                .map(|e| &e.demand)
                .chain(self.budgets.iter()),
        );
        let scaled = |q: &Rational| -> BigInt {
            let s = q * Rational::from_integer(scale.clone());
            debug_assert!(s.is_integer());
            s.to_integer()
        };

        let source = 0;
        let edge_node = |e: usize| 1 + e;
        let vertex_node = |v: usize| 1 + m + v;
        let sink = 1 + m + n;
        let mut net = Network::new(sink + 1);

        let mut incidence_arcs: Vec<Vec<Option<usize>>> = Vec::with_capacity(m);
        for (ei, edge) in inst.edges().iter().enumerate() {
            let d = scaled(&edge.demand);
            net.add_arc(source, edge_node(ei), d.clone());
            let arcs = edge
                .vertices
                .iter()
                .map(|v| {
                    self.allowed[v.index()]
                        .then(|| net.add_arc(edge_node(ei), vertex_node(v.index()), d.clone()))
                })
                .collect();
            incidence_arcs.push(arcs);
        }
        for v in 0..n {
            net.add_arc(vertex_node(v), sink, scaled(&self.budgets[v]));
        }

        let flow = net.max_flow(source, sink);
        let max_flow = Rational::new(flow.clone(), scale.clone());
        let total_demand = inst.total_demand();

        if max_flow < total_demand {
            let seen = net.reachable(source);
            let s_vertices: Vec<bool> = (0..n).map(|v| seen[vertex_node(v)]).collect();
            let edges: Vec<EdgeId> = inst
                .edge_ids()
                .filter(|e| seen[edge_node(e.index())])
                .filter(|e| {
                    inst.edge(*e)
                        .vertices
                        .iter()
                        .all(|v| !self.allowed[v.index()] || s_vertices[v.index()])
                })
                .collect();
            let witness = self.hall_witness(edges);
            return FeasibilityCheck {
                max_flow,
                total_demand,
                outcome: Feasibility::Infeasible(witness),
            };
        }

        let mut assignment = Assignment::new();
        for (ei, edge) in inst.edges().iter().enumerate() {
            let e = EdgeId::from_index(ei);
            if edge.demand.is_zero() {
                let chosen = edge.vertices.iter().find(|v| self.allowed[v.index()]);
                let Some(&chosen) = chosen else {
                    return FeasibilityCheck {
                        max_flow,
                        total_demand,
                        outcome: Feasibility::Infeasible(CutWitness::UncoverableZeroDemandEdge {
                            edge: e,
                        }),
                    };
                };
                for &v in &edge.vertices {
                    let h = if v == chosen { rational::one() } else { rational::zero() };
                    assignment.insert((e, v), h);
                }
                continue;
            }
            let d = scaled(&edge.demand);
            for (slot, &v) in edge.vertices.iter().enumerate() {
                let h = match incidence_arcs[ei][slot] {
                    Some(arc) => Rational::new(net.flow_on(arc).clone(), d.clone()),
                    None => rational::zero(),
                };
                assignment.insert((e, v), h);
            }
        }
        FeasibilityCheck {
            max_flow,
            total_demand,
            outcome: Feasibility::Feasible(assignment),
        }
    }

    fn hall_witness(&self, edges: Vec<EdgeId>) -> CutWitness {
        let inst = self.inst;
        let mut vertices: Vec<VertexId> = edges
            .iter()
            .flat_map(|&e| inst.edge(e).vertices.iter().copied())
            .filter(|v| self.allowed[v.index()])
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        let demand = edges.iter().map(|&e| inst.demand(e)).sum();
        let budget = vertices.iter().map(|v| &self.budgets[v.index()]).sum();
        CutWitness::DemandExceedsBudget {
            edges,
            vertices,
            demand,
            budget,
        }
    }
}

/// Does a feasible assignment exist with every vertex at full multiplicity?
pub fn check_feasibility(inst: &Instance) -> FeasibilityCheck {
    let m: Vec<u64> = inst.vertices().iter().map(|v| v.multiplicity).collect();
    CoverNetwork::for_multiplicities(inst, &m).solve()
}

/// Can integral multiplicities `x` cover every edge? Fractional assignment on success.
pub fn cover_with_multiplicities(inst: &Instance, x: &[u64]) -> Feasibility {
    CoverNetwork::for_multiplicities(inst, x).solve().outcome
}

/// Integral assignment (`d_e · h_{e,v}` integral) for integral data and multiplicities.
pub fn extract_integral_assignment(inst: &Instance, x_star: &[u64]) -> Result<Assignment, FlowError> {
    if !inst.has_integral_data() {
        return Err(FlowError::NonIntegralData);
    }
    if x_star.len() != inst.num_vertices() {
        return Err(FlowError::Shape {
            expected: inst.num_vertices(),
            found: x_star.len(),
        });
    }
    for v in inst.vertex_ids() {
        let value = x_star[v.index()];
        if value > inst.multiplicity(v) {
            return Err(FlowError::MultiplicityOutOfRange {
                vertex: v,
                value,
                max: inst.multiplicity(v),
            });
        }
    }
    match cover_with_multiplicities(inst, x_star) {
        Feasibility::Feasible(h) => Ok(h),
        Feasibility::Infeasible(w) => Err(FlowError::BudgetInsufficient(w)),
    }
}
