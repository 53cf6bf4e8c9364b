//! The relaxation LP(Ψ) over the polytope Q(Ψ), solved exactly.
//!
//! Variables are ordered `x_v` by vertex id, then `h_{e,v}` by `(e, v)`.
//! Rows are ordered edge rows, capacity rows, then support rows. The lower
//! half of each support constraint (`0 <= h_{e,v}`) is the variable bound.

mod dump;
mod point;
mod simplex;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::instance::{EdgeId, Instance, ParamTuple, VertexId};
use crate::rational::{self, Rational};

pub use dump::dump_lp;
pub use point::{verify_extremality, CertificateError, DualCertificate, FractionalPoint, RankReport};
pub use simplex::solve_basic_optimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "var", rename_all = "snake_case")]
pub enum VarId {
    X { vertex: VertexId },
    H { edge: EdgeId, vertex: VertexId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "row", rename_all = "snake_case")]
pub enum RowId {
    /// `Σ_{v∈e} h_{e,v} = 1`
    Edge { edge: EdgeId },
    /// `Σ_{e∈E[v]} d_e h_{e,v} - c′_v x_v <= 0`
    Capacity { vertex: VertexId },
    /// `h_{e,v} - x_v <= 0`
    Support { edge: EdgeId, vertex: VertexId },
}

/// A row or a variable bound of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintId {
    Row { id: RowId },
    Lower { var: VarId },
    Upper { var: VarId },
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::X { vertex } => write!(f, "x_{}", vertex.0),
            VarId::H { edge, vertex } => write!(f, "h_{}_{}", edge.0, vertex.0),
        }
    }
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowId::Edge { edge } => write!(f, "edge_{}", edge.0),
            RowId::Capacity { vertex } => write!(f, "cap_{}", vertex.0),
            RowId::Support { edge, vertex } => write!(f, "sup_{}_{}", edge.0, vertex.0),
        }
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintId::Row { id } => write!(f, "{id}"),
            ConstraintId::Lower { var } => write!(f, "lb({var})"),
            ConstraintId::Upper { var } => write!(f, "ub({var})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub id: RowId,
    /// Sparse `(variable index, coefficient)`, ascending by index.
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Row {
    pub fn activity(&self, values: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, a)| a * &values[*j]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: ConstraintId,
    /// Amount by which the constraint is exceeded (positive).
    pub residual: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {}", self.constraint, self.residual)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("LP has an empty feasible region")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("point is infeasible: {0}")]
    PointInfeasible(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpModel {
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    objective: Vec<Rational>,
    rows: Vec<Row>,
    num_vertices: usize,
}

impl LpModel {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, var: VarId) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn upper(&self) -> &[Option<Rational>] {
        &self.upper
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn count_rows(&self, pred: impl Fn(&RowId) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(&r.id)).count()
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().zip(values).map(|(c, z)| c * z).sum()
    }

    /// First violated constraint, checked exactly.
    pub fn check_feasible(&self, values: &[Rational]) -> Result<(), Violation> {
        for (j, z) in values.iter().enumerate() {
            if z < &self.lower[j] {
                return Err(Violation {
                    constraint: ConstraintId::Lower { var: self.vars[j] },
                    residual: &self.lower[j] - z,
                });
            }
            if let Some(u) = &self.upper[j] {
                if z > u {
                    return Err(Violation {
                        constraint: ConstraintId::Upper { var: self.vars[j] },
                        residual: z - u,
                    });
                }
            }
        }
        for row in &self.rows {
            let slack = row.activity(values) - &row.rhs;
            let bad = match row.sense {
                Sense::Eq => !slack.is_zero(),
                Sense::Le => slack.is_positive(),
            };
            if bad {
                return Err(Violation {
                    constraint: ConstraintId::Row { id: row.id },
                    residual: slack.abs(),
                });
            }
        }
        Ok(())
    }

    /// Every row and bound holding with equality at `values`.
    pub fn tight_constraints(&self, values: &[Rational]) -> Vec<ConstraintId> {
        let mut tight: Vec<ConstraintId> = self
            .rows
            .iter()
            .filter(|r| r.activity(values) == r.rhs)
            .map(|r| ConstraintId::Row { id: r.id })
            .collect();
        for (j, z) in values.iter().enumerate() {
            if z == &self.lower[j] {
                tight.push(ConstraintId::Lower { var: self.vars[j] });
            }
            if self.upper[j].as_ref() == Some(z) {
                tight.push(ConstraintId::Upper { var: self.vars[j] });
            }
        }
        tight
    }

    /// Dense coefficient vector of a constraint.
    pub fn constraint_row(&self, c: ConstraintId) -> Vec<Rational> {
        let mut dense = vec![Rational::zero(); self.vars.len()];
        match c {
            ConstraintId::Row { id } => {
                let row = self.rows.iter().find(|r| r.id == id).expect("row exists in model");
                for (j, a) in &row.coeffs {
                    dense[*j] = a.clone();
                }
            }
            ConstraintId::Lower { var } | ConstraintId::Upper { var } => {
                dense[self.index[&var]] = rational::one();
            }
        }
        dense
    }

    pub fn row(&self, id: RowId) -> Option<&Row> {
        self.rows.iter().find(|r| r.id == id)
    }

    /// Full variable vector from `x` and `h` (missing `h` entries are zero).
    pub fn assemble(
        &self,
        x: &[Rational],
        h: &std::collections::BTreeMap<(EdgeId, VertexId), Rational>,
    ) -> Vec<Rational> {
        self.vars
            .iter()
            .map(|var| match var {
                VarId::X { vertex } => x[vertex.index()].clone(),
                VarId::H { edge, vertex } => h.get(&(*edge, *vertex)).cloned().unwrap_or_default(),
            })
            .collect()
    }
}

/// Edge, capacity, bound and support constraints of Q(Ψ) for the given tuple.
pub fn build_lp(inst: &Instance, psi: &ParamTuple) -> LpModel {
    let mut vars = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut objective = Vec::new();
    for v in inst.vertex_ids() {
        vars.push(VarId::X { vertex: v });
        lower.push(psi.lower_bound(v).clone());
        upper.push(Some(Rational::from_integer(BigInt::from(inst.multiplicity(v)))));
        objective.push(rational::one());
    }
    for &e in &psi.active_edges {
        for &v in &inst.edge(e).vertices {
            vars.push(VarId::H { edge: e, vertex: v });
            lower.push(Rational::zero());
            upper.push(None);
            objective.push(Rational::zero());
        }
    }
    let index: HashMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let x_idx = |v: VertexId| index[&VarId::X { vertex: v }];
    let h_idx = |e: EdgeId, v: VertexId| index[&VarId::H { edge: e, vertex: v }];

    let mut rows = Vec::new();
    for &e in &psi.active_edges {
        rows.push(Row {
            id: RowId::Edge { edge: e },
            coeffs: inst.edge(e)
                .vertices
                .iter()
                .map(|&v| (h_idx(e, v), rational::one()))
                .collect(),
            sense: Sense::Eq,
            rhs: rational::one(),
        });
    }
    for v in inst.vertex_ids() {
        let mut coeffs = vec![(x_idx(v), -psi.residual_capacity(v).clone())];
        coeffs.extend(
            inst.incident_edges(v)
                .iter()
                .filter(|e| psi.is_active(**e))
                .map(|&e| (h_idx(e, v), inst.demand(e).clone())),
        );
        rows.push(Row {
            id: RowId::Capacity { vertex: v },
            coeffs,
            sense: Sense::Le,
            rhs: Rational::zero(),
        });
    }
    for &e in &psi.active_edges {
        for &v in &inst.edge(e).vertices {
            rows.push(Row {
                id: RowId::Support { edge: e, vertex: v },
                coeffs: vec![(x_idx(v), -rational::one()), (h_idx(e, v), rational::one())],
                sense: Sense::Le,
                rhs: Rational::zero(),
            });
        }
    }
    LpModel {
        vars,
        index,
        lower,
        upper,
        objective,
        rows,
        num_vertices: inst.num_vertices(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{pair, triangle, vertex};
    use crate::instance::{initial_tuple, Instance};

    fn is_edge(r: &RowId) -> bool {
        matches!(r, RowId::Edge { .. })
    }
    fn is_cap(r: &RowId) -> bool {
        matches!(r, RowId::Capacity { .. })
    }
    fn is_sup(r: &RowId) -> bool {
        matches!(r, RowId::Support { .. })
    }

    #[test]
    fn pair_counts() {
        let inst = pair();
        let model = build_lp(&inst, &initial_tuple(&inst));
        assert_eq!(model.num_vars(), 4);
        assert_eq!(model.count_rows(is_edge), 1);
        assert_eq!(model.count_rows(is_cap), 2);
        assert_eq!(model.count_rows(is_sup), 2);
        assert_eq!(
            model.vars(),
            &[
                VarId::X { vertex: VertexId(1) },
                VarId::X { vertex: VertexId(2) },
                VarId::H { edge: EdgeId(1), vertex: VertexId(1) },
                VarId::H { edge: EdgeId(1), vertex: VertexId(2) },
            ]
        );
    }

    #[test]
    fn triangle_counts() {
        let inst = triangle();
        let model = build_lp(&inst, &initial_tuple(&inst));
        assert_eq!(model.num_vars(), 9);
        assert_eq!(model.count_rows(is_edge), 3);
        assert_eq!(model.count_rows(is_cap), 3);
        assert_eq!(model.count_rows(is_sup), 6);
    }

    #[test]
    fn edge_free_model_has_only_x() {
        let inst = Instance::new(vec![vertex(1, 1), vertex(1, 1)], vec![]).unwrap();
        let model = build_lp(&inst, &initial_tuple(&inst));
        assert_eq!(model.num_vars(), 2);
        assert!(model.vars().iter().all(|v| matches!(v, VarId::X { .. })));
        assert_eq!(model.count_rows(is_edge), 0);
        assert_eq!(model.count_rows(is_sup), 0);
    }

    #[test]
    fn capacity_row_uses_residual_capacity() {
        let inst = pair();
        let mut psi = initial_tuple(&inst);
        psi.residual_capacities[0] = rational::frac(1, 2);
        let model = build_lp(&inst, &psi);
        let row = model.row(RowId::Capacity { vertex: VertexId(1) }).unwrap();
        assert_eq!(row.coeffs[0], (0, rational::frac(-1, 2)));
        assert_eq!(row.coeffs[1], (2, rational::int(1)));
    }
}
