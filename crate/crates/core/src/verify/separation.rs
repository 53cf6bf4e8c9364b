//! Constructive strong partition at an extreme point.
//!
//! Given small vertices `I` and large vertices `D`, the tight constraints
//! touching `X = {x_v : v ∈ I ∪ D}` and `H = {h_{e,v} : e meets I actively,
//! v active in e}` are collected. Tight support rows are eliminated by
//! substituting `h_{e,v} = x_v`, leaving a matrix `M̃` over the edge and
//! capacity rows with columns `H*` (the uneliminated `h`) then `X`. A
//! column-to-row assignment `σ` through nonzero entries of `M̃`, redirected
//! by `π`, sends each `v ∈ I` to an edge row `e_v`, and `Γ(v)` is the
//! active subedge of `e_v`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::instance::{EdgeId, Instance, ParamTuple, VertexId};
use crate::linalg;
use crate::lp::{build_lp, ConstraintId, FractionalPoint, RowId, VarId};
use crate::rational::Rational;

/// A failed hypothesis of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "hypothesis", rename_all = "snake_case")]
pub enum Hypothesis {
    #[error("point violates {constraint}")]
    PointInfeasible { constraint: String },
    #[error("{vertex} is in both I and D")]
    Overlap { vertex: VertexId },
    #[error("{vertex} is extremal (x on its lower or upper bound)")]
    Extremal { vertex: VertexId },
    #[error("I is supporting: {edge} meets I and supports {vertex}")]
    Supporting { edge: EdgeId, vertex: VertexId },
    #[error("D is supported: {edge} supports {vertex}")]
    Supported { edge: EdgeId, vertex: VertexId },
}

/// A certificate property that failed after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CertificateCheck {
    #[error("tight constraint {constraint} touches X ∪ H but fits no class")]
    Unclassified { constraint: String },
    #[error("no injective assignment of columns to nonzero rows")]
    NoAssignment,
    #[error("σ is not injective or uses a zero entry at {var}")]
    Sigma { var: VarId },
    #[error("x_{vertex} is assigned to its capacity row but has no h in H*")]
    NoRedirect { vertex: VertexId },
    #[error("σ(π(x_{vertex})) is not an edge row")]
    NotEdgeRow { vertex: VertexId },
    #[error("x_{vertex} with vertex in D is not assigned its capacity row")]
    LargeNotOnCapacity { vertex: VertexId },
    #[error("h_({edge},{vertex}) is not assigned the capacity row of {vertex}")]
    RestrictedBehavior { edge: EdgeId, vertex: VertexId },
    #[error("{vertex} ∉ Γ({vertex})")]
    Reflexive { vertex: VertexId },
    #[error("Γ({vertex}) meets D")]
    MeetsLarge { vertex: VertexId },
    #[error("Γ({u}) ∩ Γ({v}) leaves I")]
    Intersection { u: VertexId, v: VertexId },
    #[error("Γ({u}) = Γ({v}) although no active subedge lies inside I")]
    NotInjective { u: VertexId, v: VertexId },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeparationError {
    #[error("precondition fails: {0}")]
    Precondition(Hypothesis),
    #[error("M̃ has rank {rank} but {columns} columns; the point is not extreme")]
    RankDeficiency { rank: usize, columns: usize },
    #[error("certificate check fails: {0}")]
    Invariant(CertificateCheck),
    #[error("{0} is not an active edge")]
    InactiveEdge(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaEntry {
    pub var: VarId,
    pub row: RowId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaEntry {
    pub vertex: VertexId,
    /// `e_v = σ(π(x_v))`.
    pub edge: EdgeId,
    pub subedge: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationCertificate {
    pub small: Vec<VertexId>,
    pub large: Vec<VertexId>,
    /// `C^(E)`.
    pub edge_rows: Vec<EdgeId>,
    /// `C^(V)`.
    pub capacity_rows: Vec<VertexId>,
    /// `C^(E×V)`.
    pub support_rows: Vec<(EdgeId, VertexId)>,
    pub x_vars: Vec<VertexId>,
    pub h_vars: Vec<(EdgeId, VertexId)>,
    pub h_star: Vec<(EdgeId, VertexId)>,
    /// Rank of `M̃`, equal to its column count.
    pub rank: usize,
    pub sigma: Vec<SigmaEntry>,
    /// `π(x_v)` for every `v ∈ I ∪ D`.
    pub pi: Vec<(VertexId, VarId)>,
    pub gamma: Vec<GammaEntry>,
    /// `(Γ(v) \ I) ∪ {v}` for each `v ∈ I`.
    pub cells: Vec<(VertexId, Vec<VertexId>)>,
    /// No active subedge meeting `I` lies inside `I`, so `Γ` must be injective.
    pub injective_regime: bool,
}

impl SeparationCertificate {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("certificate serializes");
        out.push('\n');
        out
    }
}

/// `{ v ∈ e : h_{e,v} > 0 }`.
pub fn active_subedge(point: &FractionalPoint, e: EdgeId) -> Result<Vec<VertexId>, SeparationError> {
    let mut entries = point
        .h
        .range((e, VertexId(0))..=(e, VertexId(usize::MAX)))
        .peekable();
    if entries.peek().is_none() {
        return Err(SeparationError::InactiveEdge(e));
    }
    Ok(entries.filter(|(_, h)| h.is_positive()).map(|((_, v), _)| *v).collect())
}

/// `{ v : 1 < x_v < m_v }`.
pub fn large_set(inst: &Instance, x: &[Rational]) -> Vec<VertexId> {
    let one = Rational::from_integer(BigInt::from(1));
    inst.vertex_ids()
        .filter(|v| {
            let xv = &x[v.index()];
            *xv > one && *xv < Rational::from_integer(BigInt::from(inst.multiplicity(*v)))
        })
        .collect()
}

fn precondition(h: Hypothesis) -> SeparationError {
    SeparationError::Precondition(h)
}

fn invariant(c: CertificateCheck) -> SeparationError {
    SeparationError::Invariant(c)
}

/// Builds `σ`, `π` and `Γ` for `p`, `I`, `D` and checks all of them.
pub fn compute_separation_certificate(
    inst: &Instance,
    psi: &ParamTuple,
    point: &FractionalPoint,
    small: &[VertexId],
    large: &[VertexId],
) -> Result<SeparationCertificate, SeparationError> {
    let model = build_lp(inst, psi);
    let values = point.values(&model);
    model.check_feasible(&values).map_err(|v| {
        precondition(Hypothesis::PointInfeasible {
            constraint: v.constraint.to_string(),
        })
    })?;

    let small: BTreeSet<VertexId> = small.iter().copied().collect();
    let large: BTreeSet<VertexId> = large.iter().copied().collect();
    if let Some(&v) = small.intersection(&large).next() {
        return Err(precondition(Hypothesis::Overlap { vertex: v }));
    }
    for &v in small.iter().chain(&large) {
        let x = point.x(v);
        let m = Rational::from_integer(BigInt::from(inst.multiplicity(v)));
        if !(psi.lower_bound(v) < x && *x < m) {
            return Err(precondition(Hypothesis::Extremal { vertex: v }));
        }
    }

    let mut active: BTreeMap<EdgeId, Vec<VertexId>> = BTreeMap::new();
    for &e in &psi.active_edges {
        active.insert(e, active_subedge(point, e)?);
    }
    let supports = |e: EdgeId, v: VertexId| {
        let h = point.h(e, v);
        h.is_positive() && &h == point.x(v)
    };
    for (&e, sub) in &active {
        let meets_small = sub.iter().any(|v| small.contains(v));
        for &v in sub {
            if meets_small && !small.contains(&v) && supports(e, v) {
                return Err(precondition(Hypothesis::Supporting { edge: e, vertex: v }));
            }
            if large.contains(&v) && supports(e, v) {
                return Err(precondition(Hypothesis::Supported { edge: e, vertex: v }));
            }
        }
    }

    // Variables X and H.
    let x_vars: Vec<VertexId> = small.union(&large).copied().collect();
    let small_edges: Vec<EdgeId> = active
        .iter()
        .filter(|(_, sub)| sub.iter().any(|v| small.contains(v)))
        .map(|(&e, _)| e)
        .collect();
    let h_vars: Vec<(EdgeId, VertexId)> = small_edges
        .iter()
        .flat_map(|&e| active[&e].iter().map(move |&v| (e, v)))
        .collect();
    let mut column_of: BTreeMap<usize, VarId> = BTreeMap::new();
    for &v in &x_vars {
        let var = VarId::X { vertex: v };
        column_of.insert(model.var_index(var).expect("x variable"), var);
    }
    for &(e, v) in &h_vars {
        let var = VarId::H { edge: e, vertex: v };
        column_of.insert(model.var_index(var).expect("active h variable"), var);
    }

    // Tight constraints touching X ∪ H, classified.
    let mut edge_rows = Vec::new();
    let mut capacity_rows = Vec::new();
    let mut support_rows = Vec::new();
    for c in model.tight_constraints(&values) {
        let touches = match c {
            ConstraintId::Row { id } => model
                .row(id)
                .expect("tight row exists")
                .coeffs
                .iter()
                .any(|(j, a)| !a.is_zero() && column_of.contains_key(j)),
            ConstraintId::Lower { var } | ConstraintId::Upper { var } => {
                column_of.contains_key(&model.var_index(var).expect("bound variable"))
            }
        };
        if !touches {
            continue;
        }
        match c {
            ConstraintId::Row {
                id: RowId::Edge { edge },
            } => edge_rows.push(edge),
            ConstraintId::Row {
                id: RowId::Capacity { vertex },
            } => capacity_rows.push(vertex),
            ConstraintId::Row {
                id: RowId::Support { edge, vertex },
            } if small.contains(&vertex) && h_vars.binary_search(&(edge, vertex)).is_ok() => {
                support_rows.push((edge, vertex))
            }
            other => {
                return Err(invariant(CertificateCheck::Unclassified {
                    constraint: other.to_string(),
                }))
            }
        }
    }
    let eliminated: BTreeSet<(EdgeId, VertexId)> = support_rows.iter().copied().collect();
    let h_star: Vec<(EdgeId, VertexId)> = h_vars.iter().copied().filter(|p| !eliminated.contains(p)).collect();

    // M̃: rows C^(E) then C^(V), columns H* then X, after substituting
    // h_{e,v} = x_v for every tight support row.
    let columns: Vec<VarId> = h_star
        .iter()
        .map(|&(e, v)| VarId::H { edge: e, vertex: v })
        .chain(x_vars.iter().map(|&v| VarId::X { vertex: v }))
        .collect();
    let col_pos: BTreeMap<VarId, usize> = columns.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let rows: Vec<RowId> = edge_rows
        .iter()
        .map(|&e| RowId::Edge { edge: e })
        .chain(capacity_rows.iter().map(|&v| RowId::Capacity { vertex: v }))
        .collect();
    let reduced: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&id| {
            let row = model.row(id).expect("row exists");
            let mut dense = vec![Rational::zero(); columns.len()];
            for (j, a) in &row.coeffs {
                let Some(&var) = column_of.get(j) else {
                    continue;
                };
                let target = match var {
                    VarId::H { edge, vertex } if eliminated.contains(&(edge, vertex)) => VarId::X { vertex },
                    other => other,
                };
                if let Some(&c) = col_pos.get(&target) {
                    dense[c] += a;
                }
            }
            dense
        })
        .collect();
    let rank = linalg::rank(&reduced, columns.len());
    if rank < columns.len() {
        return Err(SeparationError::RankDeficiency {
            rank,
            columns: columns.len(),
        });
    }

    let assignment = match_columns(&reduced, columns.len()).ok_or(invariant(CertificateCheck::NoAssignment))?;
    let sigma: BTreeMap<VarId, RowId> = columns
        .iter()
        .zip(&assignment)
        .map(|(&var, &r)| (var, rows[r]))
        .collect();

    let mut pi = Vec::new();
    let mut gamma = Vec::new();
    for &v in &x_vars {
        let xv = VarId::X { vertex: v };
        let own = RowId::Capacity { vertex: v };
        let target = if small.contains(&v) && sigma[&xv] == own {
            let e = h_star
                .iter()
                .find(|(_, u)| *u == v)
                .map(|(e, _)| *e)
                .ok_or(invariant(CertificateCheck::NoRedirect { vertex: v }))?;
            VarId::H { edge: e, vertex: v }
        } else {
            xv
        };
        pi.push((v, target));
        if small.contains(&v) {
            let RowId::Edge { edge } = sigma[&target] else {
                return Err(invariant(CertificateCheck::NotEdgeRow { vertex: v }));
            };
            gamma.push(GammaEntry {
                vertex: v,
                edge,
                subedge: active[&edge].clone(),
            });
        } else if sigma[&xv] != own {
            return Err(invariant(CertificateCheck::LargeNotOnCapacity { vertex: v }));
        }
    }

    let cells = gamma
        .iter()
        .map(|g| {
            let mut cell: Vec<VertexId> = g
                .subedge
                .iter()
                .copied()
                .filter(|u| !small.contains(u) || *u == g.vertex)
                .collect();
            cell.sort_unstable();
            (g.vertex, cell)
        })
        .collect();
    let injective_regime = small_edges
        .iter()
        .all(|e| active[e].iter().any(|v| !small.contains(v)));

    let cert = SeparationCertificate {
        small: small.iter().copied().collect(),
        large: large.iter().copied().collect(),
        edge_rows,
        capacity_rows,
        support_rows,
        x_vars,
        h_vars,
        h_star,
        rank,
        sigma: columns
            .iter()
            .map(|var| SigmaEntry {
                var: *var,
                row: sigma[var],
            })
            .collect(),
        pi,
        gamma,
        cells,
        injective_regime,
    };
    check_certificate(&cert, &reduced, &rows, &columns).map_err(invariant)?;
    Ok(cert)
}

/// Kuhn's augmenting-path matching of columns to rows with nonzero entries,
/// columns taken in order.
fn match_columns(m: &[Vec<Rational>], cols: usize) -> Option<Vec<usize>> {
    fn augment(
        m: &[Vec<Rational>],
        col: usize,
        seen: &mut [bool],
        row_owner: &mut [Option<usize>],
    ) -> bool {
        for r in 0..m.len() {
            if m[r][col].is_zero() || seen[r] {
                continue;
            }
            seen[r] = true;
            if row_owner[r].is_none_or(|c| augment(m, c, seen, row_owner)) {
                row_owner[r] = Some(col);
                return true;
            }
        }
        false
    }
    let mut row_owner = vec![None; m.len()];
    for c in 0..cols {
        let mut seen = vec![false; m.len()];
        if !augment(m, c, &mut seen, &mut row_owner) {
            return None;
        }
    }
    let mut assignment = vec![0; cols];
    for (r, owner) in row_owner.iter().enumerate() {
        if let Some(c) = owner {
            assignment[*c] = r;
        }
    }
    Some(assignment)
}

/// Re-checks the certificate from the matrix entries and the recorded maps.
fn check_certificate(
    cert: &SeparationCertificate,
    reduced: &[Vec<Rational>],
    rows: &[RowId],
    columns: &[VarId],
) -> Result<(), CertificateCheck> {
    let mut used = BTreeSet::new();
    for entry in &cert.sigma {
        let c = columns.iter().position(|v| *v == entry.var);
        let r = rows.iter().position(|r| *r == entry.row);
        let ok = match (c, r) {
            (Some(c), Some(r)) => !reduced[r][c].is_zero() && used.insert(r),
            _ => false,
        };
        if !ok {
            return Err(CertificateCheck::Sigma { var: entry.var });
        }
    }
    let sigma: BTreeMap<VarId, RowId> = cert.sigma.iter().map(|s| (s.var, s.row)).collect();
    let small: BTreeSet<VertexId> = cert.small.iter().copied().collect();
    let large: BTreeSet<VertexId> = cert.large.iter().copied().collect();

    for g in &cert.gamma {
        if !g.subedge.contains(&g.vertex) {
            return Err(CertificateCheck::Reflexive { vertex: g.vertex });
        }
        if g.subedge.iter().any(|u| large.contains(u)) {
            return Err(CertificateCheck::MeetsLarge { vertex: g.vertex });
        }
        for &u in &g.subedge {
            if small.contains(&u) {
                continue;
            }
            let h = VarId::H { edge: g.edge, vertex: u };
            if let Some(row) = sigma.get(&h) {
                if *row != (RowId::Capacity { vertex: u }) {
                    return Err(CertificateCheck::RestrictedBehavior {
                        edge: g.edge,
                        vertex: u,
                    });
                }
            }
        }
    }
    for (i, a) in cert.gamma.iter().enumerate() {
        for b in &cert.gamma[i + 1..] {
            if a.subedge.iter().any(|w| !small.contains(w) && b.subedge.contains(w)) {
                return Err(CertificateCheck::Intersection { u: a.vertex, v: b.vertex });
            }
            if cert.injective_regime && a.subedge == b.subedge {
                return Err(CertificateCheck::NotInjective { u: a.vertex, v: b.vertex });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::pair;
    use crate::instance::initial_tuple;
    use crate::lp::solve_basic_optimal;
    use crate::rational::{frac, int};
    use crate::rounding::run;

    #[test]
    fn active_subedge_of_pair_optimum() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let p = solve_basic_optimal(&build_lp(&inst, &psi)).unwrap();
        assert_eq!(active_subedge(&p, EdgeId(1)).unwrap(), vec![VertexId(1)]);
        assert_eq!(active_subedge(&p, EdgeId(2)), Err(SeparationError::InactiveEdge(EdgeId(2))));
        let mut split = p.clone();
        split.h.insert((EdgeId(1), VertexId(1)), frac(1, 2));
        split.h.insert((EdgeId(1), VertexId(2)), frac(1, 2));
        assert_eq!(active_subedge(&split, EdgeId(1)).unwrap(), vec![VertexId(1), VertexId(2)]);
    }

    #[test]
    fn pair_final_iteration_is_trivial() {
        let inst = pair();
        let (_, trace) = run(&inst).unwrap();
        let last = trace.final_record().unwrap();
        assert!(last.small_set.is_empty());
        let d = large_set(&inst, &last.point.x);
        let cert = compute_separation_certificate(&inst, &last.tuple, &last.point, &last.small_set, &d).unwrap();
        assert!(cert.gamma.is_empty());
        assert!(cert.cells.is_empty());
    }

    #[test]
    fn averaged_point_is_rank_deficient() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let model = build_lp(&inst, &psi);
        let p = solve_basic_optimal(&model).unwrap();
        let mut q = p.clone();
        q.x = vec![int(0), int(1)];
        q.h.insert((EdgeId(1), VertexId(1)), int(0));
        q.h.insert((EdgeId(1), VertexId(2)), int(1));
        let mid = p.midpoint(&q, &model);
        assert_eq!(mid.x, vec![frac(1, 2), frac(1, 2)]);
        let both = [VertexId(1), VertexId(2)];
        let err = compute_separation_certificate(&inst, &psi, &mid, &both, &[]).unwrap_err();
        assert_eq!(err, SeparationError::RankDeficiency { rank: 1, columns: 2 });
        let err = compute_separation_certificate(&inst, &psi, &mid, &both[..1], &[]).unwrap_err();
        assert!(matches!(err, SeparationError::Precondition(Hypothesis::Supporting { .. })));
        let err = compute_separation_certificate(&inst, &psi, &mid, &[], &both).unwrap_err();
        assert!(matches!(err, SeparationError::Precondition(Hypothesis::Supported { .. })));
    }

    #[test]
    fn preconditions_are_named() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let p = solve_basic_optimal(&build_lp(&inst, &psi)).unwrap();
        let err = compute_separation_certificate(&inst, &psi, &p, &[VertexId(1)], &[VertexId(1)]).unwrap_err();
        assert_eq!(err, SeparationError::Precondition(Hypothesis::Overlap { vertex: VertexId(1) }));
        let err = compute_separation_certificate(&inst, &psi, &p, &[VertexId(2)], &[]).unwrap_err();
        assert_eq!(err, SeparationError::Precondition(Hypothesis::Extremal { vertex: VertexId(2) }));
    }
}
