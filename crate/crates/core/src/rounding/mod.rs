//! Iterative partial rounding: solve, fold supporting edges, repeat, then
//! round every multiplicity up.

mod trace;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::flow::{check_feasibility, CutWitness, Feasibility};
use crate::instance::{initial_tuple, EdgeId, Instance, ParamTuple, VertexId};
use crate::lp::{build_lp, solve_basic_optimal, FractionalPoint, LpError};
use crate::rational::{self, Rational};
use crate::solution::{self, Solution};

pub use trace::{check_trace, Fold, InvariantViolation, IterationRecord, Trace, TraceAudit, Violated};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoundingError {
    #[error("instance admits no feasible assignment: {0}")]
    Infeasible(CutWitness),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("fold requested but every support set is empty")]
    NothingToFold,
    #[error("folding {edge} into {vertex} leaves residual capacity {value}")]
    NegativeResidual {
        edge: EdgeId,
        vertex: VertexId,
        value: Rational,
    },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

/// `{ v : 0 < x_v < 1/f }`.
pub fn compute_small_set(x: &[Rational], f: usize) -> Vec<VertexId> {
    let inv_f = Rational::new(BigInt::from(1), BigInt::from(f));
    x.iter()
        .enumerate()
        .filter(|(_, xv)| xv.is_positive() && **xv < inv_f)
        .map(|(i, _)| VertexId::from_index(i))
        .collect()
}

/// `T(e) = { v ∈ e \ I : 0 < h_{e,v} = x_v }` for every active edge.
pub fn compute_support_sets(
    inst: &Instance,
    psi: &ParamTuple,
    point: &FractionalPoint,
    small: &[VertexId],
) -> BTreeMap<EdgeId, Vec<VertexId>> {
    psi.active_edges
        .iter()
        .map(|&e| {
            let t = inst
                .edge(e)
                .vertices
                .iter()
                .copied()
                .filter(|v| small.binary_search(v).is_err())
                .filter(|&v| {
                    let h = point.h(e, v);
                    h > Rational::zero() && &h == point.x(v)
                })
                .collect();
            (e, t)
        })
        .collect()
}

/// Folds every edge with a nonempty support set into the smallest vertex of
/// that set. Each `v ∈ T(e)` loses `d_e` of residual capacity and has its
/// lower bound raised to `x_v`.
pub fn fold_step(
    inst: &Instance,
    psi: &ParamTuple,
    point: &FractionalPoint,
    support: &BTreeMap<EdgeId, Vec<VertexId>>,
) -> Result<(ParamTuple, Vec<Fold>), RoundingError> {
    let mut next = psi.clone();
    let mut folds = Vec::new();
    for (&e, t) in support {
        let Some(&chosen) = t.iter().min() else {
            continue;
        };
        for &v in t {
            let c = &mut next.residual_capacities[v.index()];
            *c -= inst.demand(e);
            if *c < Rational::zero() {
                return Err(RoundingError::NegativeResidual {
                    edge: e,
                    vertex: v,
                    value: c.clone(),
                });
            }
            next.lower_bounds[v.index()] = point.x(v).clone();
        }
        folds.push(Fold {
            edge: e,
            vertex: chosen,
            support: t.clone(),
        });
    }
    if folds.is_empty() {
        return Err(RoundingError::NothingToFold);
    }
    next.active_edges.retain(|e| support.get(e).is_none_or(Vec::is_empty));
    Ok((next, folds))
}

/// Solves the instance and audits the resulting trace.
pub fn run(inst: &Instance) -> Result<(Solution, Trace), RoundingError> {
    if let Feasibility::Infeasible(w) = check_feasibility(inst).outcome {
        return Err(RoundingError::Infeasible(w));
    }
    let root_psi = initial_tuple(inst);
    let (solution, trace) = if inst.f() == 1 {
        let root = solve_basic_optimal(&build_lp(inst, &root_psi))?;
        single_vertex_edges(inst, root)
    } else {
        iterate(inst, root_psi)?
    };
    check_trace(inst, &trace)?;
    Ok((solution, trace))
}

fn iterate(inst: &Instance, mut psi: ParamTuple) -> Result<(Solution, Trace), RoundingError> {
    let f = inst.f();
    let mut iterations = Vec::new();
    let mut folded_assignment = BTreeMap::new();
    loop {
        let point = solve_basic_optimal(&build_lp(inst, &psi))?;
        let small = compute_small_set(&point.x, f);
        let support = compute_support_sets(inst, &psi, &point, &small);
        let done = support.values().all(Vec::is_empty);
        let (next, folds) = if done {
            (None, Vec::new())
        } else {
            let (next, folds) = fold_step(inst, &psi, &point, &support)?;
            (Some(next), folds)
        };
        for fold in &folds {
            folded_assignment.insert(fold.edge, fold.vertex);
        }
        iterations.push(IterationRecord {
            index: iterations.len() + 1,
            tuple: psi,
            point,
            small_set: small,
            support_sets: support,
            folded: folds,
        });
        match next {
            Some(n) => psi = n,
            None => break,
        }
    }
    let trace = Trace {
        f,
        fast_path: false,
        root_objective: iterations[0].point.objective.clone(),
        iterations,
        folded_assignment,
    };
    let last = trace.final_record().expect("at least one iteration");
    let x: Vec<u64> = last.point.x.iter().map(ceil_u64).collect();
    let mut h = BTreeMap::new();
    for e in inst.edge_ids() {
        for &v in &inst.edge(e).vertices {
            let value = match trace.folded_assignment.get(&e) {
                Some(&chosen) if chosen == v => rational::one(),
                Some(_) => Rational::zero(),
                None => last.point.h(e, v),
            };
            h.insert((e, v), value);
        }
    }
    Ok((finish(x, h, trace.root_objective.clone()), trace))
}

/// Every edge is a singleton, so each vertex independently takes the
/// fewest copies that hold its load (at least one if it has an edge).
fn single_vertex_edges(inst: &Instance, root: FractionalPoint) -> (Solution, Trace) {
    let mut x = vec![0u64; inst.num_vertices()];
    let mut h = BTreeMap::new();
    for v in inst.vertex_ids() {
        let edges = inst.incident_edges(v);
        if edges.is_empty() {
            continue;
        }
        let load: Rational = edges.iter().map(|&e| inst.demand(e)).sum();
        let copies = if load.is_zero() {
            1
        } else {
            ceil_u64(&(load / inst.capacity(v))).max(1)
        };
        x[v.index()] = copies;
        for &e in edges {
            h.insert((e, v), rational::one());
        }
    }
    let root_objective = root.objective.clone();
    let trace = Trace {
        f: inst.f(),
        fast_path: true,
        root_objective: root_objective.clone(),
        iterations: vec![IterationRecord {
            index: 1,
            tuple: initial_tuple(inst),
            point: root,
            small_set: Vec::new(),
            support_sets: BTreeMap::new(),
            folded: Vec::new(),
        }],
        folded_assignment: BTreeMap::new(),
    };
    (finish(x, h, root_objective), trace)
}

fn finish(x: Vec<u64>, h: BTreeMap<(EdgeId, VertexId), Rational>, root: Rational) -> Solution {
    let objective: u64 = x.iter().sum();
    Solution {
        ratio: solution::ratio(objective, &root).expect("a zero LP root forces x* = 0"),
        x,
        h,
        objective,
        lp_root_objective: root,
    }
}

fn ceil_u64(q: &Rational) -> u64 {
    rational::ceil(q).to_u64().expect("multiplicities fit in u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{edge, pair, triangle, one_edge, vertex};
    use crate::rational::{frac, int};

    fn point(x: Vec<Rational>, h: &[((usize, usize), Rational)]) -> FractionalPoint {
        FractionalPoint {
            objective: x.iter().sum(),
            x,
            h: h.iter().map(|((e, v), q)| ((EdgeId(*e), VertexId(*v)), q.clone())).collect(),
            tight: Vec::new(),
            certificate: crate::lp::DualCertificate {
                row_duals: Vec::new(),
                reduced_costs: Vec::new(),
            },
        }
    }

    #[test]
    fn small_set_boundaries() {
        assert!(compute_small_set(&[int(1), int(0)], 2).is_empty());
        assert_eq!(compute_small_set(&[frac(1, 3), int(0)], 2), vec![VertexId(1)]);
        assert!(compute_small_set(&[frac(1, 2), frac(1, 2)], 2).is_empty());
        assert_eq!(compute_small_set(&[frac(1, 4), frac(1, 3)], 3), vec![VertexId(1)]);
    }

    #[test]
    fn pair_support_and_fold() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let p = solve_basic_optimal(&build_lp(&inst, &psi)).unwrap();
        assert_eq!(p.x, vec![int(1), int(0)]);
        let small = compute_small_set(&p.x, inst.f());
        assert!(small.is_empty());
        let t = compute_support_sets(&inst, &psi, &p, &small);
        assert_eq!(t[&EdgeId(1)], vec![VertexId(1)]);
        let (next, folds) = fold_step(&inst, &psi, &p, &t).unwrap();
        assert!(next.active_edges.is_empty());
        assert_eq!(next.lower_bounds, vec![int(1), int(0)]);
        assert_eq!(next.residual_capacities, vec![int(0), int(1)]);
        assert_eq!(
            folds,
            vec![Fold {
                edge: EdgeId(1),
                vertex: VertexId(1),
                support: vec![VertexId(1)]
            }]
        );
    }

    #[test]
    fn strict_slack_gives_empty_support() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let p = point(
            vec![int(1), int(1)],
            &[((1, 1), frac(1, 2)), ((1, 2), frac(1, 2))],
        );
        let t = compute_support_sets(&inst, &psi, &p, &[]);
        assert!(t.values().all(Vec::is_empty));
        assert_eq!(fold_step(&inst, &psi, &p, &t), Err(RoundingError::NothingToFold));
    }

    #[test]
    fn small_vertices_are_excluded_from_support() {
        let inst = pair();
        let psi = initial_tuple(&inst);
        let p = point(
            vec![frac(1, 3), frac(2, 3)],
            &[((1, 1), frac(1, 3)), ((1, 2), frac(2, 3))],
        );
        let small = compute_small_set(&p.x, 2);
        assert_eq!(small, vec![VertexId(1)]);
        let t = compute_support_sets(&inst, &psi, &p, &small);
        assert_eq!(t[&EdgeId(1)], vec![VertexId(2)]);
    }

    #[test]
    fn fold_charges_every_supported_vertex() {
        let inst = Instance::new(vec![vertex(3, 2), vertex(2, 2)], vec![edge(1, &[1, 2])]).unwrap();
        let psi = initial_tuple(&inst);
        let p = point(
            vec![frac(1, 2), frac(1, 2)],
            &[((1, 1), frac(1, 2)), ((1, 2), frac(1, 2))],
        );
        let t = compute_support_sets(&inst, &psi, &p, &[]);
        assert_eq!(t[&EdgeId(1)], vec![VertexId(1), VertexId(2)]);
        let (next, folds) = fold_step(&inst, &psi, &p, &t).unwrap();
        assert_eq!(next.residual_capacities, vec![int(2), int(1)]);
        assert_eq!(next.lower_bounds, vec![frac(1, 2), frac(1, 2)]);
        assert_eq!(folds[0].vertex, VertexId(1));
    }

    #[test]
    fn negative_residual_is_reported() {
        let inst = Instance::new(vec![vertex(1, 1), vertex(1, 1)], vec![edge(2, &[1, 2])]).unwrap();
        let psi = initial_tuple(&inst);
        let p = point(vec![int(1), int(0)], &[((1, 1), int(1)), ((1, 2), int(0))]);
        let t = compute_support_sets(&inst, &psi, &p, &[]);
        assert!(matches!(
            fold_step(&inst, &psi, &p, &t),
            Err(RoundingError::NegativeResidual { .. })
        ));
    }

    #[test]
    fn pair_run() {
        let (sol, trace) = run(&pair()).unwrap();
        assert_eq!(sol.x, vec![1, 0]);
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.ratio, int(1));
        assert_eq!(trace.iterations.len(), 2);
        assert_eq!(trace.iterations[0].folded.len(), 1);
        assert!(trace.iterations[1].folded.is_empty());
        assert_eq!(sol.h[&(EdgeId(1), VertexId(1))], int(1));
    }

    #[test]
    fn triangle_run_is_optimal() {
        let (sol, _) = run(&triangle()).unwrap();
        assert_eq!(sol.objective, 3);
        assert_eq!(sol.lp_root_objective, int(3));
    }

    #[test]
    fn single_edge_agrees_with_integral() {
        let (sol, trace) = run(&one_edge()).unwrap();
        assert_eq!(sol.x, vec![1]);
        assert!(trace.fast_path);
        assert_eq!(sol.lp_root_objective, int(1));
    }

    #[test]
    fn singleton_edges_take_ceiling_of_load() {
        let inst = Instance::new(
            vec![vertex(2, 3), vertex(1, 1), vertex(5, 0)],
            vec![edge(3, &[1]), edge(0, &[2]), edge(1, &[1])],
        )
        .unwrap();
        let (sol, _) = run(&inst).unwrap();
        assert_eq!(sol.x, vec![2, 1, 0]);
        assert_eq!(sol.lp_root_objective, int(3));
    }

    #[test]
    fn infeasible_instance_is_rejected() {
        let inst = Instance::new(vec![vertex(1, 0), vertex(1, 0)], vec![edge(1, &[1, 2])]).unwrap();
        assert!(matches!(run(&inst), Err(RoundingError::Infeasible(_))));
    }
}
