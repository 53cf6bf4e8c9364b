use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use super::{compute_small_set, compute_support_sets, fold_step};
use crate::instance::{EdgeId, Instance, ParamTuple, TupleError, VertexId};
use crate::lp::{build_lp, verify_extremality, CertificateError, FractionalPoint, LpError, RankReport, Violation};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub edge: EdgeId,
    /// Receives `h′_{e,v} = 1`.
    pub vertex: VertexId,
    pub support: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    /// 1-based.
    pub index: usize,
    pub tuple: ParamTuple,
    pub point: FractionalPoint,
    pub small_set: Vec<VertexId>,
    pub support_sets: BTreeMap<EdgeId, Vec<VertexId>>,
    /// Empty on the last iteration.
    pub folded: Vec<Fold>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub f: usize,
    /// Singleton-edge instances skip the loop; the only record is the root.
    pub fast_path: bool,
    pub root_objective: Rational,
    pub iterations: Vec<IterationRecord>,
    /// `h′`: each folded edge and the vertex it was folded into.
    pub folded_assignment: BTreeMap<EdgeId, VertexId>,
}

impl Trace {
    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.iterations.last()
    }

    pub fn final_point(&self) -> Option<&FractionalPoint> {
        self.final_record().map(|r| &r.point)
    }

    pub fn to_json(&self) -> String {
        let mut iterations = Vec::new();
        let mut prev: Option<&ParamTuple> = None;
        for rec in &self.iterations {
            let changed = |now: &[Rational], before: Option<&[Rational]>| -> BTreeMap<usize, String> {
                now.iter()
                    .enumerate()
                    .filter(|(i, q)| before.is_none_or(|b| &b[*i] != *q))
                    .map(|(i, q)| (i + 1, rational::render(q)))
                    .collect()
            };
            iterations.push(IterationJson {
                iteration: rec.index,
                active_edges: rec.tuple.active_edges.iter().map(|e| e.0).collect(),
                lower_bounds: changed(&rec.tuple.lower_bounds, prev.map(|p| p.lower_bounds.as_slice())),
                residual_capacities: changed(
                    &rec.tuple.residual_capacities,
                    prev.map(|p| p.residual_capacities.as_slice()),
                ),
                objective: rational::render(&rec.point.objective),
                x: rec
                    .point
                    .x
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i + 1, rational::render(q)))
                    .collect(),
                h: rec
                    .point
                    .h
                    .iter()
                    .map(|((e, v), q)| (e.0, v.0, rational::render(q)))
                    .collect(),
                small_set: rec.small_set.iter().map(|v| v.0).collect(),
                support_sets: rec
                    .support_sets
                    .iter()
                    .map(|(e, t)| (e.0, t.iter().map(|v| v.0).collect()))
                    .collect(),
                folded: rec
                    .folded
                    .iter()
                    .map(|fold| FoldJson {
                        edge: fold.edge.0,
                        vertex: fold.vertex.0,
                        support: fold.support.iter().map(|v| v.0).collect(),
                    })
                    .collect(),
            });
            prev = Some(&rec.tuple);
        }
        let doc = TraceJson {
            f: self.f,
            fast_path: self.fast_path,
            lp_root_objective: rational::render(&self.root_objective),
            iterations,
            folded_assignment: self.folded_assignment.iter().map(|(e, v)| (e.0, v.0)).collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("trace serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize)]
struct TraceJson {
    f: usize,
    fast_path: bool,
    lp_root_objective: String,
    iterations: Vec<IterationJson>,
    folded_assignment: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct IterationJson {
    iteration: usize,
    active_edges: Vec<usize>,
    lower_bounds: BTreeMap<usize, String>,
    residual_capacities: BTreeMap<usize, String>,
    objective: String,
    x: BTreeMap<usize, String>,
    h: Vec<(usize, usize, String)>,
    small_set: Vec<usize>,
    support_sets: BTreeMap<usize, Vec<usize>>,
    folded: Vec<FoldJson>,
}

#[derive(Serialize)]
struct FoldJson {
    edge: usize,
    vertex: usize,
    support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("iteration {iteration}: {violated}")]
pub struct InvariantViolation {
    pub iteration: usize,
    pub violated: Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violated {
    #[error("trace has no iterations")]
    Empty,
    #[error("parameter tuple invalid: {0}")]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Point(#[from] LpError),
    #[error("recorded objective {recorded} differs from {actual}")]
    Objective { recorded: Rational, actual: Rational },
    #[error("tight constraints have rank {rank} of {variables}")]
    NotExtreme { rank: usize, variables: usize },
    #[error("dual certificate rejected: {0}")]
    Certificate(#[from] CertificateError),
    #[error("recorded small set differs from recomputation")]
    SmallSet,
    #[error("recorded support sets differ from recomputation")]
    SupportSets,
    #[error("recorded folds or next tuple differ from the fold rule")]
    FoldRecord,
    #[error("folding {edge} with d_e = {demand} exceeds c′ = {residual} of {vertex}")]
    FoldUnsafe {
        edge: EdgeId,
        vertex: VertexId,
        demand: Rational,
        residual: Rational,
    },
    #[error("objective rose from {before} to {after}")]
    ObjectiveIncreased { before: Rational, after: Rational },
    #[error("lower bound sandwich fails at {vertex}")]
    Sandwich { vertex: VertexId },
    #[error("previous point infeasible for the refined tuple: {0}")]
    Refinement(Violation),
    #[error("{iterations} iterations for {edges} edges")]
    TooManyIterations { iterations: usize, edges: usize },
    #[error("final iteration still has a supporting edge")]
    NotTerminal,
    #[error("rounded objective {rounded} exceeds f times the root objective, {bound}")]
    FinalBound { rounded: BigInt, bound: Rational },
    #[error("folded assignment does not match the recorded folds")]
    FoldedAssignment,
}

/// What the audit measured, for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceAudit {
    pub rank_reports: Vec<RankReport>,
    pub folds: usize,
}

fn fail(iteration: usize, violated: impl Into<Violated>) -> InvariantViolation {
    InvariantViolation {
        iteration,
        violated: violated.into(),
    }
}

/// Recomputes every recorded quantity from the instance and checks the
/// loop invariants: exact optimality and extremality of each point, the
/// small and support sets, the fold rule and its safety, the lower-bound
/// sandwich, feasibility of each point for the next tuple, monotone
/// objective, termination, and the final rounding bound.
pub fn check_trace(inst: &Instance, trace: &Trace) -> Result<TraceAudit, InvariantViolation> {
    let f = inst.f();
    let last = trace.iterations.len();
    if last == 0 {
        return Err(fail(0, Violated::Empty));
    }
    if last > inst.num_edges() + 1 {
        return Err(fail(
            last,
            Violated::TooManyIterations {
                iterations: last,
                edges: inst.num_edges(),
            },
        ));
    }
    let inv_f = Rational::new(BigInt::from(1), BigInt::from(f));
    let mut audit = TraceAudit {
        rank_reports: Vec::new(),
        folds: 0,
    };
    let mut folded = BTreeMap::new();
    for (pos, rec) in trace.iterations.iter().enumerate() {
        let i = rec.index;
        rec.tuple.validate(inst).map_err(|e| fail(i, e))?;
        let model = build_lp(inst, &rec.tuple);
        let values = rec.point.values(&model);
        let actual = model.objective_value(&values);
        if actual != rec.point.objective {
            return Err(fail(
                i,
                Violated::Objective {
                    recorded: rec.point.objective.clone(),
                    actual,
                },
            ));
        }
        let report = verify_extremality(&rec.point, &model).map_err(|e| fail(i, e))?;
        if !report.pass {
            return Err(fail(
                i,
                Violated::NotExtreme {
                    rank: report.rank,
                    variables: report.variables,
                },
            ));
        }
        audit.rank_reports.push(report);
        rec.point.certificate.verify(&model, &values).map_err(|e| fail(i, e))?;
        if trace.fast_path {
            continue;
        }

        let small = compute_small_set(&rec.point.x, f);
        if small != rec.small_set {
            return Err(fail(i, Violated::SmallSet));
        }
        let support = compute_support_sets(inst, &rec.tuple, &rec.point, &small);
        if support != rec.support_sets {
            return Err(fail(i, Violated::SupportSets));
        }
        let Some(next) = trace.iterations.get(pos + 1) else {
            if support.values().any(|t| !t.is_empty()) || !rec.folded.is_empty() {
                return Err(fail(i, Violated::NotTerminal));
            }
            break;
        };

        for fold in &rec.folded {
            let d = inst.demand(fold.edge);
            for &v in &fold.support {
                let c = rec.tuple.residual_capacity(v);
                if d > c {
                    return Err(fail(
                        i,
                        Violated::FoldUnsafe {
                            edge: fold.edge,
                            vertex: v,
                            demand: d.clone(),
                            residual: c.clone(),
                        },
                    ));
                }
            }
            folded.insert(fold.edge, fold.vertex);
        }
        audit.folds += rec.folded.len();
        let (expected, folds) = fold_step(inst, &rec.tuple, &rec.point, &support).map_err(|_| fail(i, Violated::FoldRecord))?;
        if expected != next.tuple || folds != rec.folded {
            return Err(fail(i, Violated::FoldRecord));
        }

        for v in inst.vertex_ids() {
            let before = rec.tuple.lower_bound(v);
            let after = next.tuple.lower_bound(v);
            let x = rec.point.x(v);
            let bounded = |l: &Rational| !l.is_positive() || (*l >= inv_f && *l <= rational::one());
            if before > after || after > x || !bounded(before) || !bounded(after) {
                return Err(fail(i, Violated::Sandwich { vertex: v }));
            }
        }
        let refined = build_lp(inst, &next.tuple);
        let carried = refined.assemble(&rec.point.x, &rec.point.h);
        refined
            .check_feasible(&carried)
            .map_err(|v| fail(i, Violated::Refinement(v)))?;
        if next.point.objective > rec.point.objective {
            return Err(fail(
                next.index,
                Violated::ObjectiveIncreased {
                    before: rec.point.objective.clone(),
                    after: next.point.objective.clone(),
                },
            ));
        }
    }
    if folded != trace.folded_assignment {
        return Err(fail(last, Violated::FoldedAssignment));
    }

    if !trace.fast_path {
        let rounded: BigInt = trace.iterations[last - 1].point.x.iter().map(rational::ceil).sum();
        let bound = Rational::from_integer(BigInt::from(f)) * &trace.iterations[0].point.objective;
        if Rational::from_integer(rounded.clone()) > bound {
            return Err(fail(last, Violated::FinalBound { rounded, bound }));
        }
    }
    Ok(audit)
}
