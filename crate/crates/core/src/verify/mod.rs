//! Independent checks of solutions and of the strong-partition structure
//! at a final extreme point.
//!
//! [`verify_solution`] only reads the instance and the solution, so it can
//! referee output from any solver.

mod decomposition;
mod separation;

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use crate::instance::{EdgeId, Instance, VertexId};
use crate::rational::{self, Rational};
use crate::solution::{self, Solution};

pub use decomposition::{check_rounding_decomposition, DecompositionError, DecompositionReport};
pub use separation::{
    active_subedge, compute_separation_certificate, large_set, CertificateCheck, Hypothesis, SeparationCertificate,
    SeparationError, SigmaEntry,
};

/// A failed constraint with the amount by which it fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum ConstraintViolation {
    /// Vertex count of the solution differs from the instance.
    Shape { expected: usize, found: usize },
    /// Assignment entry for a pair that is not an incidence.
    UnknownIncidence { edge: EdgeId, vertex: VertexId },
    /// `Σ_v h_{e,v} - 1 ≠ 0`.
    EdgeSum {
        edge: EdgeId,
        #[serde(with = "rational::as_string")]
        residual: Rational,
    },
    /// `Σ_e d_e h_{e,v} - c_v x_v > 0`.
    Capacity {
        vertex: VertexId,
        #[serde(with = "rational::as_string")]
        residual: Rational,
    },
    /// `x_v - m_v > 0`.
    Multiplicity { vertex: VertexId, residual: u64 },
    /// `h_{e,v} < 0`.
    NegativeAssignment {
        edge: EdgeId,
        vertex: VertexId,
        #[serde(with = "rational::as_string")]
        residual: Rational,
    },
    /// `h_{e,v} - x_v > 0`.
    Support {
        edge: EdgeId,
        vertex: VertexId,
        #[serde(with = "rational::as_string")]
        residual: Rational,
    },
    Objective { claimed: u64, actual: u64 },
    Ratio {
        #[serde(with = "rational::as_string")]
        claimed: Rational,
        #[serde(serialize_with = "optional_rational")]
        actual: Option<Rational>,
    },
    NegativeLpRoot {
        #[serde(with = "rational::as_string")]
        value: Rational,
    },
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConstraintViolation::*;
        match self {
            Shape { expected, found } => write!(f, "solution has {found} vertices, instance has {expected}"),
            UnknownIncidence { edge, vertex } => write!(f, "({edge}, {vertex}) is not an incidence"),
            EdgeSum { edge, residual } => write!(f, "edge {edge}: assignment sum off by {residual}"),
            Capacity { vertex, residual } => write!(f, "vertex {vertex}: load exceeds budget by {residual}"),
            Multiplicity { vertex, residual } => write!(f, "vertex {vertex}: x exceeds m by {residual}"),
            NegativeAssignment { edge, vertex, residual } => {
                write!(f, "h_({edge},{vertex}) is negative by {residual}")
            }
            Support { edge, vertex, residual } => write!(f, "h_({edge},{vertex}) exceeds x by {residual}"),
            Objective { claimed, actual } => write!(f, "objective claimed {claimed}, actual {actual}"),
            Ratio { claimed, actual } => match actual {
                Some(a) => write!(f, "ratio claimed {claimed}, actual {a}"),
                None => write!(f, "ratio claimed {claimed}, but the LP root is zero"),
            },
            NegativeLpRoot { value } => write!(f, "LP root objective {value} is negative"),
        }
    }
}

fn optional_rational<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(q) => s.serialize_str(&rational::render(q)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub violations: Vec<ConstraintViolation>,
    pub objective: u64,
    #[serde(serialize_with = "optional_rational")]
    pub ratio: Option<Rational>,
    pub f: usize,
    pub ratio_within_f: bool,
    /// The `ratio <= f` check is waived for `f = 1`.
    pub pass: bool,
}

/// Checks every constraint of the root relaxation exactly over the original edges
/// and recomputes objective and ratio.
pub fn verify_solution(inst: &Instance, sol: &Solution) -> VerificationReport {
    let mut violations = Vec::new();
    let n = inst.num_vertices();
    if sol.x.len() != n {
        violations.push(ConstraintViolation::Shape {
            expected: n,
            found: sol.x.len(),
        });
    }
    let x = |v: VertexId| Rational::from_integer(BigInt::from(sol.x.get(v.index()).copied().unwrap_or(0)));
    let h = |e: EdgeId, v: VertexId| sol.h.get(&(e, v)).cloned().unwrap_or_default();

    for &(e, v) in sol.h.keys() {
        let known = e.0 >= 1 && e.0 <= inst.num_edges() && inst.edge(e).vertices.binary_search(&v).is_ok();
        if !known {
            violations.push(ConstraintViolation::UnknownIncidence { edge: e, vertex: v });
        }
    }
    for e in inst.edge_ids() {
        let sum: Rational = inst.edge(e).vertices.iter().map(|&v| h(e, v)).sum();
        if sum != rational::one() {
            violations.push(ConstraintViolation::EdgeSum {
                edge: e,
                residual: sum - rational::one(),
            });
        }
    }
    for v in inst.vertex_ids() {
        let load: Rational = inst
            .incident_edges(v)
            .iter()
            .map(|&e| inst.demand(e) * h(e, v))
            .sum();
        let excess = load - inst.capacity(v) * x(v);
        if excess.is_positive() {
            violations.push(ConstraintViolation::Capacity {
                vertex: v,
                residual: excess,
            });
        }
        let xv = sol.x.get(v.index()).copied().unwrap_or(0);
        if xv > inst.multiplicity(v) {
            violations.push(ConstraintViolation::Multiplicity {
                vertex: v,
                residual: xv - inst.multiplicity(v),
            });
        }
    }
    for e in inst.edge_ids() {
        for &v in &inst.edge(e).vertices {
            let hv = h(e, v);
            if hv.is_negative() {
                violations.push(ConstraintViolation::NegativeAssignment {
                    edge: e,
                    vertex: v,
                    residual: -hv.clone(),
                });
            }
            let over = &hv - x(v);
            if over.is_positive() {
                violations.push(ConstraintViolation::Support {
                    edge: e,
                    vertex: v,
                    residual: over,
                });
            }
        }
    }

    let objective: u64 = sol.x.iter().sum();
    if objective != sol.objective {
        violations.push(ConstraintViolation::Objective {
            claimed: sol.objective,
            actual: objective,
        });
    }
    if sol.lp_root_objective.is_negative() {
        violations.push(ConstraintViolation::NegativeLpRoot {
            value: sol.lp_root_objective.clone(),
        });
    }
    let ratio = solution::ratio(objective, &sol.lp_root_objective);
    if ratio.as_ref() != Some(&sol.ratio) {
        violations.push(ConstraintViolation::Ratio {
            claimed: sol.ratio.clone(),
            actual: ratio.clone(),
        });
    }
    let f = inst.f();
    let ratio_within_f = ratio
        .as_ref()
        .is_some_and(|r| !r.is_negative() && *r <= Rational::from_integer(BigInt::from(f)));
    let pass = violations.is_empty() && (ratio_within_f || f == 1);
    VerificationReport {
        violations,
        objective,
        ratio,
        f,
        ratio_within_f,
        pass,
    }
}
