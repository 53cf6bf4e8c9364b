use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{ConstraintId, LpError, LpModel, Sense};
use crate::instance::{EdgeId, VertexId};
use crate::linalg;
use crate::rational::Rational;

/// Row duals `y` and reduced costs `d = c - Aᵀy` from the final basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    /// Aligned with [`LpModel::rows`].
    pub row_duals: Vec<Rational>,
    /// Aligned with [`LpModel::vars`].
    pub reduced_costs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate has the wrong shape for this model")]
    Shape,
    #[error("dual of `<=` row {0} is positive")]
    DualSign(String),
    #[error("row {0} has a nonzero dual but is slack")]
    Complementarity(String),
    #[error("reduced cost of {var} is {value} but the variable is not at the matching bound")]
    ReducedCost { var: String, value: Rational },
    #[error("primal objective {primal} differs from dual objective {dual}")]
    Gap { primal: Rational, dual: Rational },
}

impl DualCertificate {
    /// Re-derives the reduced costs from the model and checks optimality
    /// conditions exactly: dual sign, complementary slackness, bound
    /// consistency, and zero duality gap.
    pub fn verify(&self, model: &LpModel, values: &[Rational]) -> Result<(), CertificateError> {
        if self.row_duals.len() != model.rows().len() || values.len() != model.num_vars() {
            return Err(CertificateError::Shape);
        }
        let mut d = model.objective().to_vec();
        let mut dual_objective = Rational::zero();
        for (row, y) in model.rows().iter().zip(&self.row_duals) {
            if y.is_zero() {
                continue;
            }
            if row.sense == Sense::Le {
                if y.is_positive() {
                    return Err(CertificateError::DualSign(row.id.to_string()));
                }
                if row.activity(values) != row.rhs {
                    return Err(CertificateError::Complementarity(row.id.to_string()));
                }
            }
            for (j, a) in &row.coeffs {
                d[*j] -= a * y;
            }
            dual_objective += &row.rhs * y;
        }
        for (j, dj) in d.iter().enumerate() {
            let ok = if dj.is_positive() {
                values[j] == model.lower()[j]
            } else if dj.is_negative() {
                model.upper()[j].as_ref() == Some(&values[j])
            } else {
                true
            };
            if !ok {
                return Err(CertificateError::ReducedCost {
                    var: model.vars()[j].to_string(),
                    value: dj.clone(),
                });
            }
            if dj.is_positive() {
                dual_objective += dj * &model.lower()[j];
            } else if dj.is_negative() {
                dual_objective += dj * model.upper()[j].as_ref().expect("checked above");
            }
        }
        let primal = model.objective_value(values);
        if primal != dual_objective {
            return Err(CertificateError::Gap {
                primal,
                dual: dual_objective,
            });
        }
        if d != self.reduced_costs {
            return Err(CertificateError::Shape);
        }
        Ok(())
    }
}

/// A point `(x, h)` of Q(Ψ) as returned by the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalPoint {
    pub x: Vec<Rational>,
    /// Keyed by active incidence.
    pub h: BTreeMap<(EdgeId, VertexId), Rational>,
    pub objective: Rational,
    pub tight: Vec<ConstraintId>,
    pub certificate: DualCertificate,
}

impl FractionalPoint {
    pub fn x(&self, v: VertexId) -> &Rational {
        &self.x[v.index()]
    }

    /// Zero for incidences not in the point.
    pub fn h(&self, e: EdgeId, v: VertexId) -> Rational {
        self.h.get(&(e, v)).cloned().unwrap_or_default()
    }

    pub fn values(&self, model: &LpModel) -> Vec<Rational> {
        model.assemble(&self.x, &self.h)
    }

    /// Convex combination `(self + other) / 2`; the tight set and certificate
    /// are recomputed against `model` (the certificate is left empty).
    pub fn midpoint(&self, other: &FractionalPoint, model: &LpModel) -> FractionalPoint {
        let half = Rational::new(1.into(), 2.into());
        let x: Vec<Rational> = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a + b) * &half)
            .collect();
        let h: BTreeMap<_, _> = self
            .h
            .iter()
            .map(|(k, a)| (*k, (a + other.h(k.0, k.1)) * &half))
            .collect();
        let values = model.assemble(&x, &h);
        FractionalPoint {
            objective: model.objective_value(&values),
            tight: model.tight_constraints(&values),
            certificate: DualCertificate {
                row_duals: Vec::new(),
                reduced_costs: Vec::new(),
            },
            x,
            h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub variables: usize,
    pub tight_constraints: usize,
    pub pass: bool,
}

/// Recomputes the tight set from scratch and compares its rank with the
/// number of variables.
pub fn verify_extremality(point: &FractionalPoint, model: &LpModel) -> Result<RankReport, LpError> {
    let values = point.values(model);
    model.check_feasible(&values).map_err(LpError::PointInfeasible)?;
    let tight = model.tight_constraints(&values);
    let rows: Vec<Vec<Rational>> = tight.iter().map(|c| model.constraint_row(*c)).collect();
    let rank = linalg::rank(&rows, model.num_vars());
    Ok(RankReport {
        rank,
        variables: model.num_vars(),
        tight_constraints: tight.len(),
        pass: rank == model.num_vars(),
    })
}
