//! Two-phase bounded-variable primal simplex over exact rationals.
//!
//! Entering and leaving variables follow Bland's rule (smallest column
//! index among eligible candidates, bound flips included), so degenerate
//! pivots cannot cycle. The tableau keeps the slack and artificial columns,
//! which makes `B^{-1}` and hence the row duals available at the end.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{DualCertificate, FractionalPoint, LpError, LpModel, Sense, VarId};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `B^{-1} A`, one dense row per constraint.
    a: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    value: Vec<Rational>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    kind: Vec<Column>,
    /// Column holding `±e_i` initially, and that sign.
    unit: Vec<(usize, Rational)>,
}

enum Step {
    Optimal,
    Pivoted,
}

impl Tableau {
    fn from_model(model: &LpModel) -> Self {
        let n = model.num_vars();
        let rows = model.rows();
        let mut kind = vec![Column::Structural; n];
        let mut lower = model.lower().to_vec();
        let mut upper = model.upper().to_vec();
        let mut value = model.lower().to_vec();

        // Column layout: structural, then one slack per `<=` row, then artificials.
        let mut slack_of = vec![None; rows.len()];
        for (i, row) in rows.iter().enumerate() {
            if row.sense == Sense::Le {
                slack_of[i] = Some(kind.len());
                kind.push(Column::Slack);
                lower.push(Rational::zero());
                upper.push(None);
                value.push(Rational::zero());
            }
        }
        let residual: Vec<Rational> = rows
            .iter()
            .map(|row| &row.rhs - row.activity(&model.lower()[..n]))
            .collect();
        let mut artificial_of = vec![None; rows.len()];
        for (i, row) in rows.iter().enumerate() {
            let needs = match row.sense {
                Sense::Eq => true,
                Sense::Le => residual[i].is_negative(),
            };
            if needs {
                artificial_of[i] = Some(kind.len());
                kind.push(Column::Artificial);
                lower.push(Rational::zero());
                upper.push(None);
                value.push(Rational::zero());
            }
        }

        let cols = kind.len();
        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut unit = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut dense = vec![Rational::zero(); cols];
            for (j, coef) in &row.coeffs {
                dense[*j] = coef.clone();
            }
            if let Some(s) = slack_of[i] {
                dense[s] = rational::one();
            }
            let (basic, sign) = match artificial_of[i] {
                Some(art) => {
                    let sign = if residual[i].is_negative() {
                        -rational::one()
                    } else {
                        rational::one()
                    };
                    dense[art] = sign.clone();
                    value[art] = residual[i].abs();
                    (art, sign)
                }
                None => {
                    let s = slack_of[i].expect("`<=` row without artificial has a slack");
                    value[s] = residual[i].clone();
                    (s, rational::one())
                }
            };
            if sign.is_negative() {
                for entry in dense.iter_mut() {
                    *entry = -&*entry;
                }
            }
            let unit_col = slack_of[i].unwrap_or(basic);
            let unit_sign = if unit_col == basic { sign } else { rational::one() };
            unit.push((unit_col, unit_sign));
            a.push(dense);
            basis.push(basic);
        }
        let mut basic_row = vec![None; cols];
        for (i, &b) in basis.iter().enumerate() {
            basic_row[b] = Some(i);
        }
        Tableau {
            a,
            basis,
            basic_row,
            value,
            lower,
            upper,
            kind,
            unit,
        }
    }

    fn cols(&self) -> usize {
        self.kind.len()
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, aij) in self.a[i].iter().enumerate() {
                if !aij.is_zero() {
                    d[j] -= &cost[b] * aij;
                }
            }
        }
        d
    }

    fn at_upper(&self, j: usize) -> bool {
        self.upper[j].as_ref() == Some(&self.value[j])
    }

    fn step(&mut self, cost: &[Rational], blocked: &dyn Fn(usize) -> bool) -> Result<Step, LpError> {
        let d = self.reduced_costs(cost);
        let entering = (0..self.cols()).find_map(|j| {
            if self.basic_row[j].is_some() || blocked(j) {
                return None;
            }
            let can_rise = !self.at_upper(j);
            let can_fall = self.value[j] > self.lower[j];
            if d[j].is_negative() && can_rise {
                Some((j, true))
            } else if d[j].is_positive() && can_fall {
                Some((j, false))
            } else {
                None
            }
        });
        let Some((q, rising)) = entering else {
            return Ok(Step::Optimal);
        };

        // Ratio test; candidates are (step length, column, row or None for a bound flip).
        let mut best: Option<(Rational, usize, Option<usize>)> = None;
        let mut offer = |t: Rational, col: usize, row: Option<usize>| {
            let better = match &best {
                None => true,
                Some((bt, bc, _)) => t < *bt || (t == *bt && col < *bc),
            };
            if better {
                best = Some((t, col, row));
            }
        };
        if let Some(u) = &self.upper[q] {
            offer(u - &self.lower[q], q, None);
        }
        for (i, row) in self.a.iter().enumerate() {
            let alpha = &row[q];
            if alpha.is_zero() {
                continue;
            }
            let b = self.basis[i];
            // Basic value moves by -alpha * t when q rises, +alpha * t when it falls.
            let falls = alpha.is_positive() == rising;
            if falls {
                offer((&self.value[b] - &self.lower[b]) / alpha.abs(), b, Some(i));
            } else if let Some(u) = &self.upper[b] {
                offer((u - &self.value[b]) / alpha.abs(), b, Some(i));
            }
        }
        let Some((t, leaving, row)) = best else {
            return Err(LpError::Unbounded);
        };

        let delta = if rising { t.clone() } else { -t.clone() };
        if !delta.is_zero() {
            self.value[q] += &delta;
            for i in 0..self.a.len() {
                let alpha = &self.a[i][q];
                if !alpha.is_zero() {
                    let b = self.basis[i];
                    self.value[b] -= alpha * &delta;
                }
            }
        }
        if let Some(r) = row {
            // Snap the leaving variable onto the bound it reached.
            let hit_lower = self.a[r][q].is_positive() == rising;
            self.value[leaving] = if hit_lower {
                self.lower[leaving].clone()
            } else {
                self.upper[leaving].clone().expect("finite upper bound was hit")
            };
            self.pivot(r, q);
        } else {
            self.value[q] = if rising {
                self.upper[q].clone().expect("flip needs an upper bound")
            } else {
                self.lower[q].clone()
            };
        }
        Ok(Step::Pivoted)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.a[r][q].clone();
        for entry in self.a[r].iter_mut() {
            if !entry.is_zero() {
                *entry /= &piv;
            }
        }
        let pivot_row = std::mem::take(&mut self.a[r]);
        let support: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[q].is_zero() {
                continue;
            }
            let factor = row[q].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        }
        self.a[r] = pivot_row;
        let old = self.basis[r];
        self.basic_row[old] = None;
        self.basis[r] = q;
        self.basic_row[q] = Some(r);
    }

    fn run(&mut self, cost: &[Rational], blocked: &dyn Fn(usize) -> bool) -> Result<(), LpError> {
        while let Step::Pivoted = self.step(cost, blocked)? {}
        Ok(())
    }
}

/// Optimal extreme point of LP(Ψ) with tight set and dual certificate.
pub fn solve_basic_optimal(model: &LpModel) -> Result<FractionalPoint, LpError> {
    let n = model.num_vars();
    let mut t = Tableau::from_model(model);
    let cols = t.cols();

    let phase1: Vec<Rational> = t
        .kind
        .iter()
        .map(|k| match k {
            Column::Artificial => rational::one(),
            _ => Rational::zero(),
        })
        .collect();
    t.run(&phase1, &|_| false)?;
    let infeasibility: Rational = (0..cols)
        .filter(|&j| t.kind[j] == Column::Artificial)
        .map(|j| t.value[j].clone())
        .sum();
    if infeasibility.is_positive() {
        return Err(LpError::Infeasible);
    }
    // Artificials are pinned to zero for phase two.
    for j in 0..cols {
        if t.kind[j] == Column::Artificial {
            t.upper[j] = Some(Rational::zero());
        }
    }
    let mut phase2 = vec![Rational::zero(); cols];
    phase2[..n].clone_from_slice(model.objective());
    let kinds = t.kind.clone();
    t.run(&phase2, &|j| kinds[j] == Column::Artificial)?;

    let d = t.reduced_costs(&phase2);
    let row_duals: Vec<Rational> = t
        .unit
        .iter()
        .map(|(col, sign)| -(&d[*col] / sign))
        .collect();
    let values: Vec<Rational> = t.value[..n].to_vec();
    debug_assert!(model.check_feasible(&values).is_ok());

    let mut x = vec![Rational::zero(); model.num_vertices()];
    let mut h = BTreeMap::new();
    for (j, var) in model.vars().iter().enumerate() {
        match var {
            VarId::X { vertex } => x[vertex.index()] = values[j].clone(),
            VarId::H { edge, vertex } => {
                h.insert((*edge, *vertex), values[j].clone());
            }
        }
    }
    Ok(FractionalPoint {
        objective: model.objective_value(&values),
        tight: model.tight_constraints(&values),
        certificate: DualCertificate {
            row_duals,
            reduced_costs: d[..n].to_vec(),
        },
        x,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_lp, Row, RowId};
    use super::*;
    use crate::instance::fixtures::{pair, triangle, one_edge, vertex};
    use crate::instance::{initial_tuple, EdgeId, Instance, VertexId};
    use crate::rational::{frac, int};

    #[test]
    fn pair_root() {
        let inst = pair();
        let model = build_lp(&inst, &initial_tuple(&inst));
        let p = solve_basic_optimal(&model).unwrap();
        assert_eq!(p.objective, int(1));
        // Both symmetric optima are extreme; determinism picks the first.
        assert_eq!(p.x, vec![int(1), int(0)]);
        assert_eq!(p.h[&(EdgeId(1), VertexId(1))], int(1));
        assert_eq!(p.h[&(EdgeId(1), VertexId(2))], int(0));
        assert!(p.certificate.verify(&model, &model.assemble(&p.x, &p.h)).is_ok());
    }

    #[test]
    fn one_edge_agrees_with_integral() {
        let inst = one_edge();
        let model = build_lp(&inst, &initial_tuple(&inst));
        let p = solve_basic_optimal(&model).unwrap();
        assert_eq!(p.x, vec![int(1)]);
    }

    #[test]
    fn lower_bounds_force_point() {
        let inst = Instance::new(vec![vertex(1, 1), vertex(1, 1)], vec![]).unwrap();
        let mut psi = initial_tuple(&inst);
        psi.lower_bounds[0] = int(1);
        let p = solve_basic_optimal(&build_lp(&inst, &psi)).unwrap();
        assert_eq!(p.x, vec![int(1), int(0)]);
        assert_eq!(p.objective, int(1));
    }

    #[test]
    fn triangle_root_saturates_every_vertex() {
        // Total demand 6 against capacity 2 per copy forces Σx >= 3 = Σm.
        let inst = triangle();
        let model = build_lp(&inst, &initial_tuple(&inst));
        let p = solve_basic_optimal(&model).unwrap();
        assert_eq!(p.objective, int(3));
        assert_eq!(p.x, vec![int(1); 3]);
    }

    #[test]
    fn fractional_capacity_solution() {
        // One edge of demand 1 on a vertex with capacity 2: x >= max(h, d/c) = 1.
        let inst = Instance::new(
            vec![vertex(2, 3), vertex(1, 3)],
            vec![
                crate::instance::fixtures::edge(3, &[1, 2]),
                crate::instance::fixtures::edge(1, &[1]),
            ],
        )
        .unwrap();
        let model = build_lp(&inst, &initial_tuple(&inst));
        let p = solve_basic_optimal(&model).unwrap();
        let values = model.assemble(&p.x, &p.h);
        assert!(model.check_feasible(&values).is_ok());
        assert!(p.certificate.verify(&model, &values).is_ok());
        assert_eq!(p.objective, int(2));
    }

    #[test]
    fn infeasible_model_is_reported() {
        let inst = Instance::new(vec![vertex(1, 0)], vec![crate::instance::fixtures::edge(1, &[1])]).unwrap();
        let model = build_lp(&inst, &initial_tuple(&inst));
        assert_eq!(solve_basic_optimal(&model), Err(LpError::Infeasible));
    }

    #[test]
    fn deterministic() {
        let inst = triangle();
        let model = build_lp(&inst, &initial_tuple(&inst));
        assert_eq!(solve_basic_optimal(&model), solve_basic_optimal(&model));
    }

    #[test]
    fn handles_negative_residual_rows() {
        // A hand-built `<=` row whose residual at the lower bounds is negative.
        let inst = pair();
        let mut model = build_lp(&inst, &initial_tuple(&inst));
        model.rows.push(Row {
            id: RowId::Support { edge: EdgeId(9), vertex: VertexId(9) },
            coeffs: vec![(0, -rational::one())],
            sense: Sense::Le,
            rhs: frac(-1, 2),
        });
        let p = solve_basic_optimal(&model).unwrap();
        assert!(p.x[0] >= frac(1, 2));
        assert_eq!(p.objective, int(1));
    }
}
