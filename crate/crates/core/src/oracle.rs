//! Exhaustive optimum for small instances.

use num_bigint::BigInt;
use serde::Serialize;

use crate::flow::{check_feasibility, cover_with_multiplicities, Assignment, Feasibility};
use crate::instance::Instance;
use crate::rational::{self, Rational};
use crate::solution::Solution;

pub const DEFAULT_MAX_SPACE: u128 = 10_000_000;
pub const MAX_SPACE_ENV: &str = "CAPVC_MAX_ORACLE_SPACE";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("search space of {space} vectors exceeds the limit {limit}; pass a budget cap or raise {MAX_SPACE_ENV}")]
    SearchSpaceTooLarge { space: u128, limit: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal { value: u64, x: Vec<u64>, h: Assignment },
    Infeasible,
    /// No cover with total multiplicity at most the cap.
    BudgetExhausted { cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub outcome: OracleOutcome,
    /// Flow checks performed.
    pub explored: u64,
}

impl OracleResult {
    pub fn opt(&self) -> Option<u64> {
        match &self.outcome {
            OracleOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// The witness as a solution whose ratio is taken against itself.
    pub fn as_solution(&self) -> Option<Solution> {
        let OracleOutcome::Optimal { value, x, h } = &self.outcome else {
            return None;
        };
        Some(Solution {
            x: x.clone(),
            h: h.clone(),
            objective: *value,
            lp_root_objective: Rational::from_integer(BigInt::from(*value)),
            ratio: rational::one(),
        })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc {
            status: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            opt: Option<u64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            x: Option<std::collections::BTreeMap<usize, u64>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            h: Option<Vec<(usize, usize, String)>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            budget_cap: Option<u64>,
            explored: u64,
        }
        let mut doc = Doc {
            status: "optimal",
            opt: None,
            x: None,
            h: None,
            budget_cap: None,
            explored: self.explored,
        };
        match &self.outcome {
            OracleOutcome::Optimal { value, x, h } => {
                doc.opt = Some(*value);
                doc.x = Some(x.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect());
                doc.h = Some(h.iter().map(|((e, v), q)| (e.0, v.0, rational::render(q))).collect());
            }
            OracleOutcome::Infeasible => doc.status = "infeasible",
            OracleOutcome::BudgetExhausted { cap } => {
                doc.status = "budget_exhausted";
                doc.budget_cap = Some(*cap);
            }
        }
        let mut out = serde_json::to_string_pretty(&doc).expect("oracle result serializes");
        out.push('\n');
        out
    }
}

/// Search-space limit, from the environment when set.
pub fn max_search_space() -> u128 {
    std::env::var(MAX_SPACE_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_SPACE)
}

/// Visits every `x` with `Σx = budget` and `0 <= x_v <= m_v`, lexicographically.
fn for_each_split(m: &[u64], budget: u64, visit: &mut dyn FnMut(&[u64]) -> bool) -> bool {
    fn rec(m: &[u64], suffix_cap: &[u64], i: usize, left: u64, x: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if i == m.len() {
            return left == 0 && visit(x);
        }
        let lo = left.saturating_sub(suffix_cap[i + 1]);
        let hi = m[i].min(left);
        for value in lo..=hi {
            x.push(value);
            let stop = rec(m, suffix_cap, i + 1, left - value, x, visit);
            x.pop();
            if stop {
                return true;
            }
        }
        false
    }
    let mut suffix_cap = vec![0u64; m.len() + 1];
    for i in (0..m.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1] + m[i];
    }
    if budget > suffix_cap[0] {
        return false;
    }
    rec(m, &suffix_cap, 0, budget, &mut Vec::with_capacity(m.len()), visit)
}

/// Minimum `Σx` over integral covers, found by increasing total budget.
pub fn brute_force_optimal(inst: &Instance, budget_cap: Option<u64>) -> Result<OracleResult, OracleError> {
    let space = inst.search_space();
    let limit = max_search_space();
    if budget_cap.is_none() && space > limit {
        return Err(OracleError::SearchSpaceTooLarge { space, limit });
    }
    let mut explored = 1;
    if !check_feasibility(inst).outcome.is_feasible() {
        return Ok(OracleResult {
            outcome: OracleOutcome::Infeasible,
            explored,
        });
    }
    let m: Vec<u64> = inst.vertices().iter().map(|v| v.multiplicity).collect();
    let total: u64 = m.iter().sum();
    let top = budget_cap.map_or(total, |c| c.min(total));
    let demand = inst.total_demand();
    for budget in 0..=top {
        let mut found = None;
        for_each_split(&m, budget, &mut |x| {
            let offered: Rational = inst
                .vertices()
                .iter()
                .zip(x)
                .map(|(v, &k)| &v.capacity * Rational::from_integer(BigInt::from(k)))
                .sum();
            if offered < demand {
                return false;
            }
            explored += 1;
            if let Feasibility::Feasible(h) = cover_with_multiplicities(inst, x) {
                found = Some((x.to_vec(), h));
                return true;
            }
            false
        });
        if let Some((x, h)) = found {
            return Ok(OracleResult {
                outcome: OracleOutcome::Optimal { value: budget, x, h },
                explored,
            });
        }
    }
    let outcome = match budget_cap {
        Some(cap) if cap < total => OracleOutcome::BudgetExhausted { cap },
        _ => OracleOutcome::Infeasible,
    };
    Ok(OracleResult { outcome, explored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{pair, triangle, vertex};

    fn splits(m: &[u64], budget: u64) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        for_each_split(m, budget, &mut |x| {
            out.push(x.to_vec());
            false
        });
        out
    }

    #[test]
    fn splits_are_lexicographic_and_bounded() {
        assert_eq!(splits(&[1, 2], 2), vec![vec![0, 2], vec![1, 1]]);
        assert_eq!(splits(&[1, 1], 3), Vec::<Vec<u64>>::new());
        assert_eq!(splits(&[], 0), vec![Vec::<u64>::new()]);
        assert_eq!(splits(&[3, 3, 3], 4).len(), 12);
    }

    #[test]
    fn pair_optimum_is_one() {
        let r = brute_force_optimal(&pair(), None).unwrap();
        assert_eq!(r.opt(), Some(1));
        let OracleOutcome::Optimal { x, .. } = &r.outcome else { panic!() };
        assert!(x == &vec![1, 0] || x == &vec![0, 1]);
    }

    #[test]
    fn triangle_optimum_is_three() {
        let r = brute_force_optimal(&triangle(), None).unwrap();
        assert_eq!(r.opt(), Some(3));
    }

    #[test]
    fn triangle_without_copies_is_infeasible() {
        let inst = Instance::new(vec![vertex(2, 0), vertex(2, 0), vertex(2, 0)], triangle().edges().to_vec()).unwrap();
        assert_eq!(brute_force_optimal(&inst, None).unwrap().outcome, OracleOutcome::Infeasible);
    }

    #[test]
    fn budget_cap_stops_early() {
        let r = brute_force_optimal(&triangle(), Some(2)).unwrap();
        assert_eq!(r.outcome, OracleOutcome::BudgetExhausted { cap: 2 });
    }

    #[test]
    fn space_guard() {
        let inst = Instance::new(vec![vertex(1, 10_000); 3], vec![]).unwrap();
        assert!(matches!(
            brute_force_optimal(&inst, None),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
        assert_eq!(brute_force_optimal(&inst, Some(0)).unwrap().opt(), Some(0));
    }
}
