//! Run report written by `solve --report`.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use capvc::flow::CutWitness;
use capvc::instance::Instance;
use capvc::oracle::{brute_force_optimal, OracleOutcome};
use capvc::rational::{self, Rational};
use capvc::rounding::Trace;
use capvc::solution::{self, Solution};

#[derive(Debug, Serialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub objective: String,
    pub small_set_size: usize,
    pub edges_folded: usize,
}

#[derive(Debug, Serialize)]
pub struct OracleComparison {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt: Option<u64>,
    pub alg: u64,
    /// `alg / opt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_to_opt: Option<String>,
    pub within_f_opt: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl OracleComparison {
    pub fn new(inst: &Instance, sol: &Solution) -> Self {
        let mut cmp = OracleComparison {
            status: "error",
            opt: None,
            alg: sol.objective,
            ratio_to_opt: None,
            within_f_opt: false,
            error: None,
        };
        match brute_force_optimal(inst, None) {
            Ok(r) => match r.outcome {
                OracleOutcome::Optimal { value, .. } => {
                    cmp.status = "optimal";
                    cmp.opt = Some(value);
                    cmp.ratio_to_opt = solution::ratio(sol.objective, &Rational::from_integer(value.into()))
                        .map(|q| rational::render(&q));
                    cmp.within_f_opt = sol.objective <= inst.f() as u64 * value;
                }
                OracleOutcome::Infeasible => cmp.status = "infeasible",
                OracleOutcome::BudgetExhausted { .. } => cmp.status = "budget_exhausted",
            },
            Err(e) => cmp.error = Some(e.to_string()),
        }
        cmp
    }

    pub fn summary(&self) -> String {
        match (self.opt, &self.ratio_to_opt) {
            (Some(opt), Some(r)) => format!("oracle: alg {} opt {opt} ratio {r}", self.alg),
            (Some(opt), None) => format!("oracle: alg {} opt {opt}", self.alg),
            _ => match &self.error {
                Some(e) => format!("oracle: skipped ({e})"),
                None => format!("oracle: {}", self.status),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub f: usize,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CutWitness>,
    pub fast_path: bool,
    pub iterations: Vec<IterationRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_root_objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    pub wall_clock_ms: f64,
}

impl RunReport {
    pub fn solved(
        path: &Path,
        inst: &Instance,
        sol: &Solution,
        trace: &Trace,
        oracle: Option<OracleComparison>,
        elapsed: Duration,
    ) -> Self {
        let iterations = trace
            .iterations
            .iter()
            .map(|rec| IterationRow {
                iteration: rec.index,
                objective: rational::render(&rec.point.objective),
                small_set_size: rec.small_set.len(),
                edges_folded: rec.folded.len(),
            })
            .collect();
        RunReport {
            instance: path.display().to_string(),
            f: inst.f(),
            feasible: true,
            witness: None,
            fast_path: trace.fast_path,
            iterations,
            objective: Some(sol.objective),
            lp_root_objective: Some(rational::render(&sol.lp_root_objective)),
            ratio: Some(rational::render(&sol.ratio)),
            oracle,
            wall_clock_ms: millis(elapsed),
        }
    }

    pub fn infeasible(path: &Path, inst: &Instance, witness: CutWitness, elapsed: Duration) -> Self {
        RunReport {
            instance: path.display().to_string(),
            f: inst.f(),
            feasible: false,
            witness: Some(witness),
            fast_path: false,
            iterations: Vec::new(),
            objective: None,
            lp_root_objective: None,
            ratio: None,
            oracle: None,
            wall_clock_ms: millis(elapsed),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

pub fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
