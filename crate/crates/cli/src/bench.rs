//! `bench`: solve, oracle and verify over a directory, one CSV row per instance.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use capvc::oracle::brute_force_optimal;
use capvc::rational::{self, Rational};
use capvc::rounding::{run, RoundingError};
use capvc::solution;
use capvc::verify::verify_solution;

use crate::load_instance;
use crate::report::millis;

const INFEASIBLE: &str = "infeasible";

#[derive(Debug, Serialize)]
struct Row {
    instance: String,
    n: usize,
    m: usize,
    f: usize,
    opt: String,
    alg: String,
    /// `alg / opt`; empty when the oracle was skipped.
    ratio: String,
    iterations: usize,
    ms: String,
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|ext| ext == "vchc") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run_dir(dir: &Path, output: Option<&Path>) -> Result<ExitCode> {
    let files = instance_files(dir)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut failures = 0usize;

    for path in &files {
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let inst = load_instance(path)?;
        let mut row = Row {
            instance: name.clone(),
            n: inst.num_vertices(),
            m: inst.num_edges(),
            f: inst.f(),
            opt: String::new(),
            alg: String::new(),
            ratio: String::new(),
            iterations: 0,
            ms: String::new(),
        };
        let started = Instant::now();
        let outcome = run(&inst);
        row.ms = format!("{:.3}", millis(started.elapsed()));

        let opt = match brute_force_optimal(&inst, None) {
            Ok(r) => r.opt(),
            Err(e) => {
                eprintln!("{name}: oracle skipped ({e})");
                None
            }
        };
        match outcome {
            Ok((sol, trace)) => {
                row.alg = sol.objective.to_string();
                row.iterations = trace.iterations.len();
                if let Some(opt) = opt {
                    row.opt = opt.to_string();
                    if let Some(r) = solution::ratio(sol.objective, &Rational::from_integer(opt.into())) {
                        row.ratio = rational::render(&r);
                    }
                }
                let report = verify_solution(&inst, &sol);
                if !report.pass {
                    failures += 1;
                    for v in &report.violations {
                        eprintln!("{name}: violation: {v}");
                    }
                    if report.violations.is_empty() {
                        eprintln!("{name}: ratio exceeds f");
                    }
                }
            }
            Err(RoundingError::Infeasible(w)) => {
                eprintln!("{name}: infeasible: {w}");
                row.alg = INFEASIBLE.to_string();
                row.opt = INFEASIBLE.to_string();
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                failures += 1;
            }
        }
        out.serialize(&row)?;
    }

    let bytes = out.into_inner().context("flushing CSV")?;
    let text = String::from_utf8(bytes).context("CSV is not UTF-8")?;
    crate::emit(output, &text)?;
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(crate::EXIT_FAIL)
    })
}
