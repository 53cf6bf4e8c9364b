//! `capvc`: solve, verify and benchmark capacitated hypergraph vertex cover instances.
//!
//! Exit codes: 0 ok, 1 error or failed check, 2 infeasible instance.

mod bench;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use capvc::flow::{check_feasibility, Feasibility};
use capvc::instance::{generate_instance, parse_instance, render_instance, GeneratorParams, Instance};
use capvc::lp::{build_lp, dump_lp};
use capvc::oracle::{brute_force_optimal, OracleOutcome};
use capvc::rational;
use capvc::rounding::{run, RoundingError};
use capvc::solution::Solution;
use capvc::verify::{compute_separation_certificate, large_set, verify_solution};

use report::{OracleComparison, RunReport};

const EXIT_FAIL: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "capvc", version)]
#[command(about = "Iterative partial rounding for vertex cover with hard capacities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the rounded cover
    Solve {
        instance: PathBuf,
        /// Solution JSON (stdout when omitted)
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-iteration trace JSON
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Run report JSON with timings
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also run the exhaustive oracle and compare
        #[arg(long)]
        compare_oracle: bool,
        /// Write every iteration's relaxation in LP text format
        #[arg(long)]
        lp_dump: Option<PathBuf>,
        /// Separation certificate of the final point
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Check a solution file against an instance
    Verify { instance: PathBuf, solution: PathBuf },
    /// Exhaustive integral optimum
    Oracle {
        instance: PathBuf,
        /// Stop after this total multiplicity
        #[arg(long)]
        budget_cap: Option<u64>,
    },
    /// Generate a random feasible instance
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 6)]
        edges: usize,
        #[arg(long, default_value_t = 3)]
        max_edge_size: usize,
        #[arg(long, default_value_t = 5)]
        max_demand: u64,
        #[arg(long, default_value_t = 5)]
        max_capacity: u64,
        #[arg(long, default_value_t = 3)]
        max_multiplicity: u64,
        /// Instance file (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Max-flow feasibility check with a cut witness
    CheckFeasibility { instance: PathBuf },
    /// Solve, verify and compare every `.vchc` file in a directory
    Bench {
        dir: PathBuf,
        /// CSV file (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve {
            instance,
            json,
            trace,
            report,
            compare_oracle,
            lp_dump,
            certificate,
        } => cmd_solve(&instance, json, trace, report, compare_oracle, lp_dump, certificate),
        Command::Verify { instance, solution } => cmd_verify(&instance, &solution),
        Command::Oracle { instance, budget_cap } => cmd_oracle(&instance, budget_cap),
        Command::Gen {
            seed,
            vertices,
            edges,
            max_edge_size,
            max_demand,
            max_capacity,
            max_multiplicity,
            output,
        } => {
            anyhow::ensure!(vertices >= 1, "--vertices must be at least 1");
            anyhow::ensure!(max_edge_size >= 1, "--max-edge-size must be at least 1");
            let params = GeneratorParams {
                vertices,
                edges,
                max_edge_size,
                max_demand,
                max_capacity,
                max_multiplicity,
            };
            let inst = generate_instance(seed, &params);
            let text = format!(
                "# seed {seed} vertices {vertices} edges {edges} max-edge-size {max_edge_size} \
                 max-demand {max_demand} max-capacity {max_capacity} max-multiplicity {max_multiplicity}\n{}",
                render_instance(&inst)
            );
            emit(output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckFeasibility { instance } => cmd_check_feasibility(&instance),
        Command::Bench { dir, output } => bench::run_dir(&dir, output.as_deref()),
    }
}

pub(crate) fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: &Path,
    json: Option<PathBuf>,
    trace_path: Option<PathBuf>,
    report_path: Option<PathBuf>,
    compare_oracle: bool,
    lp_dump: Option<PathBuf>,
    certificate: Option<PathBuf>,
) -> Result<ExitCode> {
    let inst = load_instance(path)?;
    let started = Instant::now();
    let outcome = run(&inst);
    let elapsed = started.elapsed();

    let (sol, trace) = match outcome {
        Ok(pair) => pair,
        Err(RoundingError::Infeasible(witness)) => {
            eprintln!("infeasible: {witness}");
            if let Some(p) = &report_path {
                let report = RunReport::infeasible(path, &inst, witness, elapsed);
                write_file(p, &report.to_json())?;
            }
            return Ok(ExitCode::from(EXIT_INFEASIBLE));
        }
        Err(err) => return Err(err).context("rounding failed"),
    };

    emit(json.as_deref(), &sol.to_json())?;
    if let Some(p) = &trace_path {
        write_file(p, &trace.to_json())?;
    }
    if let Some(p) = &lp_dump {
        let mut text = String::new();
        for rec in &trace.iterations {
            text.push_str(&format!("\\ iteration {}\n", rec.index));
            text.push_str(&dump_lp(&build_lp(&inst, &rec.tuple)));
        }
        write_file(p, &text)?;
    }
    if let Some(p) = &certificate {
        let last = trace.final_record().context("trace has no iterations")?;
        let large = large_set(&inst, &last.point.x);
        let cert = compute_separation_certificate(&inst, &last.tuple, &last.point, &last.small_set, &large)
            .context("separation certificate")?;
        write_file(p, &cert.to_json())?;
    }

    let oracle = if compare_oracle {
        let cmp = OracleComparison::new(&inst, &sol);
        eprintln!("{}", cmp.summary());
        Some(cmp)
    } else {
        None
    };
    if let Some(p) = &report_path {
        let report = RunReport::solved(path, &inst, &sol, &trace, oracle, elapsed);
        write_file(p, &report.to_json())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(inst_path: &Path, sol_path: &Path) -> Result<ExitCode> {
    let inst = load_instance(inst_path)?;
    let text = fs::read_to_string(sol_path).with_context(|| format!("reading {}", sol_path.display()))?;
    let sol = Solution::from_json(&text).with_context(|| format!("parsing {}", sol_path.display()))?;
    let report = verify_solution(&inst, &sol);
    let mut out = serde_json::to_string_pretty(&report)?;
    out.push('\n');
    print!("{out}");
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    if !report.ratio_within_f && inst.f() > 1 {
        eprintln!("violation: ratio exceeds f = {}", inst.f());
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}

fn cmd_oracle(path: &Path, budget_cap: Option<u64>) -> Result<ExitCode> {
    let inst = load_instance(path)?;
    let result = brute_force_optimal(&inst, budget_cap)?;
    print!("{}", result.to_json());
    if result.outcome == OracleOutcome::Infeasible {
        if let Feasibility::Infeasible(w) = check_feasibility(&inst).outcome {
            eprintln!("infeasible: {w}");
        }
        return Ok(ExitCode::from(EXIT_INFEASIBLE));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_feasibility(path: &Path) -> Result<ExitCode> {
    #[derive(serde::Serialize)]
    struct Doc {
        feasible: bool,
        max_flow: String,
        total_demand: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<capvc::flow::CutWitness>,
    }
    let inst = load_instance(path)?;
    let check = check_feasibility(&inst);
    let witness = match check.outcome {
        Feasibility::Feasible(_) => None,
        Feasibility::Infeasible(w) => Some(w),
    };
    let doc = Doc {
        feasible: witness.is_none(),
        max_flow: rational::render(&check.max_flow),
        total_demand: rational::render(&check.total_demand),
        witness,
    };
    let mut out = serde_json::to_string_pretty(&doc)?;
    out.push('\n');
    print!("{out}");
    if let Some(w) = &doc.witness {
        eprintln!("infeasible: {w}");
        return Ok(ExitCode::from(EXIT_INFEASIBLE));
    }
    Ok(ExitCode::SUCCESS)
}
