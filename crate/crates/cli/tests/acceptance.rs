//! Acceptance suite: one PASS/FAIL line per criterion, exact arithmetic throughout.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use capvc::flow::{check_feasibility, extract_integral_assignment};
use capvc::instance::{
    generate_instance, initial_tuple, parse_instance, render_instance, EdgeId, GeneratorParams, Instance, Vertex,
    VertexId,
};
use capvc::lp::{build_lp, solve_basic_optimal, verify_extremality};
use capvc::oracle::{brute_force_optimal, OracleOutcome};
use capvc::rational::{self, int, Rational};
use capvc::rounding::{check_trace, run, Trace};
use capvc::solution::Solution;
use capvc::verify::{
    active_subedge, check_rounding_decomposition, compute_separation_certificate, large_set, verify_solution,
    SeparationError,
};

const SUITE_SIZE: usize = 200;

type Outcome = Result<String, String>;

struct Case {
    seed: u64,
    inst: Instance,
    sol: Solution,
    trace: Trace,
}

fn params(seed: u64) -> GeneratorParams {
    GeneratorParams {
        vertices: 3 + (seed % 6) as usize,
        edges: 1 + (seed % 10) as usize,
        max_edge_size: 2 + (seed % 3) as usize,
        max_demand: 5,
        max_capacity: 5,
        max_multiplicity: 3,
    }
}

/// Feasibility repair may raise a multiplicity past the drawn maximum.
fn within_bounds(inst: &Instance) -> bool {
    (2..=4).contains(&inst.f())
        && inst.num_vertices() <= 8
        && inst.num_edges() <= 10
        && inst.has_integral_data()
        && inst.vertices().iter().all(|v| v.capacity <= int(5) && v.multiplicity <= 3)
}

/// The first `SUITE_SIZE` seeds whose instance is within the suite bounds.
fn suite() -> Result<Vec<Case>, String> {
    let mut cases = Vec::new();
    let mut seed = 0u64;
    while cases.len() < SUITE_SIZE {
        let inst = generate_instance(seed, &params(seed));
        if within_bounds(&inst) {
            let (sol, trace) = run(&inst).map_err(|e| format!("seed {seed}: run failed: {e}"))?;
            cases.push(Case { seed, inst, sol, trace });
        }
        seed += 1;
    }
    Ok(cases)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: u64) -> Rational {
    int(n as i64)
}

fn ratio_guarantee(cases: &[Case]) -> Outcome {
    let mut tight_opt = 0;
    for c in cases {
        let f = c.inst.f() as u64;
        let report = verify_solution(&c.inst, &c.sol);
        check(report.pass, || format!("seed {}: verifier rejects {:?}", c.seed, report.violations))?;
        let opt = brute_force_optimal(&c.inst, None)
            .map_err(|e| format!("seed {}: {e}", c.seed))?
            .opt()
            .ok_or_else(|| format!("seed {}: oracle finds no cover", c.seed))?;
        let alg = c.sol.objective;
        check(alg <= f * opt, || format!("seed {}: {alg} > {f} * OPT {opt}", c.seed))?;
        check(q(alg) <= q(f) * &c.sol.lp_root_objective, || {
            format!("seed {}: {alg} > {f} * LP {}", c.seed, c.sol.lp_root_objective)
        })?;
        check(q(opt) >= c.sol.lp_root_objective.clone(), || format!("seed {}: OPT below LP root", c.seed))?;
        tight_opt += usize::from(alg == opt);
    }
    Ok(format!("{} instances, {tight_opt} solved to optimality", cases.len()))
}

fn extremality(cases: &[Case]) -> Outcome {
    let mut points = 0;
    for c in cases {
        for rec in &c.trace.iterations {
            let model = build_lp(&c.inst, &rec.tuple);
            let report = verify_extremality(&rec.point, &model)
                .map_err(|e| format!("seed {} iteration {}: {e}", c.seed, rec.index))?;
            check(report.pass && report.rank == model.num_vars(), || {
                format!(
                    "seed {} iteration {}: rank {} of {}",
                    c.seed, rec.index, report.rank, report.variables
                )
            })?;
            points += 1;
        }
    }
    Ok(format!("{points} points at full rank"))
}

fn trace_invariants(cases: &[Case]) -> Outcome {
    let mut folds = 0;
    for c in cases {
        let audit = check_trace(&c.inst, &c.trace).map_err(|e| format!("seed {}: {e}", c.seed))?;
        folds += audit.folds;
        let inv_f = Rational::new(1.into(), c.inst.f().into());
        let its = &c.trace.iterations;
        check(its.len() <= c.inst.num_edges() + 1, || format!("seed {}: {} iterations", c.seed, its.len()))?;
        for step in its.windows(2) {
            let (now, next) = (&step[0], &step[1]);
            let tag = format!("seed {} iteration {}", c.seed, now.index);
            check(next.point.objective <= now.point.objective, || format!("{tag}: objective rose"))?;
            for v in c.inst.vertex_ids() {
                let (l0, l1, x0) = (now.tuple.lower_bound(v), next.tuple.lower_bound(v), now.point.x(v));
                check(l0 <= l1 && l1 <= x0, || format!("{tag}: sandwich fails at {v}"))?;
                check(*l1 == rational::zero() || (&inv_f <= l1 && *l1 <= rational::one()), || {
                    format!("{tag}: lower bound {l1} at {v}")
                })?;
            }
            for fold in &now.folded {
                let d = c.inst.demand(fold.edge);
                check(d <= now.tuple.residual_capacity(fold.vertex), || {
                    format!("{tag}: fold of {} exceeds c' of {}", fold.edge, fold.vertex)
                })?;
            }
            let model = build_lp(&c.inst, &next.tuple);
            let surviving = now
                .point
                .h
                .iter()
                .filter(|((e, _), _)| next.tuple.is_active(*e))
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            model
                .check_feasible(&model.assemble(&now.point.x, &surviving))
                .map_err(|v| format!("{tag}: previous point infeasible for next tuple: {v:?}"))?;
        }
    }
    Ok(format!("{} traces, {folds} folds", cases.len()))
}

const EXTRA_NONEMPTY: usize = 25;
const EXTRA_SEED_LIMIT: u64 = 20_000;

/// Further in-bounds runs whose final point has a nonempty small set.
fn nonempty_small_set_cases() -> Result<Vec<Case>, String> {
    let mut cases = Vec::new();
    for seed in 10_000..EXTRA_SEED_LIMIT {
        let inst = generate_instance(seed, &params(seed));
        if !within_bounds(&inst) {
            continue;
        }
        let (sol, trace) = run(&inst).map_err(|e| format!("seed {seed}: run failed: {e}"))?;
        if trace.final_record().is_some_and(|r| !r.small_set.is_empty()) {
            cases.push(Case { seed, inst, sol, trace });
            if cases.len() == EXTRA_NONEMPTY {
                break;
            }
        }
    }
    Ok(cases)
}

fn separation(cases: &[Case]) -> Outcome {
    let extra = nonempty_small_set_cases()?;
    check(extra.len() == EXTRA_NONEMPTY, || format!("only {} extra nonempty cases", extra.len()))?;
    let mut nontrivial = 0;
    let mut cells = 0;
    for c in cases.iter().chain(&extra) {
        let last = c.trace.final_record().ok_or_else(|| format!("seed {}: empty trace", c.seed))?;
        let small = &last.small_set;
        let large = large_set(&c.inst, &last.point.x);
        let one = rational::one();
        let m_of = |v: VertexId| q(c.inst.multiplicity(v));
        for &v in &large {
            let x = last.point.x(v);
            check(&one < x && *x < m_of(v), || format!("seed {}: {v} is not large", c.seed))?;
        }
        let cert = compute_separation_certificate(&c.inst, &last.tuple, &last.point, small, &large)
            .map_err(|e| format!("seed {}: {e}", c.seed))?;
        let i_set: BTreeSet<VertexId> = small.iter().copied().collect();
        let d_set: BTreeSet<VertexId> = large.iter().copied().collect();
        let gammas: Vec<(VertexId, BTreeSet<VertexId>)> = cert
            .gamma
            .iter()
            .map(|g| (g.vertex, g.subedge.iter().copied().collect()))
            .collect();
        check(gammas.len() == small.len(), || format!("seed {}: Γ not defined on all of I", c.seed))?;
        for g in &cert.gamma {
            let sub = active_subedge(&last.point, g.edge).map_err(|e| format!("seed {}: {e}", c.seed))?;
            check(sub == g.subedge, || format!("seed {}: Γ({}) is not an active subedge", c.seed, g.vertex))?;
        }
        for (v, gv) in &gammas {
            check(gv.contains(v), || format!("seed {}: Γ({v}) misses {v}", c.seed))?;
            check(gv.is_disjoint(&d_set), || format!("seed {}: Γ({v}) meets D", c.seed))?;
        }
        for (i, (u, gu)) in gammas.iter().enumerate() {
            for (v, gv) in &gammas[i + 1..] {
                check(gu.intersection(gv).all(|w| i_set.contains(w)), || {
                    format!("seed {}: Γ({u}) ∩ Γ({v}) leaves I", c.seed)
                })?;
            }
        }
        check_rounding_decomposition(&last.point.x, &cert, c.inst.f())
            .map_err(|e| format!("seed {}: {e}", c.seed))?;
        nontrivial += usize::from(!small.is_empty());
        cells += cert.cells.len();
    }
    Ok(format!(
        "{} certificates, {nontrivial} with nonempty I, {cells} cells",
        cases.len() + extra.len()
    ))
}

/// Supply-demand condition: every edge set's demand fits in the budget of the
/// vertices it can use, and every edge has a usable vertex.
fn hall_feasible(inst: &Instance) -> bool {
    let usable = |v: &VertexId| inst.multiplicity(*v) >= 1;
    if inst.edges().iter().any(|e| !e.vertices.iter().any(usable)) {
        return false;
    }
    let m = inst.num_edges();
    (1u64..(1 << m)).all(|mask| {
        let chosen: Vec<EdgeId> = (0..m).filter(|i| mask >> i & 1 == 1).map(EdgeId::from_index).collect();
        let demand: Rational = chosen.iter().map(|&e| inst.demand(e).clone()).sum();
        let reach: BTreeSet<VertexId> = chosen
            .iter()
            .flat_map(|&e| inst.edge(e).vertices.iter().copied())
            .filter(usable)
            .collect();
        let budget: Rational = reach.iter().map(|&v| inst.capacity(v) * q(inst.multiplicity(v))).sum();
        demand <= budget
    })
}

/// Copies with fewer multiplicities, so some of them are infeasible.
fn starved(inst: &Instance, seed: u64) -> Instance {
    let vertices = inst
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| Vertex {
            capacity: v.capacity.clone(),
            multiplicity: if (seed + i as u64).is_multiple_of(3) { 0 } else { v.multiplicity / 2 },
        })
        .collect();
    Instance::new(vertices, inst.edges().to_vec()).expect("same edges stay valid")
}

fn oracle_agreement(cases: &[Case]) -> Outcome {
    let (mut feasible, mut infeasible) = (0, 0);
    for c in cases {
        for inst in [c.inst.clone(), starved(&c.inst, c.seed)] {
            let flow = check_feasibility(&inst).outcome.is_feasible();
            let hall = hall_feasible(&inst);
            check(flow == hall, || format!("seed {}: flow says {flow}, exhaustive says {hall}", c.seed))?;
            let result = brute_force_optimal(&inst, None).map_err(|e| format!("seed {}: {e}", c.seed))?;
            match &result.outcome {
                OracleOutcome::Optimal { .. } => {
                    check(hall, || format!("seed {}: oracle covers an infeasible instance", c.seed))?;
                    let sol = result.as_solution().expect("optimal result has a witness");
                    let report = verify_solution(&inst, &sol);
                    check(report.violations.is_empty(), || {
                        format!("seed {}: oracle witness rejected {:?}", c.seed, report.violations)
                    })?;
                    feasible += 1;
                }
                OracleOutcome::Infeasible => {
                    check(!hall, || format!("seed {}: oracle misses a feasible instance", c.seed))?;
                    infeasible += 1;
                }
                OracleOutcome::BudgetExhausted { .. } => return Err(format!("seed {}: no cap was set", c.seed)),
            }
        }
    }
    Ok(format!("{feasible} feasible and {infeasible} infeasible instances agree"))
}

fn integral_extraction(cases: &[Case]) -> Outcome {
    let mut checked = 0;
    for c in cases.iter().filter(|c| c.inst.has_integral_data()) {
        let h = extract_integral_assignment(&c.inst, &c.sol.x).map_err(|e| format!("seed {}: {e}", c.seed))?;
        for (&(e, v), value) in &h {
            check((c.inst.demand(e) * value).is_integer(), || {
                format!("seed {}: d h at ({e}, {v}) is {}", c.seed, c.inst.demand(e) * value)
            })?;
        }
        let sol = Solution { h, ..c.sol.clone() };
        let report = verify_solution(&c.inst, &sol);
        check(report.pass, || format!("seed {}: extracted assignment rejected {:?}", c.seed, report.violations))?;
        checked += 1;
    }
    Ok(format!("{checked} integral-data instances"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> Result<Instance, String> {
    let text = fs::read_to_string(data(name)).map_err(|e| format!("{name}: {e}"))?;
    parse_instance(&text).map_err(|e| format!("{name}: {e}"))
}

fn regressions() -> Outcome {
    let pair = load("pair.vchc")?;
    let (sol, _) = run(&pair).map_err(|e| format!("pair: {e}"))?;
    check(sol.objective == 1 && sol.ratio == rational::one(), || {
        format!("pair: objective {} ratio {}", sol.objective, sol.ratio)
    })?;

    let triangle = load("triangle.vchc")?;
    let (sol, _) = run(&triangle).map_err(|e| format!("triangle: {e}"))?;
    let opt = brute_force_optimal(&triangle, None).map_err(|e| format!("triangle: {e}"))?.opt();
    check(sol.objective == 3 && opt == Some(3), || format!("triangle: objective {} OPT {opt:?}", sol.objective))?;

    let one = load("one_edge.vchc")?;
    let (sol, _) = run(&one).map_err(|e| format!("one edge: {e}"))?;
    check(sol.x == vec![1], || format!("one edge: x* = {:?}", sol.x))?;

    let psi = initial_tuple(&pair);
    let model = build_lp(&pair, &psi);
    let p = solve_basic_optimal(&model).map_err(|e| format!("pair root: {e}"))?;
    let mut other = p.clone();
    other.x = p.x.iter().rev().cloned().collect();
    other.h = p.h.iter().map(|(&(e, v), _)| ((e, v), p.h(e, VertexId(3 - v.0)))).collect();
    let mid = p.midpoint(&other, &model);
    let report = verify_extremality(&mid, &model).map_err(|e| format!("averaged point: {e}"))?;
    check(!report.pass, || "averaged point passes the rank test".into())?;
    let small = [VertexId(1), VertexId(2)];
    match compute_separation_certificate(&pair, &psi, &mid, &small, &[]) {
        Err(SeparationError::RankDeficiency { rank: 1, columns: 2 }) => {}
        other => return Err(format!("averaged point: expected rank deficiency, got {other:?}")),
    }
    Ok("pair 1/1, triangle 3 = OPT, one edge x* = 1, averaged point rank 1 of 2".into())
}

fn solve_files(dir: &Path, inst: &Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let json = dir.join(format!("{tag}.json"));
    let trace = dir.join(format!("{tag}.trace.json"));
    let status = Command::new(env!("CARGO_BIN_EXE_capvc"))
        .arg("solve")
        .arg(inst)
        .arg("--json")
        .arg(&json)
        .arg("--trace")
        .arg(&trace)
        .status()
        .map_err(|e| e.to_string())?;
    check(status.success(), || format!("{}: exit {status}", inst.display()))?;
    let read = |p: &Path| fs::read(p).map_err(|e| e.to_string());
    Ok((read(&json)?, read(&trace)?))
}

fn determinism(cases: &[Case]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files: Vec<PathBuf> = ["pair.vchc", "triangle.vchc", "one_edge.vchc"].iter().map(|n| data(n)).collect();
    for c in cases.iter().filter(|c| c.trace.iterations.len() >= 2).take(10) {
        let p = dir.path().join(format!("seed{}.vchc", c.seed));
        fs::write(&p, render_instance(&c.inst)).map_err(|e| e.to_string())?;
        files.push(p);
    }
    for (k, inst) in files.iter().enumerate() {
        let first = solve_files(dir.path(), inst, &format!("a{k}"))?;
        let second = solve_files(dir.path(), inst, &format!("b{k}"))?;
        check(first == second, || format!("{}: outputs differ", inst.display()))?;
    }
    Ok(format!("{} instances solved twice, byte-identical", files.len()))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cases = match suite() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL suite generation: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: [(&str, Box<dyn Fn() -> Outcome + '_>); 8] = [
        ("1 ratio guarantee", Box::new(|| ratio_guarantee(&cases))),
        ("2 extremality", Box::new(|| extremality(&cases))),
        ("3 trace invariants", Box::new(|| trace_invariants(&cases))),
        ("4 separation and decomposition", Box::new(|| separation(&cases))),
        ("5 oracle agreement", Box::new(|| oracle_agreement(&cases))),
        ("6 integral extraction", Box::new(|| integral_extraction(&cases))),
        ("7 regressions", Box::new(regressions)),
        ("8 determinism", Box::new(|| determinism(&cases))),
    ];
    let mut failed = 0;
    for (name, criterion) in &criteria {
        match criterion() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
