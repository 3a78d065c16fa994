use std::path::Path;

use hmga::oracle::{self, DEFAULT_ANGLES_2D, DEFAULT_DIRECTIONS_ND};
use hmga::{
    run_problem, BenchmarkProblem, HmgaError, OracleResult, ProblemSpec, Repairer, RunConfig,
    RunReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, CliError, CliResult, OracleChoice, OracleConfig, SeedRange};
use crate::output::{ensure_dir, write_atomic};
use crate::{ConfigKind, Format};

pub fn with_workers<T>(
    workers: Option<usize>,
    f: impl FnOnce() -> CliResult<T> + Send,
) -> CliResult<T>
where
    T: Send,
{
    match workers {
        None => f(),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            pool.install(f)
        }
    }
}

fn prepare(cfg: &RunConfig) -> CliResult<BenchmarkProblem> {
    let problem = cfg.problem.build()?;
    cfg.validate(problem.dimension())?;
    Ok(problem)
}

pub fn run(path: &Path, out: &Path, seed: Option<u64>, format: Option<Format>) -> CliResult<()> {
    let mut cfg = config::load_run(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let problem = prepare(&cfg)?;
    log::info!("solving {} with seed {}", problem.name(), cfg.seed);
    let report = run_problem(&problem, &cfg)?;
    ensure_dir(out)?;
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    write_atomic(&out.join("history.csv"), report.history_csv().as_bytes())?;
    write_atomic(&out.join("regions.json"), report.regions_json().as_bytes())?;
    match format {
        Some(Format::Json) => println!("{}", report.to_json()),
        Some(Format::Csv) => print!("{}", report.history_csv()),
        None => println!(
            "{}: beta_hl = {:.6}, p_f = {:.6e}, {} generations, {} evaluations",
            report.problem, report.beta_hl, report.p_f, report.generations, report.evaluations
        ),
    }
    Ok(())
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub seed: u64,
    pub status: String,
    pub beta_hl: Option<f64>,
    pub oracle_beta: Option<f64>,
    pub rel_error: Option<f64>,
    pub evaluations: Option<usize>,
    pub generations: Option<usize>,
    pub t1: Option<usize>,
    pub diversity_end: Option<usize>,
    pub t_final: Option<usize>,
}

fn label(spec: &ProblemSpec, problem: &BenchmarkProblem) -> String {
    match spec {
        ProblemSpec::Named(name) => name.clone(),
        ProblemSpec::Custom(_) => problem.name().to_string(),
    }
}

/// Reference value for the `oracle_beta` column: closed form when known,
/// brute force up to `N = 4`, otherwise HL-RF from the origin.
fn reference_beta(problem: &BenchmarkProblem) -> Option<f64> {
    if let Some(b) = problem.known_beta() {
        return Some(b);
    }
    let n = problem.dimension();
    if n <= 4 {
        let res = if n == 2 {
            DEFAULT_ANGLES_2D
        } else {
            DEFAULT_DIRECTIONS_ND
        };
        return oracle::brute_force_mpp(problem, res, oracle::DEFAULT_BETA_CAP)
            .ok()
            .map(|r| r.beta);
    }
    oracle::hlrf(problem, &vec![0.0; n], 100, 1e-10, oracle::DEFAULT_BETA_CAP)
        .ok()
        .flatten()
        .map(|r| r.beta)
}

fn cell(
    name: &str,
    problem: &BenchmarkProblem,
    cfg: &RunConfig,
    reference: Option<f64>,
) -> BenchRow {
    let mut row = BenchRow {
        benchmark: name.to_string(),
        seed: cfg.seed,
        status: "ok".into(),
        beta_hl: None,
        oracle_beta: reference,
        rel_error: None,
        evaluations: None,
        generations: None,
        t1: None,
        diversity_end: None,
        t_final: None,
    };
    match run_problem(problem, cfg) {
        Ok(r) => fill(&mut row, &r),
        Err(e) => {
            log::warn!("{name} seed {}: {e}", cfg.seed);
            row.status = e.to_string();
        }
    }
    row
}

fn fill(row: &mut BenchRow, r: &RunReport) {
    row.beta_hl = Some(r.beta_hl);
    row.rel_error = row.oracle_beta.map(|b| (r.beta_hl - b).abs() / b);
    row.evaluations = Some(r.evaluations);
    row.generations = Some(r.generations);
    row.t1 = r.stage_boundaries.t1;
    row.diversity_end = r.stage_boundaries.diversity_end;
    row.t_final = Some(r.stage_boundaries.t_final);
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn summary_table(rows: &[BenchRow]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.benchmark.as_str()) {
            names.push(&r.benchmark);
        }
    }
    let mut out = format!(
        "{:<20} {:>5} {:>6} {:>12} {:>12} {:>12}\n",
        "benchmark", "runs", "failed", "median_err", "p95_err", "median_evals"
    );
    for name in names {
        let cells: Vec<&BenchRow> = rows.iter().filter(|r| r.benchmark == name).collect();
        let failed = cells.iter().filter(|r| r.status != "ok").count();
        let mut errs: Vec<f64> = cells.iter().filter_map(|r| r.rel_error).collect();
        errs.sort_by(f64::total_cmp);
        let mut evals: Vec<f64> = cells
            .iter()
            .filter_map(|r| r.evaluations.map(|e| e as f64))
            .collect();
        evals.sort_by(f64::total_cmp);
        let fmt_err = |q| {
            if errs.is_empty() {
                "-".to_string()
            } else {
                format!("{:.4}%", 100.0 * percentile(&errs, q))
            }
        };
        let med_evals = if evals.is_empty() {
            "-".to_string()
        } else {
            format!("{:.0}", percentile(&evals, 0.5))
        };
        out.push_str(&format!(
            "{:<20} {:>5} {:>6} {:>12} {:>12} {:>12}\n",
            name,
            cells.len(),
            failed,
            fmt_err(0.5),
            fmt_err(0.95),
            med_evals
        ));
    }
    out
}

fn summary_csv(rows: &[BenchRow]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Usage(format!("summary.csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("summary.csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn bench(
    path: &Path,
    out: &Path,
    seeds: Option<SeedRange>,
    format: Option<Format>,
) -> CliResult<()> {
    let cfg = config::load_bench(path)?;
    let seeds = seeds.or(cfg.seeds).ok_or_else(|| {
        CliError::Usage("no seed range: pass --seeds A..B or set \"seeds\"".into())
    })?;
    let mut problems = Vec::with_capacity(cfg.benchmarks.len());
    for spec in &cfg.benchmarks {
        let mut run_cfg = cfg.run.clone();
        run_cfg.problem = spec.clone();
        let problem = prepare(&run_cfg)?;
        problems.push((label(spec, &problem), problem, run_cfg));
    }
    let references: Vec<Option<f64>> = problems
        .par_iter()
        .map(|(_, p, _)| reference_beta(p))
        .collect();
    let cells: Vec<(usize, u64)> = (0..problems.len())
        .flat_map(|i| seeds.seeds().map(move |s| (i, s)))
        .collect();
    let rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(i, seed)| {
            let (name, problem, base) = &problems[i];
            let cfg = RunConfig {
                seed,
                ..base.clone()
            };
            cell(name, problem, &cfg, references[i])
        })
        .collect();
    let csv_text = summary_csv(&rows)?;
    ensure_dir(out)?;
    write_atomic(&out.join("summary.csv"), csv_text.as_bytes())?;
    match format {
        Some(Format::Csv) => print!("{csv_text}"),
        Some(Format::Json) => println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        ),
        None => print!("{}", summary_table(&rows)),
    }
    Ok(())
}

/// `oracle.json`: the result together with what produced it.
#[derive(Debug, Serialize)]
struct OracleDocument<'a> {
    command: String,
    version: &'static str,
    config: &'a OracleConfig,
    result: &'a OracleResult,
}

fn command_line() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("hmga {}", args.join(" "))
}

fn solve_oracle(cfg: &OracleConfig, problem: &BenchmarkProblem) -> CliResult<OracleResult> {
    let n = problem.dimension();
    match cfg.method {
        OracleChoice::ClosedForm => oracle::closed_form(problem).ok_or_else(|| {
            CliError::Usage(format!(
                "{} has no closed-form reliability index",
                problem.name()
            ))
        }),
        OracleChoice::BruteForce => {
            let res = cfg.resolution.unwrap_or(if n == 2 {
                DEFAULT_ANGLES_2D
            } else {
                DEFAULT_DIRECTIONS_ND
            });
            Ok(oracle::brute_force_mpp(problem, res, cfg.beta_cap)?)
        }
        OracleChoice::Hlrf => {
            let y0 = cfg.y0.clone().unwrap_or_else(|| vec![0.0; n]);
            oracle::hlrf(problem, &y0, cfg.max_iter, cfg.tol, cfg.beta_cap)?
                .ok_or(CliError::Solver(HmgaError::NoFailureSurface))
        }
    }
}

pub fn oracle(path: &Path, out: Option<&Path>, format: Option<Format>) -> CliResult<()> {
    let cfg = config::load_oracle(path)?;
    let problem = cfg.problem.build()?;
    let result = solve_oracle(&cfg, &problem)?;
    let doc = OracleDocument {
        command: command_line(),
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        result: &result,
    };
    let text = serde_json::to_string_pretty(&doc).expect("oracle document serializes") + "\n";
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_atomic(&dir.join("oracle.json"), text.as_bytes())?;
    }
    match format {
        Some(Format::Csv) => {
            let dirs: Vec<String> = result.direction.iter().map(|d| d.to_string()).collect();
            println!("method,beta,evaluations,direction");
            println!(
                "{},{},{},{}",
                json_name(&result.method),
                result.beta,
                result.evaluations,
                dirs.join(" ")
            );
        }
        Some(Format::Json) | None => print!("{text}"),
    }
    Ok(())
}

pub fn repair_trace(path: &Path, out: &Path, format: Option<Format>) -> CliResult<()> {
    let cfg = config::load_repair_trace(path)?;
    let problem = cfg.problem.build()?;
    if cfg.direction.len() != problem.dimension() {
        return Err(HmgaError::Dimension {
            expected: problem.dimension(),
            got: cfg.direction.len(),
        }
        .into());
    }
    let g0 = problem.g0();
    let eta = cfg.eta.unwrap_or(1e-3 * g0.abs());
    let repairer = Repairer::with_g0(&problem, cfg.repair.with_eta(eta), cfg.beta_max, g0)?;
    let outcome = repairer.repair_ray(cfg.beta0, &cfg.direction)?;
    ensure_dir(out)?;
    let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes") + "\n";
    write_atomic(&out.join("trace.csv"), outcome.trace_csv().as_bytes())?;
    write_atomic(&out.join("repair.json"), json.as_bytes())?;
    match format {
        Some(Format::Json) => print!("{json}"),
        Some(Format::Csv) => print!("{}", outcome.trace_csv()),
        None => println!(
            "status={} mode={} iterations={} final_beta={} final_g={}",
            json_name(&outcome.status),
            json_name(&outcome.mode),
            outcome.iterations,
            outcome.final_beta,
            outcome.final_g
        ),
    }
    Ok(())
}

/// snake_case name of a unit enum as it appears in JSON.
fn json_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn validate_config(path: &Path, kind: ConfigKind) -> CliResult<()> {
    match kind {
        ConfigKind::Run => {
            let cfg = config::load_run(path)?;
            let problem = prepare(&cfg)?;
            let g0 = problem.g0();
            let penalty = cfg.penalty.resolve(g0, cfg.beta_max)?;
            if g0.is_nan() || g0 <= penalty.eta {
                return Err(HmgaError::DegenerateProblem {
                    g0,
                    eta: penalty.eta,
                }
                .into());
            }
        }
        ConfigKind::Bench => {
            let cfg = config::load_bench(path)?;
            for spec in &cfg.benchmarks {
                prepare(&RunConfig {
                    problem: spec.clone(),
                    ..cfg.run.clone()
                })?;
            }
        }
        ConfigKind::Oracle => {
            let cfg = config::load_oracle(path)?;
            let problem = cfg.problem.build()?;
            if cfg.method == OracleChoice::BruteForce && problem.dimension() > 4 {
                return Err(HmgaError::Config {
                    field: "method".into(),
                    reason: "brute force is limited to N <= 4".into(),
                }
                .into());
            }
        }
        ConfigKind::RepairTrace => {
            let cfg = config::load_repair_trace(path)?;
            let problem = cfg.problem.build()?;
            if cfg.direction.len() != problem.dimension() {
                return Err(HmgaError::Dimension {
                    expected: problem.dimension(),
                    got: cfg.direction.len(),
                }
                .into());
            }
            cfg.repair.with_eta(cfg.eta.unwrap_or(1e-3)).validate()?;
        }
    }
    println!("{}: ok", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_picks_nearest_rank() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.95), 5.0);
        assert_eq!(percentile(&v, 0.0), 1.0);
    }

    #[test]
    fn reference_prefers_closed_form() {
        let p = hmga::problem::benchmarks::by_name("linear-5d").unwrap();
        assert_eq!(reference_beta(&p), Some(3.0));
        let p = hmga::problem::benchmarks::by_name("parabolic").unwrap();
        let b = reference_beta(&p).unwrap();
        assert!(b > 3.0 && b <= 5.0 + 1e-9, "{b}");
    }
}
