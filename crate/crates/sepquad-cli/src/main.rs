//! Command-line surface for the sepquad solver: generate instances, solve
//! them, verify reports, and run benchmark sweeps.
//!
//! Exit codes partition the outcomes so scripts can branch without parsing
//! output: 0 success (and `check` within tolerance), 1 `check` residual
//! above tolerance, 2 usage/file/validation errors, 3 iteration cap
//! reached, 4 bracket failure (no feasible multiplier).

use clap::{Parser, Subcommand, ValueEnum};
use sepquad::generator::{generate, GeneratorSpec};
use sepquad::io::{self, FileError, InstanceFile, ReportFile, TraceRow};
use sepquad::model::{eval_objective, validate, DualVector, ProblemInstance, SolveStatus};
use sepquad::multi::{kkt_residuals, solve, SolverConfig, StopRule};
use sepquad::oracle::oracle_dual_grid;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "sepquad",
    version,
    about = "Separable convex quadratic program solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random feasible instance and write it as JSON.
    Generate {
        /// Number of variables (>= 1).
        #[arg(long)]
        n: usize,
        /// Number of quadratic constraints (>= 1).
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the instance file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file and write a JSON report.
    Solve {
        /// Instance file to solve.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long = "max-iters", default_value_t = 1000)]
        max_iters: usize,
        /// Report path (default: the input path with extension `report.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-iteration multipliers and dual values in the report.
        #[arg(long)]
        trace: bool,
        /// Per-constraint stop test: `and` requires feasibility and
        /// complementarity, `or` is the looser alternative that also accepts
        /// small complementarity slack alone.
        #[arg(long = "stop-rule", value_enum, default_value_t = StopRuleArg::And)]
        stop_rule: StopRuleArg,
    },
    /// Recompute the optimality residuals of a report against its instance.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Solve seeded sweeps of generated instances and write CSV summaries.
    Bench {
        /// Sweep entry `N,M,COUNT`; repeat the flag for more rows.
        #[arg(long = "spec", value_name = "N,M,COUNT")]
        specs: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long = "max-iters", default_value_t = 1000)]
        max_iters: usize,
        /// Summary CSV path; the per-instance detail CSV lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StopRuleArg {
    And,
    Or,
}

impl From<StopRuleArg> for StopRule {
    fn from(arg: StopRuleArg) -> StopRule {
        match arg {
            StopRuleArg::And => StopRule::And,
            StopRuleArg::Or => StopRule::Or,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<FileError> for CliError {
    fn from(err: FileError) -> Self {
        CliError {
            code: 2,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Generate { n, m, seed, out } => cmd_generate(n, m, seed, &out),
        Command::Solve {
            input,
            eps,
            max_iters,
            out,
            trace,
            stop_rule,
        } => cmd_solve(
            &input,
            eps,
            max_iters,
            out.as_deref(),
            trace,
            stop_rule.into(),
        ),
        Command::Check { input, report, eps } => cmd_check(&input, &report, eps),
        Command::Bench {
            specs,
            seed,
            eps,
            max_iters,
            out,
        } => cmd_bench(&specs, seed, eps, max_iters, &out),
    }
}

fn cmd_generate(n: usize, m: usize, seed: u64, out: &Path) -> Result<u8, CliError> {
    if n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    if m == 0 {
        return Err(CliError::usage("--m must be at least 1"));
    }
    let gen = generate(&GeneratorSpec { n, m, seed });
    let file = InstanceFile::from_parts(&gen.instance, Some(&gen.witness));
    let text = io::to_json_string(&file);
    fs::write(out, &text)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    println!("{}", out.display());
    println!("sha256 {hex}");
    Ok(0)
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    let (instance, _witness) = io::read_instance(path)?.into_parts();
    Ok(instance)
}

fn cmd_solve(
    input: &Path,
    eps: f64,
    max_iters: usize,
    out: Option<&Path>,
    trace: bool,
    stop_rule: StopRule,
) -> Result<u8, CliError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(CliError::usage("--eps must be positive"));
    }
    if max_iters == 0 {
        return Err(CliError::usage("--max-iters must be at least 1"));
    }
    let instance = load_instance(input)?;
    let violations = validate(&instance);
    if !violations.is_empty() {
        return Err(CliError::usage(format!(
            "invalid instance {}:\n{violations}",
            input.display()
        )));
    }

    let config = SolverConfig {
        eps,
        max_iters,
        track_dual_values: trace,
        stop_rule,
        ..SolverConfig::default()
    };
    let t0 = Instant::now();
    let report = solve(&instance, &config);
    let wall_time_s = t0.elapsed().as_secs_f64();

    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.with_extension("report.json"));
    let file = ReportFile {
        status: report.status.name().to_string(),
        objective: report.objective,
        lambda: report.lambda.to_vec(),
        y: report.y.clone(),
        iterations: report.iterations,
        max_residual: report.certificate.max_residual,
        wall_time_s,
        trace: report
            .trace
            .as_ref()
            .map(|rows| rows.iter().map(TraceRow::from).collect()),
    };
    io::write_report(&out_path, &file)?;

    println!(
        "status {} | objective {:.10e} | iterations {} | max_residual {:.3e} | wall {wall_time_s:.4}s",
        file.status, file.objective, file.iterations, file.max_residual
    );
    println!("report written to {}", out_path.display());
    match report.status {
        SolveStatus::Converged => Ok(0),
        SolveStatus::IterationCapReached => {
            eprintln!("iteration cap {max_iters} reached before the stop test held");
            Ok(3)
        }
        SolveStatus::BracketFailure { constraint } => {
            eprintln!("constraint {constraint} stays active for every multiplier up to 1e12");
            Ok(4)
        }
        SolveStatus::InvalidInstance => Err(CliError::usage("instance rejected by validation")),
    }
}

fn cmd_check(input: &Path, report_path: &Path, eps: f64) -> Result<u8, CliError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(CliError::usage("--eps must be positive"));
    }
    let instance = load_instance(input)?;
    let report = io::read_report(report_path)?;
    if report.y.len() != instance.n {
        return Err(CliError::usage(format!(
            "dimension mismatch: report has {} primal entries, instance has n = {}",
            report.y.len(),
            instance.n
        )));
    }
    if report.lambda.len() != instance.m {
        return Err(CliError::usage(format!(
            "dimension mismatch: report has {} multipliers, instance has m = {}",
            report.lambda.len(),
            instance.m
        )));
    }

    let lambda = DualVector::new(report.lambda.clone());
    let cert = kkt_residuals(&instance, &lambda, &report.y, eps);
    let stat_max = cert
        .stationarity_residual
        .iter()
        .fold(0.0_f64, |a, r| a.max(r.abs()));
    let feas_max = cert
        .feasibility
        .iter()
        .fold(0.0_f64, |a, g| a.max(g.max(0.0)));
    let comp_max = cert.comp_slack.iter().fold(0.0_f64, |a, s| a.max(s.abs()));
    let dual_neg = lambda
        .iter()
        .fold(0.0_f64, |a, &l| if -l > a { -l } else { a });
    println!("stationarity     {stat_max:.3e}");
    println!("feasibility      {feas_max:.3e}");
    println!("complementarity  {comp_max:.3e}");
    println!("box violation    {:.3e}", cert.box_violation);
    println!("dual negativity  {dual_neg:.3e}");
    println!(
        "max residual     {:.3e}  (tolerance {eps:.1e})",
        cert.max_residual
    );

    if instance.m <= 3 && instance.n <= 1000 {
        match oracle_dual_grid(&instance, 10.0, 4) {
            Ok(oracle) => {
                let objective = eval_objective(&instance, &report.y);
                let gap = (objective - oracle.value).abs() / oracle.value.abs().max(1.0);
                println!(
                    "oracle gap       {gap:.3e}  (dual-grid value {:.10e})",
                    oracle.value
                );
            }
            Err(err) => println!("oracle gap       unavailable ({err})"),
        }
    } else {
        println!("oracle gap       skipped (instance too large for the grid oracle)");
    }

    Ok(if cert.max_residual <= eps { 0 } else { 1 })
}

struct BenchJob {
    n: usize,
    m: usize,
    seed: u64,
}

struct BenchOutcome {
    job: BenchJob,
    status: &'static str,
    converged: bool,
    time_s: f64,
    iterations: usize,
    objective: f64,
    max_residual: f64,
    gap: Option<f64>,
}

fn cmd_bench(
    specs: &[String],
    seed: u64,
    eps: f64,
    max_iters: usize,
    out: &Path,
) -> Result<u8, CliError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(CliError::usage("--eps must be positive"));
    }
    if max_iters == 0 {
        return Err(CliError::usage("--max-iters must be at least 1"));
    }
    let mut sweep = Vec::new();
    for spec in specs {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("--spec `{spec}` is not N,M,COUNT")));
        }
        let parse = |s: &str, what: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("--spec `{spec}`: bad {what} `{s}`")))
        };
        let (n, m, count) = (
            parse(parts[0], "N")?,
            parse(parts[1], "M")?,
            parse(parts[2], "COUNT")?,
        );
        if n == 0 || m == 0 || count == 0 {
            return Err(CliError::usage(format!(
                "--spec `{spec}`: N, M, COUNT must all be >= 1"
            )));
        }
        sweep.push((n, m, count));
    }

    let jobs: Vec<BenchJob> = sweep
        .iter()
        .flat_map(|&(n, m, count)| {
            (0..count as u64).map(move |j| BenchJob {
                n,
                m,
                seed: seed.wrapping_add(j),
            })
        })
        .collect();

    let config = SolverConfig {
        eps,
        max_iters,
        ..SolverConfig::default()
    };
    let run_job = |job: BenchJob| -> BenchOutcome {
        let gen = generate(&GeneratorSpec {
            n: job.n,
            m: job.m,
            seed: job.seed,
        });
        let t0 = Instant::now();
        let report = solve(&gen.instance, &config);
        let time_s = t0.elapsed().as_secs_f64();
        let converged = report.status == SolveStatus::Converged;
        let gap = if converged && job.m <= 2 && job.n <= 1000 {
            oracle_dual_grid(&gen.instance, 10.0, 4)
                .ok()
                .map(|oracle| (report.objective - oracle.value).abs() / oracle.value.abs().max(1.0))
        } else {
            None
        };
        BenchOutcome {
            status: report.status.name(),
            converged,
            time_s,
            iterations: report.iterations,
            objective: report.objective,
            max_residual: report.certificate.max_residual,
            gap,
            job,
        }
    };

    let outcomes: Vec<BenchOutcome> = match bench_pool()? {
        Some(pool) => pool.install(|| {
            use rayon::prelude::*;
            jobs.into_par_iter().map(run_job).collect()
        }),
        None => {
            use rayon::prelude::*;
            jobs.into_par_iter().map(run_job).collect()
        }
    };

    // Summary CSV: one row per (n, m) in sweep order.
    let mut summary = String::from("n,m,solved,time_mean_s,iter_mean,gap_mean\n");
    for &(n, m, count) in &sweep {
        let group: Vec<&BenchOutcome> = outcomes
            .iter()
            .filter(|o| o.job.n == n && o.job.m == m)
            .collect();
        debug_assert_eq!(group.len(), count);
        let solved: Vec<&&BenchOutcome> = group.iter().filter(|o| o.converged).collect();
        let time_mean = mean(solved.iter().map(|o| o.time_s));
        let iter_mean = mean(solved.iter().map(|o| o.iterations as f64));
        let gaps: Vec<f64> = solved.iter().filter_map(|o| o.gap).collect();
        let gap_mean = if gaps.is_empty() {
            String::new()
        } else {
            format!("{:.3e}", gaps.iter().sum::<f64>() / gaps.len() as f64)
        };
        summary.push_str(&format!(
            "{n},{m},{},{time_mean:.6},{iter_mean:.2},{gap_mean}\n",
            solved.len()
        ));
    }
    fs::write(out, &summary)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;

    // Per-instance detail CSV next to the summary.
    let detail_path = detail_path(out);
    let mut detail = String::from("n,m,seed,status,time_s,iterations,objective,max_residual,gap\n");
    for o in &outcomes {
        let gap = o.gap.map(|g| format!("{g:.3e}")).unwrap_or_default();
        detail.push_str(&format!(
            "{},{},{},{},{:.6},{},{:.10e},{:.3e},{gap}\n",
            o.job.n,
            o.job.m,
            o.job.seed,
            o.status,
            o.time_s,
            o.iterations,
            o.objective,
            o.max_residual
        ));
    }
    fs::write(&detail_path, &detail)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", detail_path.display())))?;

    print!("{summary}");
    println!("summary written to {}", out.display());
    println!("detail written to {}", detail_path.display());
    Ok(0)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        0.0
    } else {
        collected.iter().sum::<f64>() / collected.len() as f64
    }
}

/// Optional thread pool honoring the SQPQC_THREADS cap.
fn bench_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    match std::env::var("SQPQC_THREADS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let threads: usize = raw.parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
                CliError::usage(format!("SQPQC_THREADS=`{raw}` is not a positive integer"))
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map(Some)
                .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))
        }
    }
}

fn detail_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_detail.{ext}"))
}
