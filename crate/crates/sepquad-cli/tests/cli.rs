//! End-to-end tests of the `sepquad` binary: exit codes, file formats, and
//! the generate -> solve -> check round trip.

use sepquad::io::{self, InstanceFile};
use sepquad::model::{validate, ProblemInstance};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sepquad"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let output = bin().args(args).output().expect("binary runs");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sepquad_cli_{name}"));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn worked_1d_instance() -> ProblemInstance {
    ProblemInstance {
        n: 1,
        m: 1,
        delta: vec![1.0],
        alpha: vec![-4.0],
        theta: vec![vec![1.0]],
        beta: vec![vec![0.0]],
        sigma: vec![-0.25],
        lower: vec![-1.0],
        upper: vec![1.0],
    }
}

fn write_instance(path: &Path, instance: &ProblemInstance) {
    io::write_instance(path, &InstanceFile::from_parts(instance, None)).unwrap();
}

#[test]
fn generate_output_validates_on_reload() {
    let dir = tmpdir("gen_roundtrip");
    let path = dir.join("inst.json");
    let (code, stdout, _) = run(&[
        "generate",
        "--n",
        "4",
        "--m",
        "2",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sha256 "));
    let (instance, witness) = io::read_instance(&path).unwrap().into_parts();
    assert!(validate(&instance).is_empty());
    assert_eq!(witness.expect("witness stored").len(), 4);
}

#[test]
fn generate_is_deterministic() {
    let dir = tmpdir("gen_determinism");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let (code_a, out_a, _) = run(&[
        "generate",
        "--n",
        "5",
        "--m",
        "2",
        "--seed",
        "11",
        "--out",
        a.to_str().unwrap(),
    ]);
    let (code_b, out_b, _) = run(&[
        "generate",
        "--n",
        "5",
        "--m",
        "2",
        "--seed",
        "11",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!((code_a, code_b), (0, 0));
    let digest = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("sha256"))
            .unwrap()
            .to_string()
    };
    assert_eq!(digest(&out_a), digest(&out_b));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn generate_rejects_zero_n() {
    let dir = tmpdir("gen_zero_n");
    let path = dir.join("x.json");
    let (code, _, stderr) = run(&[
        "generate",
        "--n",
        "0",
        "--m",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--n"));
}

#[test]
fn solve_worked_instance_hits_analytic_optimum() {
    let dir = tmpdir("solve_worked");
    let inst = dir.join("inst.json");
    write_instance(&inst, &worked_1d_instance());
    let report_path = dir.join("report.json");
    let (code, stdout, _) = run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("status converged"));
    let report = io::read_report(&report_path).unwrap();
    assert_eq!(report.status, "converged");
    assert!((report.lambda[0] - 3.0).abs() <= 1e-6);
    assert!((report.objective + 1.75).abs() <= 1e-9);
    assert!(report.max_residual <= 1e-6);
    assert!(report.trace.is_none());
}

#[test]
fn solve_defaults_report_path_next_to_input() {
    let dir = tmpdir("solve_default_out");
    let inst = dir.join("inst.json");
    write_instance(&inst, &worked_1d_instance());
    let (code, _, _) = run(&["solve", "--in", inst.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(dir.join("inst.report.json").exists());
}

#[test]
fn solve_inactive_constraints_report_zero_multipliers() {
    let dir = tmpdir("solve_inactive");
    let inst_path = dir.join("inst.json");
    let mut inst = worked_1d_instance();
    inst.sigma = vec![-10.0]; // g(y) <= 1 - 10 < 0 everywhere in the box
    write_instance(&inst_path, &inst);
    let report_path = dir.join("report.json");
    let (code, _, _) = run(&[
        "solve",
        "--in",
        inst_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = io::read_report(&report_path).unwrap();
    assert_eq!(report.lambda, vec![0.0]);
    assert!(report.iterations <= inst.m);
}

#[test]
fn solve_rejects_invalid_instance_naming_the_violation() {
    let dir = tmpdir("solve_invalid");
    let inst_path = dir.join("inst.json");
    let mut inst = worked_1d_instance();
    inst.delta = vec![0.0];
    write_instance(&inst_path, &inst);
    let (code, _, stderr) = run(&["solve", "--in", inst_path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("delta[0] not > 0"), "stderr: {stderr}");
}

#[test]
fn solve_reports_bracket_failure_with_exit_4() {
    let dir = tmpdir("solve_bracket");
    let inst_path = dir.join("inst.json");
    let mut inst = worked_1d_instance();
    inst.theta = vec![vec![1.0]];
    inst.beta = vec![vec![0.0]];
    inst.sigma = vec![1.0]; // g(y) = y^2 + 1 > 0 everywhere
    write_instance(&inst_path, &inst);
    let (code, _, stderr) = run(&["solve", "--in", inst_path.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(stderr.contains("constraint 0"));
}

#[test]
fn solve_exit_3_when_iteration_cap_binds() {
    let dir = tmpdir("solve_cap");
    let inst_path = dir.join("inst.json");
    let (code, _, _) = run(&[
        "generate",
        "--n",
        "30",
        "--m",
        "2",
        "--seed",
        "3",
        "--out",
        inst_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&[
        "solve",
        "--in",
        inst_path.to_str().unwrap(),
        "--max-iters",
        "1",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn solve_parse_error_names_the_field() {
    let dir = tmpdir("solve_parse");
    let inst_path = dir.join("bad.json");
    fs::write(
        &inst_path,
        r#"{"n":1,"m":0,"delta":[1.0],"alpha":["oops"],"theta":[],"beta":[],"sigma":[],"lower":[-1.0],"upper":[1.0]}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(&["solve", "--in", inst_path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("alpha[0]"), "stderr: {stderr}");
}

#[test]
fn check_accepts_converged_report() {
    let dir = tmpdir("check_ok");
    let inst = dir.join("inst.json");
    write_instance(&inst, &worked_1d_instance());
    let report = dir.join("report.json");
    run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let (code, stdout, _) = run(&[
        "check",
        "--in",
        inst.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("max residual"));
}

#[test]
fn check_flags_perturbed_multiplier() {
    // Instance with an inactive constraint: bumping its multiplier by 0.1
    // creates complementarity slack 0.1 * |g| far above tolerance.
    let dir = tmpdir("check_perturbed");
    let inst_path = dir.join("inst.json");
    let mut inst = worked_1d_instance();
    inst.sigma = vec![-10.0];
    write_instance(&inst_path, &inst);
    let report_path = dir.join("report.json");
    run(&[
        "solve",
        "--in",
        inst_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);

    let mut report = io::read_report(&report_path).unwrap();
    assert_eq!(report.lambda, vec![0.0]);
    report.lambda[0] += 0.1;
    io::write_report(&report_path, &report).unwrap();

    let (code, stdout, _) = run(&[
        "check",
        "--in",
        inst_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let comp_line = stdout
        .lines()
        .find(|l| l.starts_with("complementarity"))
        .unwrap();
    let comp: f64 = comp_line
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(comp > 1e-6, "complementarity {comp} not flagged");
}

#[test]
fn check_prints_small_instance_oracle_gap() {
    let dir = tmpdir("check_gap");
    let inst = dir.join("inst.json");
    run(&[
        "generate",
        "--n",
        "4",
        "--m",
        "2",
        "--seed",
        "19",
        "--out",
        inst.to_str().unwrap(),
    ]);
    let report = dir.join("report.json");
    run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let (code, stdout, _) = run(&[
        "check",
        "--in",
        inst.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let gap_line = stdout
        .lines()
        .find(|l| l.starts_with("oracle gap"))
        .unwrap();
    let gap: f64 = gap_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(gap <= 1e-5, "oracle gap {gap}");
}

#[test]
fn check_rejects_dimension_mismatch() {
    let dir = tmpdir("check_dims");
    let inst = dir.join("inst.json");
    write_instance(&inst, &worked_1d_instance());
    let report_path = dir.join("report.json");
    run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    let mut report = io::read_report(&report_path).unwrap();
    report.y.push(0.0);
    io::write_report(&report_path, &report).unwrap();
    let (code, _, stderr) = run(&[
        "check",
        "--in",
        inst.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("dimension mismatch"));
}

#[test]
fn trace_records_nondecreasing_dual_values() {
    let dir = tmpdir("solve_trace");
    let inst = dir.join("inst.json");
    run(&[
        "generate",
        "--n",
        "12",
        "--m",
        "3",
        "--seed",
        "23",
        "--out",
        inst.to_str().unwrap(),
    ]);
    let report_path = dir.join("report.json");
    let (code, _, _) = run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--trace",
    ]);
    assert_eq!(code, 0);
    let report = io::read_report(&report_path).unwrap();
    let trace = report.trace.expect("trace requested");
    assert_eq!(trace.len(), report.iterations);
    let values: Vec<f64> = trace
        .iter()
        .map(|r| r.dual_value.expect("tracked"))
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn or_stop_rule_stops_at_the_first_subproblem() {
    let dir = tmpdir("solve_or");
    let inst = dir.join("inst.json");
    run(&[
        "generate",
        "--n",
        "12",
        "--m",
        "3",
        "--seed",
        "29",
        "--out",
        inst.to_str().unwrap(),
    ]);
    let report_path = dir.join("report.json");
    let (code, _, _) = run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--stop-rule",
        "or",
    ]);
    assert_eq!(code, 0);
    let report = io::read_report(&report_path).unwrap();
    assert_eq!(report.iterations, 1);
}

#[test]
fn bench_toy_sweep_reports_small_gaps() {
    let dir = tmpdir("bench_toy");
    let out = dir.join("bench.csv");
    let (code, _, _) = run(&[
        "bench",
        "--spec",
        "4,1,5",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,m,solved,time_mean_s,iter_mean,gap_mean")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["4", "1", "5"]);
    let gap_mean: f64 = row[5].parse().unwrap();
    assert!(gap_mean <= 1e-5, "gap_mean {gap_mean}");
    assert!(dir.join("bench_detail.csv").exists());
}

#[test]
fn bench_without_specs_writes_header_only() {
    let dir = tmpdir("bench_empty");
    let out = dir.join("bench.csv");
    let (code, _, _) = run(&["bench", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "n,m,solved,time_mean_s,iter_mean,gap_mean\n"
    );
}

#[test]
fn bench_honors_thread_cap() {
    let dir = tmpdir("bench_threads");
    let out = dir.join("bench.csv");
    let output = bin()
        .args([
            "bench",
            "--spec",
            "4,1,2",
            "--seed",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("SQPQC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    let output = bin()
        .args([
            "bench",
            "--spec",
            "4,1,2",
            "--seed",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("SQPQC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn hundred_seed_round_trip_smoke() {
    let dir = tmpdir("round_trip");
    for seed in 0..100u64 {
        let inst = dir.join(format!("inst_{seed}.json"));
        let report = dir.join(format!("report_{seed}.json"));
        let seed_str = seed.to_string();
        let (code, _, _) = run(&[
            "generate",
            "--n",
            "50",
            "--m",
            "2",
            "--seed",
            &seed_str,
            "--out",
            inst.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "generate failed at seed {seed}");
        let (code, _, _) = run(&[
            "solve",
            "--in",
            inst.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "solve failed at seed {seed}");
        let (code, _, _) = run(&[
            "check",
            "--in",
            inst.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "check failed at seed {seed}");
    }
}
