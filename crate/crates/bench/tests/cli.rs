use std::path::Path;
use std::process::{Command, Output};

use ppa_bench::cli::{Cli, Command as Sub};
use ppa_bench::commands::{cmd_compare, reference_objective, trace_file_name};
use ppa_bench::output::{RunReport, SWEEP_HEADER, TRACE_HEADER};
use ppa_core::lasso::{load_instance, LassoInstance};
use ppa_core::registry::{AlgorithmConfig, LassoStrategy, StrategyRegistry, StrategySettings};
use ppa_core::solver::{SolveError, SolveReport, StoppingCriteria, TraceSink};
use ppa_core::ParameterSet;

const BIN: &str = env!("CARGO_BIN_EXE_ppa-bench");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parsed trace rows: `(k, phi, ire, drn, elapsed)`.
fn parse_trace(text: &str) -> Vec<(usize, f64, f64, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5, "{l}");
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}

const SMALL: [&str; 6] = ["--l", "40", "--n", "120", "--seed", "5"];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    let mut v = head.to_vec();
    v.extend_from_slice(&SMALL);
    v
}

#[test]
fn gen_writes_a_versioned_instance_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let out = run_ok(&["gen", "--l", "200", "--n", "800", "--seed", "7", "--out", path_str(&a)]);
    assert!(out.starts_with("nu="), "{out}");
    assert!(out.contains("nu_max="));
    run_ok(&["gen", "--l", "200", "--n", "800", "--seed", "7", "--out", path_str(&b)]);
    let text = std::fs::read(&a).unwrap();
    assert!(text.starts_with(b"LASSO v1 200 800 "));
    assert_eq!(text, std::fs::read(&b).unwrap());
    let inst: LassoInstance = load_instance(&a).unwrap();
    assert_eq!((inst.rows(), inst.cols(), inst.seed), (200, 800, 7));
}

#[test]
fn gen_rejects_too_many_nonzeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--nnz", "900", "--n", "800", "--out", path_str(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nnz"));
}

#[test]
fn gen_reports_unwritable_path() {
    let out = run(&["gen", "--l", "2", "--n", "3", "--out", "/nonexistent-dir/inst.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent-dir/inst.txt"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["solve", "--algo", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--tol", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--param", "sigma"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--param", "omega", "--values", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--param", "sigma", "--values", "1", "--algo", "admm"]).status.code(), Some(2));
    assert_eq!(run(&["compare", "--algos", "pppa"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--instance", "/nonexistent/instance.txt"]).status.code(), Some(1));
}

#[test]
fn invalid_parameters_name_the_violated_clause() {
    let out = run(&["solve", "--sigma", "0.3", "--s", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sigma must exceed 1/s"), "{}", stderr(&out));
    let out = run(&["solve", "--tau", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tau must be nonzero"));
    let out = run(&["solve", "--algo", "rpppa", "--gamma", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma"));
}

#[test]
fn solve_report_has_the_documented_fields_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("r.json");
    let trace_path = dir.path().join("t.csv");
    run_ok(&with_small(&[
        "solve", "--tol", "1e-9", "--out", path_str(&report_path), "--trace", path_str(&trace_path),
    ]));
    let text = std::fs::read_to_string(&report_path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "algo", "parameters", "iters", "converged", "cpu_seconds", "factor_seconds", "ire_final", "drn_final",
        "phi_final", "kkt_residual_final",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    for key in ["sigma", "rho", "s", "tau", "epsilon", "gamma"] {
        assert!(value["parameters"].get(key).is_some(), "missing parameter {key}");
    }
    let report = RunReport::from_json(&text).unwrap();
    assert!(report.converged);
    assert_eq!(report.parameters, StrategySettings::Ppa(ParameterSet::default()));
    assert!(report.kkt_residual_final <= 1e-6);
    assert_eq!(report.to_json(), text);

    let trace = parse_trace(&std::fs::read_to_string(&trace_path).unwrap());
    assert_eq!(trace.len(), report.iters + 1);
    assert_eq!(trace.last().unwrap().1, report.phi_final);
}

#[test]
fn admm_report_carries_its_own_settings() {
    let text = run_ok(&with_small(&["solve", "--algo", "admm", "--penalty", "2", "--step-length", "1.5"]));
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(report.algo, "admm");
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["parameters"]["penalty"], 2.0);
    assert_eq!(value["parameters"]["step_length"], 1.5);
}

#[test]
fn csv_report_is_one_row() {
    let text = run_ok(&with_small(&["solve", "--format", "csv"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("algo,iters,converged,"));
    assert!(lines[1].starts_with("pppa,"));
}

#[test]
fn unit_relaxation_trace_matches_pppa_trace() {
    let a = parse_trace(&run_ok(&with_small(&["trace", "--algo", "pppa", "--tol", "1e-9"])));
    let b = parse_trace(&run_ok(&with_small(&["trace", "--algo", "rpppa", "--gamma", "1.0", "--tol", "1e-9"])));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.0, rb.0);
        assert!((ra.1 - rb.1).abs() <= 1e-12 * ra.1.abs().max(1.0));
        assert!((ra.2 - rb.2).abs() <= 1e-12);
        assert!((ra.3 - rb.3).abs() <= 1e-12);
    }
}

#[test]
fn trace_is_ordered_in_k_and_time() {
    let rows = parse_trace(&run_ok(&with_small(&["trace", "--algo", "rpppa"])));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.0, i);
    }
    assert!(rows.windows(2).all(|w| w[1].4 >= w[0].4));
    let json = run_ok(&with_small(&["trace", "--format", "json", "--max-iter", "3"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert!(v[3].get("elapsed_s").is_some());
}

#[test]
fn sweep_marks_invalid_rows_and_keeps_phi_constant() {
    let text = run_ok(&with_small(&["sweep", "--param", "sigma", "--values", "0.73,0.8,1,2", "--tol", "1e-10"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 5);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.73);
    assert_eq!(first[1], "invalid");
    let phis: Vec<f64> = lines[2..].iter().map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    for a in &phis {
        for b in &phis {
            assert!((a - b).abs() / a.abs() <= 1e-6);
        }
    }
}

#[test]
fn singleton_sweep_equals_solve() {
    let sweep = run_ok(&with_small(&["sweep", "--param", "rho", "--values", "8", "--clock", "none"]));
    let row: Vec<String> = sweep.lines().nth(1).unwrap().split(',').map(String::from).collect();
    let report = RunReport::from_json(&run_ok(&with_small(&["solve", "--rho", "8"]))).unwrap();
    assert_eq!(row[1].parse::<usize>().unwrap(), report.iters);
    assert_eq!(row[3].parse::<f64>().unwrap(), report.ire_final);
    assert_eq!(row[4].parse::<f64>().unwrap(), report.drn_final);
    assert_eq!(row[5].parse::<f64>().unwrap(), report.phi_final);
}

#[test]
fn compare_uses_the_reference_run_objective() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("i.txt");
    run_ok(&with_small(&["gen", "--out", path_str(&inst_path)]));
    let traces = dir.path().join("traces");
    let text = run_ok(&[
        "compare", "--instance", path_str(&inst_path), "--tols", "1e-5,1e-8", "--trace-dir", path_str(&traces),
    ]);
    let inst = load_instance(&inst_path).unwrap();
    let phi_star = reference_objective(&inst, &ParameterSet::default(), 2000).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3);
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut blocks = Vec::new();
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[col("phi_star")].parse::<f64>().unwrap(), phi_star);
        assert_eq!(f[col("status")], "converged");
        let tol: f64 = f[col("tol")].parse().unwrap();
        if blocks.last() != Some(&tol) {
            blocks.push(tol);
        }
        let algo = f[col("algo")];
        assert!(traces.join(trace_file_name(algo, tol)).exists());
    }
    assert_eq!(blocks, vec![1e-5, 1e-8]);
}

#[test]
fn compare_output_does_not_depend_on_thread_count() {
    let args = with_small(&["compare", "--clock", "none", "--tol", "1e-8", "--format", "json"]);
    let one = Command::new(BIN).args(&args).env("PPA_OPT_THREADS", "1").output().unwrap();
    let three = Command::new(BIN).args(&args).env("PPA_OPT_THREADS", "3").output().unwrap();
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    let bad = Command::new(BIN).args(&args).env("PPA_OPT_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("huge.txt");
    std::fs::write(&path, "LASSO v1 1 1 1e0 0\n1e0\n1e308\n").unwrap();
    for algo in ["pppa", "rpppa", "admm"] {
        let out = run(&["solve", "--instance", path_str(&path), "--algo", algo]);
        assert_eq!(out.status.code(), Some(3), "{algo}: {}", stderr(&out));
    }
}

struct Diverging;

impl LassoStrategy for Diverging {
    fn name(&self) -> &str {
        "diverging"
    }
    fn settings(&self) -> StrategySettings {
        StrategySettings::Ppa(ParameterSet::default())
    }
    fn solve(&self, _: &LassoInstance, _: &StoppingCriteria, _: &mut dyn TraceSink) -> Result<SolveReport, SolveError> {
        Err(SolveError::Diverged { iteration: 4 })
    }
}

fn diverging_factory(_: &AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, SolveError> {
    Ok(Box::new(Diverging))
}

#[test]
fn compare_records_divergence_and_finishes_other_rows() {
    let mut registry = StrategyRegistry::with_builtins();
    registry.register("diverging", diverging_factory).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let mut argv = vec!["ppa-bench", "compare", "--algos", "pppa,diverging,admm", "--out", path_str(&out)];
    argv.extend_from_slice(&SMALL);
    let cli = <Cli as clap::Parser>::try_parse_from(argv).unwrap();
    let Sub::Compare(args) = &cli.command else { unreachable!() };
    let err = cmd_compare(args, &registry).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let text = std::fs::read_to_string(&out).unwrap();
    let statuses: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(statuses, vec!["converged", "diverged", "converged"]);
}
