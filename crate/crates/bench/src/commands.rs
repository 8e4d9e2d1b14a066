use std::fs;
use std::path::Path;

use ppa_core::lasso::{as_two_block, generate, kkt_residual, load_instance, save_instance, LassoInstance};
use ppa_core::problem::TwoBlockProblem;
use ppa_core::registry::{LassoStrategy, RegistryError, StrategyRegistry};
use ppa_core::solver::{run_steps, zero_start, Algorithm, IterationRecord, SolveError, SolveReport, StoppingCriteria};
use ppa_core::ParameterSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{CompareArgs, Format, GenArgs, InstanceArgs, SolveArgs, SweepArgs, TraceArgs};
use crate::error::BenchError;
use crate::output::{emit, num, trace_csv, trace_json, write_file, RunReport, COMPARE_HEADER, SWEEP_HEADER};

/// Caps the number of concurrent solves in `compare`.
pub const THREADS_ENV: &str = "PPA_OPT_THREADS";

pub fn load_or_generate(args: &InstanceArgs) -> Result<LassoInstance, BenchError> {
    match &args.instance {
        Some(path) => Ok(load_instance(path)?),
        None => Ok(generate(&args.generation_config())?),
    }
}

fn build_report(
    strategy: &dyn LassoStrategy,
    inst: &LassoInstance,
    report: &SolveReport,
    zero_time: bool,
) -> Result<RunReport, BenchError> {
    let kkt = kkt_residual(inst, report.sparse_estimate()).map_err(|e| BenchError::Failed(e.to_string()))?;
    let (cpu, factor) = if zero_time {
        (0.0, 0.0)
    } else {
        (report.solve_seconds, report.factor_seconds)
    };
    Ok(RunReport {
        algo: strategy.name().to_string(),
        parameters: strategy.settings(),
        iters: report.iterations,
        converged: report.converged,
        cpu_seconds: cpu,
        factor_seconds: factor,
        ire_final: report.ire,
        drn_final: report.drn,
        phi_final: report.phi,
        kkt_residual_final: kkt,
    })
}

fn render_trace(trace: &[IterationRecord], format: Format, zero_time: bool) -> String {
    match format {
        Format::Csv => trace_csv(trace, zero_time),
        Format::Json => trace_json(trace, zero_time),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), BenchError> {
    let inst = generate(&args.instance.generation_config())?;
    save_instance(&inst, &args.out)?;
    let summary = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => format!("nu={} nu_max={}\n", num(inst.nu), num(inst.nu_max())),
        Format::Json => format!(
            "{}\n",
            serde_json::json!({ "nu": inst.nu, "nu_max": inst.nu_max(), "path": args.out.display().to_string() })
        ),
    };
    emit(None, &summary)
}

/// Solves once, writing the trace (if asked) even when the solve diverges.
fn solve_with_trace(
    strategy: &dyn LassoStrategy,
    inst: &LassoInstance,
    criteria: &StoppingCriteria,
    trace_path: Option<(&Path, Format, bool)>,
) -> Result<(SolveReport, Vec<IterationRecord>), BenchError> {
    let mut trace = Vec::new();
    let result = strategy.solve(inst, criteria, &mut trace);
    if let Some((path, format, zero_time)) = trace_path {
        write_file(path, &render_trace(&trace, format, zero_time))?;
    }
    Ok((result?, trace))
}

pub fn cmd_solve(args: &SolveArgs, registry: &StrategyRegistry) -> Result<RunReport, BenchError> {
    let inst = load_or_generate(&args.instance)?;
    let strategy = registry.create(&args.algo.algo, &args.algo.config())?;
    let criteria = args.criteria.criteria();
    criteria.validate()?;
    let zero_time = args.output.zero_time();
    let trace_target = args.trace.as_deref().map(|p| (p, Format::Csv, zero_time));
    let (report, _) = solve_with_trace(strategy.as_ref(), &inst, &criteria, trace_target)?;
    let run = build_report(strategy.as_ref(), &inst, &report, zero_time)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => run.to_json(),
        Format::Csv => run.to_csv(),
    };
    emit(args.output.out.as_deref(), &text)?;
    Ok(run)
}

pub fn cmd_trace(args: &TraceArgs, registry: &StrategyRegistry) -> Result<(), BenchError> {
    let inst = load_or_generate(&args.instance)?;
    let strategy = registry.create(&args.algo.algo, &args.algo.config())?;
    let criteria = args.criteria.criteria();
    criteria.validate()?;
    let mut trace = Vec::new();
    let result = strategy.solve(&inst, &criteria, &mut trace);
    let format = args.output.format.unwrap_or(Format::Csv);
    emit(args.output.out.as_deref(), &render_trace(&trace, format, args.output.zero_time()))?;
    let report = result?;
    eprintln!(
        "{}: {} iterations, converged={}, phi={}",
        strategy.name(),
        report.iterations,
        report.converged,
        num(report.phi)
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpu_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ire: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SweepRow {
    fn failed(param_value: f64, status: &str, detail: String) -> Self {
        Self {
            param_value,
            status: status.to_string(),
            iters: None,
            converged: None,
            cpu_s: None,
            ire: None,
            drn: None,
            phi: None,
            detail: Some(detail),
        }
    }

    pub fn csv(&self) -> String {
        match (self.iters, self.cpu_s, self.ire, self.drn, self.phi) {
            (Some(it), Some(cpu), Some(ire), Some(drn), Some(phi)) => format!(
                "{},{},{},{},{},{}",
                num(self.param_value),
                it,
                num(cpu),
                num(ire),
                num(drn),
                num(phi)
            ),
            _ => format!(
                "{},{},{}",
                num(self.param_value),
                self.status,
                self.detail.as_deref().unwrap_or("")
            ),
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs, registry: &StrategyRegistry) -> Result<Vec<SweepRow>, BenchError> {
    if args.values.is_empty() {
        return Err(BenchError::Usage("--values needs at least one value".into()));
    }
    let base = args.algo.params();
    if base.with(&args.param, 0.0).is_none() {
        return Err(BenchError::Usage(format!(
            "unknown parameter {:?} (expected sigma, rho, s, tau, epsilon or gamma)",
            args.param
        )));
    }
    if !matches!(args.algo.algo.as_str(), "pppa" | "rpppa") {
        return Err(BenchError::Usage(format!(
            "sweep varies proximal point parameters; --algo must be pppa or rpppa, got {:?}",
            args.algo.algo
        )));
    }
    let criteria = args.criteria.criteria();
    criteria.validate()?;
    let inst = load_or_generate(&args.instance)?;
    let zero_time = args.output.zero_time();

    let mut rows = Vec::with_capacity(args.values.len());
    let mut diverged = 0;
    for &value in &args.values {
        let mut cfg = args.algo.config();
        cfg.params = base.with(&args.param, value).expect("name checked above");
        let strategy = match registry.create(&args.algo.algo, &cfg) {
            Ok(s) => s,
            Err(RegistryError::Invalid(SolveError::Parameters(v))) => {
                rows.push(SweepRow::failed(value, "invalid", v.clause().to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        match strategy.solve(&inst, &criteria, &mut ppa_core::NullSink) {
            Ok(r) => rows.push(SweepRow {
                param_value: value,
                status: if r.converged { "converged" } else { "max_iter" }.to_string(),
                iters: Some(r.iterations),
                converged: Some(r.converged),
                cpu_s: Some(if zero_time { 0.0 } else { r.solve_seconds }),
                ire: Some(r.ire),
                drn: Some(r.drn),
                phi: Some(r.phi),
                detail: None,
            }),
            Err(e @ SolveError::Diverged { .. }) => {
                diverged += 1;
                rows.push(SweepRow::failed(value, "diverged", e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{SWEEP_HEADER}\n");
            for r in &rows {
                s.push_str(&r.csv());
                s.push('\n');
            }
            s
        }
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows).expect("finite sweep values")),
    };
    emit(args.output.out.as_deref(), &text)?;
    if diverged > 0 {
        return Err(BenchError::Diverged(format!("{diverged} sweep row(s) diverged")));
    }
    Ok(rows)
}

/// `φ` after exactly `iterations` P-PPA steps from zero.
pub fn reference_objective(inst: &LassoInstance, params: &ParameterSet, iterations: usize) -> Result<f64, BenchError> {
    let prob = as_two_block(inst, params)?;
    let start = zero_start(&prob, params)?;
    let state = run_steps(start, &prob, params, Algorithm::Pppa, iterations)?;
    Ok(prob.objective(&state.x, &state.y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub tol: f64,
    pub algo: String,
    pub status: String,
    pub iters: Option<usize>,
    pub converged: Option<bool>,
    pub cpu_s: Option<f64>,
    pub factor_s: Option<f64>,
    pub ire: Option<f64>,
    pub drn: Option<f64>,
    pub phi: Option<f64>,
    pub phi_star: f64,
    pub rel_obj_err: Option<f64>,
    pub kkt_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CompareRow {
    pub fn csv(&self) -> String {
        let f = |v: Option<f64>| v.map(num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(self.tol),
            self.algo,
            self.status,
            self.iters.map(|v| v.to_string()).unwrap_or_default(),
            self.converged.map(|v| v.to_string()).unwrap_or_default(),
            f(self.cpu_s),
            f(self.factor_s),
            f(self.ire),
            f(self.drn),
            f(self.phi),
            num(self.phi_star),
            f(self.rel_obj_err),
            f(self.kkt_residual),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareBlock {
    pub tol: f64,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub phi_star: f64,
    pub reference_iters: usize,
    pub blocks: Vec<CompareBlock>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{COMPARE_HEADER}\n");
        for block in &self.blocks {
            for row in &block.rows {
                s.push_str(&row.csv());
                s.push('\n');
            }
        }
        s
    }
}

fn thread_cap(jobs: usize) -> Result<usize, BenchError> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return Err(BenchError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    Ok(cap.min(jobs).max(1))
}

pub fn trace_file_name(algo: &str, tol: f64) -> String {
    format!("{algo}_tol{tol:e}.csv")
}

pub fn cmd_compare(args: &CompareArgs, registry: &StrategyRegistry) -> Result<Comparison, BenchError> {
    if args.algos.len() < 2 {
        return Err(BenchError::Usage("compare needs at least two algorithms in --algos".into()));
    }
    if args.reference_iters == 0 {
        return Err(BenchError::Usage("--reference-iters must be positive".into()));
    }
    let cfg = args.algo.config();
    let strategies = args
        .algos
        .iter()
        .map(|name| registry.create(name, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let tols = if args.tols.is_empty() {
        vec![args.criteria.tol]
    } else {
        args.tols.clone()
    };
    for &tol in &tols {
        StoppingCriteria { tol, ..args.criteria.criteria() }.validate()?;
    }
    let inst = load_or_generate(&args.instance)?;
    let zero_time = args.output.zero_time();

    let phi_star = reference_objective(&inst, &cfg.params, args.reference_iters)?;

    let jobs: Vec<(f64, usize)> = tols
        .iter()
        .flat_map(|&t| (0..strategies.len()).map(move |i| (t, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap(jobs.len())?)
        .build()
        .map_err(|e| BenchError::Failed(e.to_string()))?;
    let results: Vec<Result<(SolveReport, Vec<IterationRecord>), SolveError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(tol, i)| {
                let criteria = StoppingCriteria {
                    tol,
                    phi_star: Some(phi_star),
                    ..args.criteria.criteria()
                };
                let mut trace = Vec::new();
                strategies[i].solve(&inst, &criteria, &mut trace).map(|r| (r, trace))
            })
            .collect()
    });

    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let mut blocks: Vec<CompareBlock> = tols.iter().map(|&tol| CompareBlock { tol, rows: Vec::new() }).collect();
    let mut diverged = 0;
    for ((tol, i), result) in jobs.iter().zip(results) {
        let name = strategies[*i].name().to_string();
        let row = match result {
            Ok((report, trace)) => {
                if let Some(dir) = &args.trace_dir {
                    write_file(&dir.join(trace_file_name(&name, *tol)), &trace_csv(&trace, zero_time))?;
                }
                let kkt = kkt_residual(&inst, report.sparse_estimate()).map_err(|e| BenchError::Failed(e.to_string()))?;
                CompareRow {
                    tol: *tol,
                    algo: name,
                    status: if report.converged { "converged" } else { "max_iter" }.to_string(),
                    iters: Some(report.iterations),
                    converged: Some(report.converged),
                    cpu_s: Some(if zero_time { 0.0 } else { report.solve_seconds }),
                    factor_s: Some(if zero_time { 0.0 } else { report.factor_seconds }),
                    ire: Some(report.ire),
                    drn: Some(report.drn),
                    phi: Some(report.phi),
                    phi_star,
                    rel_obj_err: Some((report.phi - phi_star) / phi_star.abs()),
                    kkt_residual: Some(kkt),
                    detail: None,
                }
            }
            Err(e) => {
                if !matches!(e, SolveError::Diverged { .. }) {
                    return Err(e.into());
                }
                diverged += 1;
                CompareRow {
                    tol: *tol,
                    algo: name,
                    status: "diverged".to_string(),
                    iters: None,
                    converged: Some(false),
                    cpu_s: None,
                    factor_s: None,
                    ire: None,
                    drn: None,
                    phi: None,
                    phi_star,
                    rel_obj_err: None,
                    kkt_residual: None,
                    detail: Some(e.to_string()),
                }
            }
        };
        let block = blocks.iter_mut().find(|b| b.tol == *tol).expect("one block per tolerance");
        block.rows.push(row);
    }

    let comparison = Comparison {
        phi_star,
        reference_iters: args.reference_iters,
        blocks,
    };
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => comparison.to_csv(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&comparison).expect("finite comparison values")),
    };
    emit(args.output.out.as_deref(), &text)?;
    if diverged > 0 {
        return Err(BenchError::Diverged(format!("{diverged} solve(s) diverged")));
    }
    Ok(comparison)
}
