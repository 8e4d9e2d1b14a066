use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppa_core::admm::AdmmConfig;
use ppa_core::lasso::{default_nnz, GenerationConfig};
use ppa_core::params::ParameterSet;
use ppa_core::registry::AlgorithmConfig;
use ppa_core::solver::StoppingCriteria;

#[derive(Debug, Parser)]
#[command(name = "ppa-bench", version, about = "Lasso benchmarks for parameterized proximal point solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded lasso instance and write it to a file.
    Gen(GenArgs),
    /// Solve one instance and write a report (and optionally its trace).
    Solve(SolveArgs),
    /// Solve one instance for each value of one parameter.
    Sweep(SweepArgs),
    /// Run several solvers against a shared reference objective.
    Compare(CompareArgs),
    /// Write the per-iteration convergence trace of one solve.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clock {
    /// Wall-clock timings.
    Wall,
    /// Write every timing as 0 so outputs are byte-for-byte reproducible.
    None,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Read the instance from this file instead of generating one.
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub l: usize,
    #[arg(long, default_value_t = 800)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nonzeros in the planted signal [default: min(100, n/10)]
    #[arg(long)]
    pub nnz: Option<usize>,
    #[arg(long = "noise-var", default_value_t = 1e-3)]
    pub noise_var: f64,
    #[arg(long = "nu-factor", default_value_t = 0.12)]
    pub nu_factor: f64,
}

impl InstanceArgs {
    pub fn generation_config(&self) -> GenerationConfig {
        GenerationConfig {
            l: self.l,
            n: self.n,
            nnz: self.nnz.unwrap_or_else(|| default_nnz(self.n)),
            noise_variance: self.noise_var,
            nu_factor: self.nu_factor,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AlgoArgs {
    /// pppa, rpppa or admm
    #[arg(long, default_value = "pppa")]
    pub algo: String,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.2, allow_hyphen_values = true)]
    pub gamma: f64,
    /// ADMM penalty
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub penalty: f64,
    /// ADMM multiplier step length
    #[arg(long = "step-length", default_value_t = 1.618, allow_hyphen_values = true)]
    pub step_length: f64,
}

impl AlgoArgs {
    pub fn params(&self) -> ParameterSet {
        ParameterSet::new(self.sigma, self.rho, self.s, self.tau, self.eps, self.gamma)
    }

    pub fn config(&self) -> AlgorithmConfig {
        AlgorithmConfig {
            params: self.params(),
            admm: AdmmConfig {
                penalty: self.penalty,
                step_length: self.step_length,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CriteriaArgs {
    /// IRE threshold
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long = "rel-obj-tol", default_value_t = 1e-8)]
    pub rel_obj_tol: f64,
    #[arg(long = "max-iter", default_value_t = 2000)]
    pub max_iter: usize,
}

impl CriteriaArgs {
    pub fn criteria(&self) -> StoppingCriteria {
        StoppingCriteria {
            tol: self.tol,
            rel_obj_tol: self.rel_obj_tol,
            phi_star: None,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file [default: stdout]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum, default_value = "wall")]
    pub clock: Clock,
}

impl OutputArgs {
    pub fn zero_time(&self) -> bool {
        self.clock == Clock::None
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also write the convergence trace CSV here.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// sigma, rho, s, tau, epsilon or gamma
    #[arg(long)]
    pub param: String,
    /// Comma-separated values for the swept parameter.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', default_value = "pppa,rpppa,admm")]
    pub algos: Vec<String>,
    /// Comma-separated IRE tolerances, one summary block each [default: --tol]
    #[arg(long, value_delimiter = ',')]
    pub tols: Vec<f64>,
    /// Directory for per-solver trace files.
    #[arg(long = "trace-dir", value_name = "DIR")]
    pub trace_dir: Option<PathBuf>,
    /// Iterations of the reference P-PPA run that fixes phi*.
    #[arg(long = "reference-iters", default_value_t = 2000)]
    pub reference_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
