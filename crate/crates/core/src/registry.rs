//! Lasso solvers behind one trait, looked up by name at runtime.
//!
//! The built-in registry knows `pppa`, `rpppa` and `admm`. Each name maps to
//! a factory that builds a configured [`LassoStrategy`] from an
//! [`AlgorithmConfig`]; invalid settings are rejected at construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admm::{admm_solve, AdmmConfig};
use crate::lasso::{as_two_block, LassoError, LassoInstance};
use crate::params::ParameterSet;
use crate::solver::{solve, validate_for, Algorithm, SolveError, SolveReport, StoppingCriteria, TraceSink};

/// Everything a strategy might read; each one ignores what it doesn't use.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgorithmConfig {
    pub params: ParameterSet,
    pub admm: AdmmConfig,
}

/// The settings a strategy actually runs with, as reported alongside results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategySettings {
    Ppa(ParameterSet),
    Admm(AdmmConfig),
}

pub trait LassoStrategy: Send + Sync {
    fn name(&self) -> &str;
    fn settings(&self) -> StrategySettings;
    fn solve(
        &self,
        inst: &LassoInstance,
        criteria: &StoppingCriteria,
        sink: &mut dyn TraceSink,
    ) -> Result<SolveReport, SolveError>;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown algorithm {name:?} (available: {available})")]
    Unknown { name: String, available: String },
    #[error("algorithm {name:?} is already registered")]
    Duplicate { name: String },
    #[error(transparent)]
    Invalid(#[from] SolveError),
}

pub type StrategyFactory = fn(&AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, SolveError>;

/// Name → factory table, kept in registration order.
#[derive(Clone, Default)]
pub struct StrategyRegistry {
    entries: Vec<(String, StrategyFactory)>,
}

impl StrategyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register("pppa", PpaStrategy::factory_pppa).expect("fresh registry");
        r.register("rpppa", PpaStrategy::factory_rpppa).expect("fresh registry");
        r.register("admm", AdmmStrategy::factory).expect("fresh registry");
        r
    }

    pub fn register(&mut self, name: &str, factory: StrategyFactory) -> Result<(), RegistryError> {
        if self.entries.iter().any(|(n, _)| n == name) {
            return Err(RegistryError::Duplicate { name: name.to_string() });
        }
        self.entries.push((name.to_string(), factory));
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    pub fn create(&self, name: &str, config: &AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, RegistryError> {
        let factory = self
            .entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| *f)
            .ok_or_else(|| RegistryError::Unknown {
                name: name.to_string(),
                available: self.names().join(", "),
            })?;
        Ok(factory(config)?)
    }
}

impl std::fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

fn lasso_to_solve_error(e: LassoError) -> SolveError {
    match e {
        LassoError::Parameters(v) => SolveError::Parameters(v),
        LassoError::Linalg(e) => SolveError::Linalg(e),
        other => SolveError::Config(other.to_string()),
    }
}

/// P-PPA or RP-PPA on the lasso splitting.
#[derive(Debug, Clone, Copy)]
pub struct PpaStrategy {
    pub params: ParameterSet,
    pub algorithm: Algorithm,
}

impl PpaStrategy {
    pub fn new(params: ParameterSet, algorithm: Algorithm) -> Result<Self, SolveError> {
        validate_for(&params, algorithm)?;
        Ok(Self { params, algorithm })
    }

    fn factory_pppa(config: &AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, SolveError> {
        Ok(Box::new(Self::new(config.params, Algorithm::Pppa)?))
    }

    fn factory_rpppa(config: &AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, SolveError> {
        Ok(Box::new(Self::new(config.params, Algorithm::Rpppa)?))
    }
}

impl LassoStrategy for PpaStrategy {
    fn name(&self) -> &str {
        match self.algorithm {
            Algorithm::Pppa => "pppa",
            Algorithm::Rpppa => "rpppa",
        }
    }

    fn settings(&self) -> StrategySettings {
        StrategySettings::Ppa(self.params)
    }

    fn solve(
        &self,
        inst: &LassoInstance,
        criteria: &StoppingCriteria,
        sink: &mut dyn TraceSink,
    ) -> Result<SolveReport, SolveError> {
        let prob = as_two_block(inst, &self.params).map_err(lasso_to_solve_error)?;
        let mut report = solve(&prob, &self.params, criteria, self.algorithm, sink)?;
        report.factor_seconds = prob.factor_seconds();
        Ok(report)
    }
}

/// The ADMM baseline.
#[derive(Debug, Clone, Copy)]
pub struct AdmmStrategy {
    pub config: AdmmConfig,
}

impl AdmmStrategy {
    pub fn new(config: AdmmConfig) -> Result<Self, SolveError> {
        config.validate()?;
        Ok(Self { config })
    }

    fn factory(config: &AlgorithmConfig) -> Result<Box<dyn LassoStrategy>, SolveError> {
        Ok(Box::new(Self::new(config.admm)?))
    }
}

impl LassoStrategy for AdmmStrategy {
    fn name(&self) -> &str {
        "admm"
    }

    fn settings(&self) -> StrategySettings {
        StrategySettings::Admm(self.config)
    }

    fn solve(
        &self,
        inst: &LassoInstance,
        criteria: &StoppingCriteria,
        sink: &mut dyn TraceSink,
    ) -> Result<SolveReport, SolveError> {
        admm_solve(inst, &self.config, criteria, sink)
    }
}
