//! Algorithm parameters and the admissible region they must lie in.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five proximal-matrix parameters plus the relaxation factor used by the
/// relaxed variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub sigma: f64,
    pub rho: f64,
    pub s: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl Default for ParameterSet {
    /// The tuned setting `(σ, ρ, s, τ, ε) = (0.8, 6, 3, 3, 1.5)` with `γ = 1.2`.
    fn default() -> Self {
        Self {
            sigma: 0.8,
            rho: 6.0,
            s: 3.0,
            tau: 3.0,
            epsilon: 1.5,
            gamma: 1.2,
        }
    }
}

/// The first clause of the admissible region that a parameter set violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParameterViolation {
    #[error("all parameters must be finite")]
    NonFinite,
    #[error("s must be positive")]
    SNotPositive,
    #[error("sigma must exceed 1/s")]
    SigmaTooSmall,
    #[error("(sigma*s - 1)(rho*s - 1) - tau^2*eps^2 must be positive")]
    CouplingNotPositive,
    #[error("tau must be nonzero")]
    TauZero,
    #[error("gamma must lie in (0, 2)")]
    GammaOutOfRange,
    #[error("sigma_bar = sigma + (tau^2 - 1)/s must be positive")]
    SigmaBarNotPositive,
    #[error("rho_bar = rho + (tau^2 - 1)/s must be positive")]
    RhoBarNotPositive,
}

impl ParameterViolation {
    /// Short machine-friendly name, used in sweep tables.
    pub fn clause(&self) -> &'static str {
        match self {
            ParameterViolation::NonFinite => "finite",
            ParameterViolation::SNotPositive => "s>0",
            ParameterViolation::SigmaTooSmall => "sigma>1/s",
            ParameterViolation::CouplingNotPositive => "(sigma*s-1)(rho*s-1)-tau^2*eps^2>0",
            ParameterViolation::TauZero => "tau!=0",
            ParameterViolation::GammaOutOfRange => "0<gamma<2",
            ParameterViolation::SigmaBarNotPositive => "sigma_bar>0",
            ParameterViolation::RhoBarNotPositive => "rho_bar>0",
        }
    }
}

impl ParameterSet {
    pub fn new(sigma: f64, rho: f64, s: f64, tau: f64, epsilon: f64, gamma: f64) -> Self {
        Self {
            sigma,
            rho,
            s,
            tau,
            epsilon,
            gamma,
        }
    }

    /// Checks the admissible region and `γ ∈ (0, 2)`.
    pub fn validate(&self) -> Result<(), ParameterViolation> {
        self.validate_region()?;
        if !(self.gamma > 0.0 && self.gamma < 2.0) {
            return Err(ParameterViolation::GammaOutOfRange);
        }
        Ok(())
    }

    /// Checks every clause of the admissible region for `(σ, ρ, s, τ, ε)`
    /// strictly and reports the first failure, ignoring `γ`. `τ ≠ 0` is
    /// checked before the inequalities.
    pub fn validate_region(&self) -> Result<(), ParameterViolation> {
        let Self {
            sigma,
            rho,
            s,
            tau,
            epsilon,
            ..
        } = *self;
        if ![sigma, rho, s, tau, epsilon, self.gamma].iter().all(|v| v.is_finite()) {
            return Err(ParameterViolation::NonFinite);
        }
        if tau == 0.0 {
            return Err(ParameterViolation::TauZero);
        }
        if !(s > 0.0) {
            return Err(ParameterViolation::SNotPositive);
        }
        if !(sigma > 1.0 / s) {
            return Err(ParameterViolation::SigmaTooSmall);
        }
        if !((sigma * s - 1.0) * (rho * s - 1.0) - tau * tau * epsilon * epsilon > 0.0) {
            return Err(ParameterViolation::CouplingNotPositive);
        }
        // Implied by the clauses above; kept as a guard against roundoff.
        if !(self.sigma_bar() > 0.0) {
            return Err(ParameterViolation::SigmaBarNotPositive);
        }
        if !(self.rho_bar() > 0.0) {
            return Err(ParameterViolation::RhoBarNotPositive);
        }
        Ok(())
    }

    /// Effective proximal weight of the x-subproblem, `σ + (τ² − 1)/s`.
    pub fn sigma_bar(&self) -> f64 {
        self.sigma + (self.tau * self.tau - 1.0) / self.s
    }

    /// Effective proximal weight of the y-subproblem, `ρ + (τ² − 1)/s`.
    pub fn rho_bar(&self) -> f64 {
        self.rho + (self.tau * self.tau - 1.0) / self.s
    }

    /// Returns a copy with the named parameter replaced. Names are
    /// `sigma, rho, s, tau, epsilon, gamma` (`eps` is accepted too).
    pub fn with(&self, name: &str, value: f64) -> Option<Self> {
        let mut p = *self;
        match name {
            "sigma" => p.sigma = value,
            "rho" => p.rho = value,
            "s" => p.s = value,
            "tau" => p.tau = value,
            "epsilon" | "eps" => p.epsilon = value,
            "gamma" => p.gamma = value,
            _ => return None,
        }
        Some(p)
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(sigma={}, rho={}, s={}, tau={}, eps={}, gamma={})",
            self.sigma, self.rho, self.s, self.tau, self.epsilon, self.gamma
        )
    }
}
