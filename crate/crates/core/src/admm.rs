//! Scaled-form ADMM for the lasso splitting, used as the comparison baseline.
//!
//! From zeros, each iteration does
//!
//! ```text
//! x ← (DᵀD + ρI)⁻¹ (Dᵀb + ρ(z − u))
//! z ← shrink(x + u, ν/ρ)
//! u ← u + θ·(x − z)
//! ```
//!
//! with penalty `ρ` and multiplier step length `θ`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lasso::{soft_threshold, LassoInstance};
use crate::linalg::{DenseVector, RegularizedNormalSolver};
use crate::solver::{drive, IterativeMethod, SolveError, SolveReport, StoppingCriteria, TraceSink};

/// Upper end of the admissible step lengths, `(1 + √5)/2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub penalty: f64,
    pub step_length: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            penalty: 1.0,
            step_length: 1.618,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(SolveError::Config(format!(
                "penalty must be positive, got {}",
                self.penalty
            )));
        }
        if !(self.step_length > 0.0 && self.step_length <= GOLDEN_RATIO) {
            return Err(SolveError::Config(format!(
                "step length must lie in (0, (1+sqrt 5)/2], got {}",
                self.step_length
            )));
        }
        Ok(())
    }
}

#[derive(Clone)]
struct AdmmIteration<'a> {
    inst: &'a LassoInstance,
    solver: &'a RegularizedNormalSolver,
    dtb: &'a DenseVector,
    cfg: AdmmConfig,
    /// least-squares block
    x: DenseVector,
    /// sparse block
    z: DenseVector,
    u: DenseVector,
}

impl IterativeMethod for AdmmIteration<'_> {
    fn advance(&mut self, iteration: usize) -> Result<(), SolveError> {
        let rho = self.cfg.penalty;
        let mut rhs = self.dtb.clone();
        rhs.axpy(rho, &self.z.sub(&self.u));
        let x = self.solver.solve(&self.inst.d, &rhs)?;
        let z = soft_threshold(&x.add(&self.u), self.inst.nu / rho)?;
        let mut u = self.u.clone();
        u.axpy(self.cfg.step_length, &x.sub(&z));
        if !(x.is_finite() && z.is_finite() && u.is_finite()) {
            return Err(SolveError::Diverged { iteration });
        }
        self.x = x;
        self.z = z;
        self.u = u;
        Ok(())
    }

    fn phi(&self) -> f64 {
        let mut r = self.inst.d.matvec(&self.x).expect("dimensions fixed by the instance");
        r.axpy(-1.0, &self.inst.b);
        self.inst.nu * self.z.norm1() + 0.5 * r.norm_squared()
    }

    fn ire(&self) -> f64 {
        self.x.sub(&self.z).norm() / self.x.norm().max(self.z.norm()).max(1.0)
    }

    fn drn_block(&self) -> &DenseVector {
        &self.x
    }

    fn distance(&self, other: &Self) -> f64 {
        (self.x.sub(&other.x).norm_squared()
            + self.z.sub(&other.z).norm_squared()
            + self.u.sub(&other.u).norm_squared())
        .sqrt()
    }

    fn magnitude(&self) -> f64 {
        (self.x.norm_squared() + self.z.norm_squared() + self.u.norm_squared()).sqrt()
    }
}

/// Runs ADMM from the zero start. The report's `x` is the sparse block `z`
/// and its `y` the least-squares block, matching the roles in the splitting.
pub fn admm_solve(
    inst: &LassoInstance,
    cfg: &AdmmConfig,
    criteria: &StoppingCriteria,
    sink: &mut dyn TraceSink,
) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    criteria.validate()?;
    let started = Instant::now();
    let solver = RegularizedNormalSolver::new(&inst.d, cfg.penalty)?;
    let factor_seconds = started.elapsed().as_secs_f64();
    let dtb = inst.d.matvec_transpose(&inst.b)?;
    let n = inst.cols();
    let mut it = AdmmIteration {
        inst,
        solver: &solver,
        dtb: &dtb,
        cfg: *cfg,
        x: DenseVector::zeros(n),
        z: DenseVector::zeros(n),
        u: DenseVector::zeros(n),
    };
    let outcome = drive(&mut it, criteria, sink)?;
    Ok(SolveReport {
        algorithm: "admm".to_string(),
        x: it.z,
        y: it.x,
        lambda_bar: None,
        x_prediction: None,
        iterations: outcome.iterations,
        converged: outcome.converged,
        ire: outcome.ire,
        drn: outcome.drn,
        phi: outcome.phi,
        solve_seconds: outcome.elapsed,
        factor_seconds,
    })
}
