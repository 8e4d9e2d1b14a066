//! P-PPA and its relaxed variant over an abstract [`TwoBlockProblem`].
//!
//! The solver never stores the multiplier `λ` itself. It carries the shifted
//! multiplier `λ̄ = λ − ((τ + ε)/s)·(Ax + By − c)`, which is all the update
//! formulas need; [`SolverState::multiplier`] reconstructs `λ` on demand.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::PrimalDualPoint;
use crate::linalg::{DenseVector, LinalgError};
use crate::params::{ParameterSet, ParameterViolation};
use crate::problem::{ProxError, TwoBlockProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    Parameters(#[from] ParameterViolation),
    #[error("invalid stopping criteria: {0}")]
    Criteria(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("proximal oracle failed at iteration {iteration}: {source}")]
    Prox { iteration: usize, source: ProxError },
    #[error("iterates became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("ergodic average needs at least one step")]
    NoSteps,
}

/// Which stepping rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pppa,
    Rpppa,
}

/// Iterate `(x, y, λ̄)`, its primal residual and the running ergodic sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DenseVector,
    pub y: DenseVector,
    pub lambda_bar: DenseVector,
    /// `Ax + By − c` for the current `(x, y)`.
    pub r: DenseVector,
    pub k: usize,
    pub ergodic_sum_x: DenseVector,
    pub ergodic_sum_y: DenseVector,
    pub ergodic_sum_lambda: DenseVector,
}

impl SolverState {
    /// The multiplier `λ = λ̄ + ((τ + ε)/s)·r`.
    pub fn multiplier(&self, p: &ParameterSet) -> DenseVector {
        let mut lambda = self.lambda_bar.clone();
        lambda.axpy((p.tau + p.epsilon) / p.s, &self.r);
        lambda
    }

    /// `(x, y, λ̄)` as a point.
    pub fn point(&self) -> PrimalDualPoint {
        PrimalDualPoint {
            x: self.x.clone(),
            y: self.y.clone(),
            lambda: self.lambda_bar.clone(),
        }
    }

    /// `(x, y, λ)` with the reconstructed multiplier; the metric in which
    /// both variants contract.
    pub fn primal_dual(&self, p: &ParameterSet) -> PrimalDualPoint {
        PrimalDualPoint {
            x: self.x.clone(),
            y: self.y.clone(),
            lambda: self.multiplier(p),
        }
    }

    fn accumulate(&mut self) {
        self.ergodic_sum_x.axpy(1.0, &self.x);
        self.ergodic_sum_y.axpy(1.0, &self.y);
        self.ergodic_sum_lambda.axpy(1.0, &self.lambda_bar);
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.lambda_bar.is_finite()
    }
}

fn check_dims<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    x: &DenseVector,
    y: &DenseVector,
    lambda: &DenseVector,
) -> Result<(), LinalgError> {
    let (l, m, n) = prob.dims();
    for (op, expected, found) in [
        ("initial x", m, x.len()),
        ("initial y", n, y.len()),
        ("initial lambda", l, lambda.len()),
        ("B rows", l, prob.b().rows()),
        ("A rows", l, prob.a().rows()),
    ] {
        if expected != found {
            return Err(LinalgError::DimensionMismatch { op, expected, found });
        }
    }
    Ok(())
}

/// Sets `r⁰ = Ax⁰ + By⁰ − c` and `λ̄⁰ = λ⁰ − ((τ + ε)/s)·r⁰`.
pub fn pppa_init<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    x0: DenseVector,
    y0: DenseVector,
    lambda0: DenseVector,
) -> Result<SolverState, SolveError> {
    check_dims(prob, &x0, &y0, &lambda0)?;
    let r = prob.residual(&x0, &y0)?;
    let mut lambda_bar = lambda0;
    lambda_bar.axpy(-(p.tau + p.epsilon) / p.s, &r);
    let (l, m, n) = prob.dims();
    Ok(SolverState {
        x: x0,
        y: y0,
        lambda_bar,
        r,
        k: 0,
        ergodic_sum_x: DenseVector::zeros(m),
        ergodic_sum_y: DenseVector::zeros(n),
        ergodic_sum_lambda: DenseVector::zeros(l),
    })
}

/// The all-zero starting point.
pub fn zero_start<P: TwoBlockProblem + ?Sized>(prob: &P, p: &ParameterSet) -> Result<SolverState, SolveError> {
    let (l, m, n) = prob.dims();
    pppa_init(prob, p, DenseVector::zeros(m), DenseVector::zeros(n), DenseVector::zeros(l))
}

/// Result of one unrelaxed sweep from `(x, y, λ̄)`.
struct Sweep {
    x: DenseVector,
    y: DenseVector,
    r: DenseVector,
    lambda_bar: DenseVector,
}

fn sweep<P: TwoBlockProblem + ?Sized>(state: &SolverState, prob: &P, p: &ParameterSet) -> Result<Sweep, SolveError> {
    let iteration = state.k + 1;
    let prox_err = |source| SolveError::Prox { iteration, source };
    let (a, b) = (prob.a(), prob.b());
    let sigma_bar = p.sigma_bar();
    let rho_bar = p.rho_bar();

    let x_shift = state.lambda_bar.scaled(p.tau / sigma_bar);
    let x = prob.prox_f(&state.x, &x_shift, sigma_bar).map_err(prox_err)?;

    let lambda_half = if p.tau == p.epsilon {
        state.lambda_bar.clone()
    } else {
        // A(2x⁺ − x) + By − c
        let extrapolated = x.zip_map(&state.x, |new, old| 2.0 * new - old);
        let mut t = a.apply(&extrapolated)?;
        t.axpy(1.0, &b.apply(&state.y)?);
        t.axpy(-1.0, prob.c());
        let mut half = state.lambda_bar.clone();
        half.axpy(-(p.tau - p.epsilon) / p.s, &t);
        half
    };

    let y_shift = lambda_half.scaled(p.tau / rho_bar);
    let y = prob.prox_g(&state.y, &y_shift, rho_bar).map_err(prox_err)?;

    let r = prob.residual(&x, &y)?;
    let a_dx = a.apply(&x.sub(&state.x))?;
    let b_dy = b.apply(&y.sub(&state.y))?;
    let mut lambda_bar = state.lambda_bar.clone();
    lambda_bar.axpy(-p.tau / p.s, &r);
    lambda_bar.axpy(-p.tau / p.s, &a_dx);
    lambda_bar.axpy(-p.epsilon / p.s, &b_dy);
    Ok(Sweep { x, y, r, lambda_bar })
}

fn commit(state: &SolverState, x: DenseVector, y: DenseVector, r: DenseVector, lambda_bar: DenseVector) -> Result<SolverState, SolveError> {
    let mut next = SolverState {
        x,
        y,
        lambda_bar,
        r,
        k: state.k + 1,
        ergodic_sum_x: state.ergodic_sum_x.clone(),
        ergodic_sum_y: state.ergodic_sum_y.clone(),
        ergodic_sum_lambda: state.ergodic_sum_lambda.clone(),
    };
    if !next.is_finite() {
        return Err(SolveError::Diverged { iteration: next.k });
    }
    next.accumulate();
    Ok(next)
}

/// One P-PPA iteration: x-prox, half multiplier, y-prox, residual, `λ̄` update.
pub fn pppa_step<P: TwoBlockProblem + ?Sized>(
    state: &SolverState,
    prob: &P,
    p: &ParameterSet,
) -> Result<SolverState, SolveError> {
    let s = sweep(state, prob, p)?;
    commit(state, s.x, s.y, s.r, s.lambda_bar)
}

/// One RP-PPA iteration: the P-PPA sweep produces `(x̃, ỹ, λ̃)`, then
///
/// ```text
/// (x, y)⁺ = (x, y) + γ·(Δx, Δy)
/// λ̄⁺      = λ̄ + γ·(λ̃ − λ̄) − ((1 − γ)(τ + ε)/s)·(A·Δx + B·Δy)
/// ```
pub fn rpppa_step<P: TwoBlockProblem + ?Sized>(
    state: &SolverState,
    prob: &P,
    p: &ParameterSet,
) -> Result<SolverState, SolveError> {
    rpppa_step_with_prediction(state, prob, p).map(|(next, _)| next)
}

/// [`rpppa_step`], also returning the unrelaxed `x̃`.
fn rpppa_step_with_prediction<P: TwoBlockProblem + ?Sized>(
    state: &SolverState,
    prob: &P,
    p: &ParameterSet,
) -> Result<(SolverState, DenseVector), SolveError> {
    let gamma = p.gamma;
    let s = sweep(state, prob, p)?;
    let dx = s.x.sub(&state.x);
    let dy = s.y.sub(&state.y);
    let mut x = state.x.clone();
    x.axpy(gamma, &dx);
    let mut y = state.y.clone();
    y.axpy(gamma, &dy);

    let mut coupling = prob.a().apply(&dx)?;
    coupling.axpy(1.0, &prob.b().apply(&dy)?);
    let mut lambda_bar = state.lambda_bar.clone();
    lambda_bar.axpy(gamma, &s.lambda_bar.sub(&state.lambda_bar));
    lambda_bar.axpy(-(1.0 - gamma) * (p.tau + p.epsilon) / p.s, &coupling);

    let r = prob.residual(&x, &y)?;
    Ok((commit(state, x, y, r, lambda_bar)?, s.x))
}

pub fn step<P: TwoBlockProblem + ?Sized>(
    state: &SolverState,
    prob: &P,
    p: &ParameterSet,
    algorithm: Algorithm,
) -> Result<SolverState, SolveError> {
    match algorithm {
        Algorithm::Pppa => pppa_step(state, prob, p),
        Algorithm::Rpppa => rpppa_step(state, prob, p),
    }
}

/// `γ` only matters for the relaxed variant.
pub fn validate_for(p: &ParameterSet, algorithm: Algorithm) -> Result<(), ParameterViolation> {
    match algorithm {
        Algorithm::Pppa => p.validate_region(),
        Algorithm::Rpppa => p.validate(),
    }
}

/// Mean of the post-update iterates `w¹, …, wᵏ`.
pub fn ergodic_average(state: &SolverState) -> Result<PrimalDualPoint, SolveError> {
    if state.k == 0 {
        return Err(SolveError::NoSteps);
    }
    let inv = 1.0 / state.k as f64;
    Ok(PrimalDualPoint {
        x: state.ergodic_sum_x.scaled(inv),
        y: state.ergodic_sum_y.scaled(inv),
        lambda: state.ergodic_sum_lambda.scaled(inv),
    })
}

/// Runs exactly `iterations` steps from `state` with no stopping test.
pub fn run_steps<P: TwoBlockProblem + ?Sized>(
    mut state: SolverState,
    prob: &P,
    p: &ParameterSet,
    algorithm: Algorithm,
    iterations: usize,
) -> Result<SolverState, SolveError> {
    validate_for(p, algorithm)?;
    for _ in 0..iterations {
        state = step(&state, prob, p, algorithm)?;
    }
    Ok(state)
}

/// When to stop: `IRE ≤ tol` and, if a reference optimum is known,
/// `(φ − φ*)/|φ*| ≤ rel_obj_tol`; or after `max_iter` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    pub tol: f64,
    pub rel_obj_tol: f64,
    pub phi_star: Option<f64>,
    pub max_iter: usize,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            rel_obj_tol: 1e-8,
            phi_star: None,
            max_iter: 2000,
        }
    }
}

impl StoppingCriteria {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SolveError::Criteria(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.rel_obj_tol > 0.0 && self.rel_obj_tol.is_finite()) {
            return Err(SolveError::Criteria(format!(
                "rel_obj_tol must be positive, got {}",
                self.rel_obj_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolveError::Criteria("max_iter must be positive".into()));
        }
        if let Some(phi) = self.phi_star {
            if !phi.is_finite() {
                return Err(SolveError::Criteria("phi_star must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn is_met(&self, ire: f64, phi: f64) -> bool {
        if !(ire <= self.tol) {
            return false;
        }
        match self.phi_star {
            None => true,
            Some(star) if star == 0.0 => phi - star <= self.rel_obj_tol,
            Some(star) => (phi - star) / star.abs() <= self.rel_obj_tol,
        }
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub phi: f64,
    pub ire: f64,
    /// `‖yᵏ − yᵏ⁻¹‖`, zero at `k = 0`.
    pub drn: f64,
    /// Wall-clock seconds since the solve started.
    pub elapsed: f64,
}

/// Receives one [`IterationRecord`] per iteration, from the solving thread.
pub trait TraceSink {
    fn record(&mut self, record: &IterationRecord);
}

impl TraceSink for Vec<IterationRecord> {
    fn record(&mut self, record: &IterationRecord) {
        self.push(*record);
    }
}

/// Discards every record.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _record: &IterationRecord) {}
}

/// Final iterates and summary of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: String,
    pub x: DenseVector,
    pub y: DenseVector,
    /// Final `λ̄`; methods without that notion leave it empty.
    pub lambda_bar: Option<DenseVector>,
    /// Last x-subproblem output before relaxation. Relaxed iterates keep a
    /// geometrically decaying trace of old values where the x-subproblem
    /// returns exact zeros, so this is the sparse estimate for such methods.
    pub x_prediction: Option<DenseVector>,
    pub iterations: usize,
    pub converged: bool,
    pub ire: f64,
    pub drn: f64,
    pub phi: f64,
    /// Wall-clock time of the iteration loop.
    pub solve_seconds: f64,
    /// Time spent on factorizations done before the loop.
    pub factor_seconds: f64,
}

impl SolveReport {
    /// `x_prediction` when present, else `x`.
    pub fn sparse_estimate(&self) -> &DenseVector {
        self.x_prediction.as_ref().unwrap_or(&self.x)
    }
}

/// An iteration scheme the shared driver can run.
pub(crate) trait IterativeMethod: Clone {
    /// Advances one step; `iteration` is the index of the iterate produced.
    fn advance(&mut self, iteration: usize) -> Result<(), SolveError>;
    fn phi(&self) -> f64;
    fn ire(&self) -> f64;
    /// The block whose successive change is reported as DRN.
    fn drn_block(&self) -> &DenseVector;
    /// Euclidean distance between the full iterates of two states.
    fn distance(&self, other: &Self) -> f64;
    /// Euclidean norm of the full iterate.
    fn magnitude(&self) -> f64;
}

pub(crate) struct DriveOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub ire: f64,
    pub drn: f64,
    pub phi: f64,
    pub elapsed: f64,
}

/// Runs `method` until the criteria hold or `max_iter` is reached.
///
/// The test is applied to the starting point too. A start that passes it is
/// accepted (reported at `k = 0`) only if one trial step leaves it in place to
/// within `tol` relative to its magnitude; otherwise iteration proceeds as usual.
pub(crate) fn drive<M: IterativeMethod>(
    method: &mut M,
    criteria: &StoppingCriteria,
    sink: &mut dyn TraceSink,
) -> Result<DriveOutcome, SolveError> {
    criteria.validate()?;
    let start = Instant::now();
    let mut phi = method.phi();
    let mut ire = method.ire();
    let mut drn = 0.0;
    sink.record(&IterationRecord {
        k: 0,
        phi,
        ire,
        drn,
        elapsed: start.elapsed().as_secs_f64(),
    });
    if criteria.is_met(ire, phi) {
        let mut trial = method.clone();
        trial.advance(1)?;
        if trial.distance(method) <= criteria.tol * method.magnitude().max(1.0) {
            return Ok(DriveOutcome {
                iterations: 0,
                converged: true,
                ire,
                drn,
                phi,
                elapsed: start.elapsed().as_secs_f64(),
            });
        }
    }
    for k in 1..=criteria.max_iter {
        let previous = method.drn_block().clone();
        method.advance(k)?;
        phi = method.phi();
        ire = method.ire();
        drn = method.drn_block().sub(&previous).norm();
        if !(phi.is_finite() && ire.is_finite()) {
            return Err(SolveError::Diverged { iteration: k });
        }
        sink.record(&IterationRecord {
            k,
            phi,
            ire,
            drn,
            elapsed: start.elapsed().as_secs_f64(),
        });
        if criteria.is_met(ire, phi) {
            return Ok(DriveOutcome {
                iterations: k,
                converged: true,
                ire,
                drn,
                phi,
                elapsed: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(DriveOutcome {
        iterations: criteria.max_iter,
        converged: false,
        ire,
        drn,
        phi,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

struct PpaMethod<'a, P: TwoBlockProblem + ?Sized> {
    prob: &'a P,
    params: ParameterSet,
    algorithm: Algorithm,
    state: SolverState,
    prediction: Option<DenseVector>,
}

impl<P: TwoBlockProblem + ?Sized> Clone for PpaMethod<'_, P> {
    fn clone(&self) -> Self {
        Self {
            prob: self.prob,
            params: self.params,
            algorithm: self.algorithm,
            state: self.state.clone(),
            prediction: self.prediction.clone(),
        }
    }
}

impl<P: TwoBlockProblem + ?Sized> IterativeMethod for PpaMethod<'_, P> {
    fn advance(&mut self, _iteration: usize) -> Result<(), SolveError> {
        match self.algorithm {
            Algorithm::Pppa => self.state = pppa_step(&self.state, self.prob, &self.params)?,
            Algorithm::Rpppa => {
                let (next, x_tilde) = rpppa_step_with_prediction(&self.state, self.prob, &self.params)?;
                self.state = next;
                self.prediction = Some(x_tilde);
            }
        }
        Ok(())
    }

    fn phi(&self) -> f64 {
        self.prob.objective(&self.state.x, &self.state.y)
    }

    fn ire(&self) -> f64 {
        self.prob.iterate_relative_error(&self.state.x, &self.state.y, &self.state.r)
    }

    fn drn_block(&self) -> &DenseVector {
        &self.state.y
    }

    fn distance(&self, other: &Self) -> f64 {
        (self.state.x.sub(&other.state.x).norm_squared()
            + self.state.y.sub(&other.state.y).norm_squared()
            + self.state.lambda_bar.sub(&other.state.lambda_bar).norm_squared())
        .sqrt()
    }

    fn magnitude(&self) -> f64 {
        (self.state.x.norm_squared() + self.state.y.norm_squared() + self.state.lambda_bar.norm_squared()).sqrt()
    }
}

/// Solves from the all-zero start.
pub fn solve<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    criteria: &StoppingCriteria,
    algorithm: Algorithm,
    sink: &mut dyn TraceSink,
) -> Result<SolveReport, SolveError> {
    validate_for(p, algorithm)?;
    let start = zero_start(prob, p)?;
    solve_from(prob, p, criteria, algorithm, start, sink)
}

/// Solves from a caller-supplied state (see [`pppa_init`]).
pub fn solve_from<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    criteria: &StoppingCriteria,
    algorithm: Algorithm,
    start: SolverState,
    sink: &mut dyn TraceSink,
) -> Result<SolveReport, SolveError> {
    validate_for(p, algorithm)?;
    let mut method = PpaMethod {
        prob,
        params: *p,
        algorithm,
        state: start,
        prediction: None,
    };
    let outcome = drive(&mut method, criteria, sink)?;
    let state = method.state;
    Ok(SolveReport {
        algorithm: match algorithm {
            Algorithm::Pppa => "pppa".to_string(),
            Algorithm::Rpppa => "rpppa".to_string(),
        },
        x: state.x,
        y: state.y,
        lambda_bar: Some(state.lambda_bar),
        x_prediction: method.prediction,
        iterations: outcome.iterations,
        converged: outcome.converged,
        ire: outcome.ire,
        drn: outcome.drn,
        phi: outcome.phi,
        solve_seconds: outcome.elapsed,
        factor_seconds: 0.0,
    })
}
