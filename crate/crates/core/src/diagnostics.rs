//! Variational-inequality quantities for checking iterates.
//!
//! With `u = (x, y)`, `w = (x, y, λ)` and `φ(u) = f(x) + g(y)`, the affine map
//!
//! ```text
//! J(w) = τ·(−Aᵀλ, −Bᵀλ, Ax + By − c)
//! ```
//!
//! is skew-symmetric, so `⟨w − ŵ, J(w)⟩ = ⟨w − ŵ, J(ŵ)⟩` for all `w, ŵ`.

use crate::linalg::{DenseVector, LinalgError};
use crate::params::ParameterSet;
use crate::problem::TwoBlockProblem;
use crate::proximal::g_norm_squared;
use crate::solver::SolverState;

/// A primal-dual point `w = (x, y, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: DenseVector,
    pub y: DenseVector,
    pub lambda: DenseVector,
}

impl PrimalDualPoint {
    pub fn sub(&self, other: &PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
            lambda: self.lambda.sub(&other.lambda),
        }
    }

    pub fn dot(&self, other: &PrimalDualPoint) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y) + self.lambda.dot(&other.lambda)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// `J(w)`
pub fn j_operator<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    w: &PrimalDualPoint,
) -> Result<PrimalDualPoint, LinalgError> {
    let mut jx = prob.a().apply_transpose(&w.lambda)?;
    jx.scale(-p.tau);
    let mut jy = prob.b().apply_transpose(&w.lambda)?;
    jy.scale(-p.tau);
    let mut jl = prob.residual(&w.x, &w.y)?;
    jl.scale(p.tau);
    Ok(PrimalDualPoint {
        x: jx,
        y: jy,
        lambda: jl,
    })
}

/// `φ(u) − φ(u_ref) + ⟨w − w_ref, J(at)⟩`
pub fn vi_gap<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    w: &PrimalDualPoint,
    w_ref: &PrimalDualPoint,
    at: &PrimalDualPoint,
) -> Result<f64, LinalgError> {
    let j = j_operator(prob, p, at)?;
    Ok(prob.objective(&w.x, &w.y) - prob.objective(&w_ref.x, &w_ref.y) + w.sub(w_ref).dot(&j))
}

/// `φ(u_probe) − φ(u_state) + ⟨w_probe − w_state, J(w_probe)⟩`, taking the
/// state's `λ̄` as its multiplier component. Non-negative for every probe
/// when the state solves the problem.
pub fn vi_residual<P: TwoBlockProblem + ?Sized>(
    state: &SolverState,
    prob: &P,
    p: &ParameterSet,
    probe: &PrimalDualPoint,
) -> Result<f64, LinalgError> {
    vi_gap(prob, p, probe, &state.point(), probe)
}

/// The ergodic gap `φ(u_t) − φ(u) + ⟨w_t − w, J(w)⟩` of an averaged point
/// against a reference `w`.
pub fn ergodic_gap<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    averaged: &PrimalDualPoint,
    reference: &PrimalDualPoint,
) -> Result<f64, LinalgError> {
    vi_gap(prob, p, averaged, reference, reference)
}

/// `‖w − v‖²_G`
pub fn g_distance_squared<P: TwoBlockProblem + ?Sized>(
    prob: &P,
    p: &ParameterSet,
    w: &PrimalDualPoint,
    v: &PrimalDualPoint,
) -> Result<f64, LinalgError> {
    let d = w.sub(v);
    g_norm_squared(p, prob.a(), prob.b(), &d.x, &d.y, &d.lambda)
}
