//! Two-block separable programs `min f(x) + g(y)  s.t.  Ax + By = c`.

use thiserror::Error;

use crate::linalg::{DenseVector, LinalgError, LinearOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProxError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("proximal weight must be positive, got {0}")]
    BadWeight(f64),
    #[error("{0}")]
    Other(String),
}

/// A two-block problem seen through its proximal oracles.
///
/// Both oracles share one contract. `prox_f(x_ref, shift, weight)` returns
///
/// ```text
/// argmin_{x ∈ X}  f(x) + (weight/2)·‖A(x − x_ref) − shift‖²
/// ```
///
/// and `prox_g` is the same with `g`, `B` and `Y`. The constraint sets `X`
/// and `Y` live entirely inside the oracles. `A` and `B` are assumed to have
/// full column rank; nothing checks this at runtime.
pub trait TwoBlockProblem: Sync {
    fn a(&self) -> &LinearOperator;
    fn b(&self) -> &LinearOperator;
    fn c(&self) -> &DenseVector;

    fn prox_f(&self, x_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError>;
    fn prox_g(&self, y_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError>;

    fn f_value(&self, x: &DenseVector) -> f64;
    fn g_value(&self, y: &DenseVector) -> f64;

    fn objective(&self, x: &DenseVector, y: &DenseVector) -> f64 {
        self.f_value(x) + self.g_value(y)
    }

    /// `Ax + By − c`
    fn residual(&self, x: &DenseVector, y: &DenseVector) -> Result<DenseVector, LinalgError> {
        let mut r = self.a().apply(x)?;
        r.axpy(1.0, &self.b().apply(y)?);
        r.axpy(-1.0, self.c());
        Ok(r)
    }

    /// Iterate relative error used by the stopping test. The default is
    /// `‖r‖ / max{‖x‖, ‖y‖, 1}`; problems with a more natural measure override it.
    fn iterate_relative_error(&self, x: &DenseVector, y: &DenseVector, r: &DenseVector) -> f64 {
        r.norm() / x.norm().max(y.norm()).max(1.0)
    }

    /// Dimensions `(l, m, n)` of `c`, `x` and `y`.
    fn dims(&self) -> (usize, usize, usize) {
        (self.c().len(), self.a().cols(), self.b().cols())
    }
}
