//! The parameterized proximal matrix `G` and its metric.
//!
//! For iterates ordered `w = (x, y, λ)` with `A: l×m`, `B: l×n`:
//!
//! ```text
//!     [ (σ + (ε²−1)/s)·AᵀA          0            −ε·Aᵀ ]
//! G = [         0            (ρ + (τ²−1)/s)·BᵀB   −τ·Bᵀ ]
//!     [       −ε·A                −τ·B             s·I  ]
//! ```

use thiserror::Error;

use crate::linalg::{cholesky, DenseMatrix, DenseVector, LinalgError, LinearOperator};
use crate::params::ParameterSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProximalError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("A and B must have the same number of rows ({a_rows} vs {b_rows})")]
    RowMismatch { a_rows: usize, b_rows: usize },
    #[error("Cholesky verdict ({cholesky}) disagrees with the Schur-complement verdict ({schur})")]
    Inconsistent { cholesky: bool, schur: bool },
}

/// Coefficient of the `AᵀA` block, `σ + (ε² − 1)/s`.
pub fn x_block_weight(p: &ParameterSet) -> f64 {
    p.sigma + (p.epsilon * p.epsilon - 1.0) / p.s
}

/// Assembles `G` as a dense `(m + n + l)`-square matrix.
pub fn build_g(p: &ParameterSet, a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, ProximalError> {
    if a.rows() != b.rows() {
        return Err(ProximalError::RowMismatch {
            a_rows: a.rows(),
            b_rows: b.rows(),
        });
    }
    let (l, m, n) = (a.rows(), a.cols(), b.cols());
    let dim = m + n + l;
    let ata = a.gram_cols();
    let btb = b.gram_cols();
    let wx = x_block_weight(p);
    let wy = p.rho_bar();
    let mut g = DenseMatrix::zeros(dim, dim);
    for i in 0..m {
        for j in 0..m {
            g.set(i, j, wx * ata.get(i, j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            g.set(m + i, m + j, wy * btb.get(i, j));
        }
    }
    let lam = m + n;
    for k in 0..l {
        for i in 0..m {
            let v = -p.epsilon * a.get(k, i);
            g.set(i, lam + k, v);
            g.set(lam + k, i, v);
        }
        for j in 0..n {
            let v = -p.tau * b.get(k, j);
            g.set(m + j, lam + k, v);
            g.set(lam + k, m + j, v);
        }
        g.set(lam + k, lam + k, p.s);
    }
    Ok(g)
}

/// `‖(dx, dy, dλ)‖²_G` evaluated blockwise, without assembling `G`.
pub fn g_norm_squared(
    p: &ParameterSet,
    a: &LinearOperator,
    b: &LinearOperator,
    dx: &DenseVector,
    dy: &DenseVector,
    dlambda: &DenseVector,
) -> Result<f64, LinalgError> {
    let adx = a.apply(dx)?;
    let bdy = b.apply(dy)?;
    Ok(x_block_weight(p) * adx.norm_squared() + p.rho_bar() * bdy.norm_squared()
        + p.s * dlambda.norm_squared()
        - 2.0 * p.epsilon * adx.dot(dlambda)
        - 2.0 * p.tau * bdy.dot(dlambda))
}

/// The reduced positive-definiteness test: `s > 0`, `σ − 1/s > 0` and
/// `(σ − 1/s)(ρ − 1/s) − (τε/s)² > 0`.
///
/// With `A`, `B` of full column rank this is sufficient for `G ≻ 0`. It is
/// also necessary when `range(A) ∩ range(B) ≠ {0}`, which covers the lasso
/// splitting; when the ranges meet only at zero the coupling term is damped
/// and `G` can be PD while this test fails.
pub fn schur_criterion(p: &ParameterSet) -> bool {
    if !(p.s > 0.0) {
        return false;
    }
    let a = p.sigma - 1.0 / p.s;
    let c = p.rho - 1.0 / p.s;
    let off = p.tau * p.epsilon / p.s;
    a > 0.0 && a * c - off * off > 0.0
}

/// Decides positive definiteness of `G` by factoring it, and cross-checks the
/// verdict against [`schur_criterion`]. `A` and `B` are assumed to have full
/// column rank; a disagreement is reported as [`ProximalError::Inconsistent`]
/// (possible only for invalid parameters on blocks with disjoint ranges).
pub fn check_g_positive_definite(
    p: &ParameterSet,
    a: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<bool, ProximalError> {
    let g = build_g(p, a, b)?;
    let by_cholesky = match cholesky(&g) {
        Ok(_) => true,
        Err(LinalgError::NotPositiveDefinite { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    let by_schur = schur_criterion(p);
    if by_cholesky != by_schur {
        return Err(ProximalError::Inconsistent {
            cholesky: by_cholesky,
            schur: by_schur,
        });
    }
    Ok(by_cholesky)
}
