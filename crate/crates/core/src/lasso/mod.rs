//! The lasso `min ν‖x‖₁ + ½‖Dx − b‖²` and its splitting into a two-block
//! problem with `f(x) = ν‖x‖₁`, `g(y) = ½‖Dy − b‖²`, `A = I`, `B = −I`, `c = 0`.

mod io;
mod sampling;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use io::{format_f64, load_instance, read_instance, save_instance, write_instance};
pub use sampling::NormalSampler;

use crate::linalg::{
    normalize_columns, DenseMatrix, DenseVector, LinalgError, LinearOperator, RegularizedNormalSolver,
};
use crate::params::{ParameterSet, ParameterViolation};
use crate::problem::{ProxError, TwoBlockProblem};

#[derive(Debug, Error)]
pub enum LassoError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid parameters: {0}")]
    Parameters(#[from] ParameterViolation),
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported instance format version {0:?}")]
    UnsupportedVersion(String),
}

/// A lasso instance. `x_true` is present for generated instances.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoInstance {
    pub d: DenseMatrix,
    pub b: DenseVector,
    pub nu: f64,
    pub x_true: Option<DenseVector>,
    pub seed: u64,
}

impl LassoInstance {
    pub fn new(
        d: DenseMatrix,
        b: DenseVector,
        nu: f64,
        x_true: Option<DenseVector>,
        seed: u64,
    ) -> Result<Self, LassoError> {
        if b.len() != d.rows() {
            return Err(LassoError::Instance(format!(
                "b has length {} but D has {} rows",
                b.len(),
                d.rows()
            )));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(LassoError::Instance(format!("nu must be positive, got {nu}")));
        }
        if let Some(xt) = &x_true {
            if xt.len() != d.cols() {
                return Err(LassoError::Instance(format!(
                    "x_true has length {} but D has {} columns",
                    xt.len(),
                    d.cols()
                )));
            }
        }
        Ok(Self {
            d,
            b,
            nu,
            x_true,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.d.rows()
    }

    pub fn cols(&self) -> usize {
        self.d.cols()
    }

    /// `‖Dᵀb‖_∞`, the smallest `ν` for which `x = 0` is optimal.
    pub fn nu_max(&self) -> f64 {
        self.d
            .matvec_transpose(&self.b)
            .expect("instance dimensions are checked at construction")
            .norm_inf()
    }
}

/// Settings for [`generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationConfig {
    pub l: usize,
    pub n: usize,
    pub nnz: usize,
    pub noise_variance: f64,
    pub nu_factor: f64,
    pub seed: u64,
}

impl GenerationConfig {
    /// Defaults: `nnz = min(100, ⌊n/10⌋)` (at least 1), noise variance `1e-3`,
    /// `ν = 0.12·‖Dᵀb‖_∞`.
    pub fn new(l: usize, n: usize, seed: u64) -> Self {
        Self {
            l,
            n,
            nnz: default_nnz(n),
            noise_variance: 1e-3,
            nu_factor: 0.12,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LassoError> {
        let bad = |m: String| Err(LassoError::Config(m));
        if self.l == 0 || self.n == 0 {
            return bad(format!("dimensions must be positive, got l={} n={}", self.l, self.n));
        }
        if self.nnz == 0 || self.nnz > self.n {
            return bad(format!("nnz must lie in 1..={}, got {}", self.n, self.nnz));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return bad(format!("noise variance must be non-negative, got {}", self.noise_variance));
        }
        if !(self.nu_factor > 0.0 && self.nu_factor.is_finite()) {
            return bad(format!("nu factor must be positive, got {}", self.nu_factor));
        }
        Ok(())
    }
}

pub fn default_nnz(n: usize) -> usize {
    (n / 10).clamp(1, 100)
}

/// Draws a synthetic instance: Gaussian `D` with unit columns, a sparse
/// Gaussian `x_true` on a uniformly chosen support, `b = D·x_true + noise`,
/// and `ν = nu_factor·‖Dᵀb‖_∞`.
///
/// The stream comes from ChaCha8 seeded with `config.seed`, with normals by
/// Box–Muller, so equal configs give bit-identical instances.
pub fn generate(config: &GenerationConfig) -> Result<LassoInstance, LassoError> {
    config.validate()?;
    let GenerationConfig { l, n, nnz, .. } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut normal = NormalSampler::new();

    let raw: Vec<f64> = (0..l * n).map(|_| normal.sample(&mut rng)).collect();
    let d = normalize_columns(&DenseMatrix::new(l, n, raw)?)?;

    let mut support = rand::seq::index::sample(&mut rng, n, nnz).into_vec();
    support.sort_unstable();
    let mut x_true = DenseVector::zeros(n);
    for &i in &support {
        // A draw of exactly zero would lose a nonzero; it has probability zero
        // but is cheap to rule out.
        let mut v = normal.sample(&mut rng);
        while v == 0.0 {
            v = normal.sample(&mut rng);
        }
        x_true[i] = v;
    }

    let mut b = d.matvec(&x_true)?;
    let sd = config.noise_variance.sqrt();
    for bi in b.iter_mut() {
        *bi += sd * normal.sample(&mut rng);
    }
    let nu = config.nu_factor * d.matvec_transpose(&b)?.norm_inf();
    LassoInstance::new(d, b, nu, Some(x_true), config.seed)
}

/// Componentwise `sign(v)·max(|v| − κ, 0)`, with `sign(0) = 0`.
pub fn soft_threshold(v: &DenseVector, kappa: f64) -> Result<DenseVector, LinalgError> {
    if !(kappa >= 0.0) {
        return Err(LinalgError::InvalidArgument(format!(
            "threshold must be non-negative, got {kappa}"
        )));
    }
    Ok(v.map(|x| {
        if x > kappa {
            x - kappa
        } else if x < -kappa {
            x + kappa
        } else {
            0.0
        }
    }))
}

/// `ν‖x‖₁ + ½‖Dy − b‖²`
pub fn objective(inst: &LassoInstance, x: &DenseVector, y: &DenseVector) -> f64 {
    inst.nu * x.norm1() + least_squares_value(inst, y)
}

fn least_squares_value(inst: &LassoInstance, y: &DenseVector) -> f64 {
    let mut r = inst.d.matvec(y).expect("dimension checked by caller");
    r.axpy(-1.0, &inst.b);
    0.5 * r.norm_squared()
}

/// Largest violation of `0 ∈ ν·∂‖x‖₁ + Dᵀ(Dx − b)` over coordinates.
/// Zero exactly when `x` solves the lasso.
pub fn kkt_residual(inst: &LassoInstance, x: &DenseVector) -> Result<f64, LinalgError> {
    let mut r = inst.d.matvec(x)?;
    r.axpy(-1.0, &inst.b);
    let g = inst.d.matvec_transpose(&r)?;
    let nu = inst.nu;
    Ok(x.iter().zip(g.iter()).fold(0.0, |worst: f64, (&xi, &gi)| {
        let v = if xi > 0.0 {
            (gi + nu).abs()
        } else if xi < 0.0 {
            (gi - nu).abs()
        } else {
            (gi.abs() - nu).max(0.0)
        };
        worst.max(v)
    }))
}

/// The lasso as a [`TwoBlockProblem`], with the y-subproblem matrix
/// `DᵀD + ρ̄I` factored once up front.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    inst: &'a LassoInstance,
    a: LinearOperator,
    b: LinearOperator,
    c: DenseVector,
    dtb: DenseVector,
    y_solver: RegularizedNormalSolver,
    factor_seconds: f64,
}

/// Splits `inst` for the parameter set `p`, caching the factorization for
/// `ρ̄ = p.rho_bar()`.
pub fn as_two_block<'a>(inst: &'a LassoInstance, p: &ParameterSet) -> Result<LassoProblem<'a>, LassoError> {
    p.validate_region()?;
    LassoProblem::with_weight(inst, p.rho_bar())
}

impl<'a> LassoProblem<'a> {
    /// Builds the splitting with the y-factorization cached for `weight`.
    pub fn with_weight(inst: &'a LassoInstance, weight: f64) -> Result<Self, LassoError> {
        let n = inst.cols();
        let started = Instant::now();
        let y_solver = RegularizedNormalSolver::new(&inst.d, weight)?;
        let factor_seconds = started.elapsed().as_secs_f64();
        Ok(Self {
            inst,
            a: LinearOperator::identity(n),
            b: LinearOperator::ScaledIdentity { dim: n, scale: -1.0 },
            c: DenseVector::zeros(n),
            dtb: inst.d.matvec_transpose(&inst.b)?,
            y_solver,
            factor_seconds,
        })
    }

    pub fn instance(&self) -> &LassoInstance {
        self.inst
    }

    /// Seconds spent building the cached factorization.
    pub fn factor_seconds(&self) -> f64 {
        self.factor_seconds
    }

    pub fn cached_weight(&self) -> f64 {
        self.y_solver.rho()
    }
}

impl TwoBlockProblem for LassoProblem<'_> {
    fn a(&self) -> &LinearOperator {
        &self.a
    }

    fn b(&self) -> &LinearOperator {
        &self.b
    }

    fn c(&self) -> &DenseVector {
        &self.c
    }

    /// `shrink(x_ref + shift, ν/weight)`
    fn prox_f(&self, x_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError> {
        if !(weight > 0.0) {
            return Err(ProxError::BadWeight(weight));
        }
        Ok(soft_threshold(&x_ref.add(shift), self.inst.nu / weight)?)
    }

    /// Solves `(DᵀD + weight·I)·y = Dᵀb + weight·(y_ref − shift)`; `B = −I`
    /// flips the sign of the shift.
    fn prox_g(&self, y_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError> {
        if !(weight > 0.0) {
            return Err(ProxError::BadWeight(weight));
        }
        let mut rhs = self.dtb.clone();
        rhs.axpy(weight, &y_ref.sub(shift));
        let d = &self.inst.d;
        let y = if weight == self.y_solver.rho() {
            self.y_solver.solve(d, &rhs)?
        } else {
            RegularizedNormalSolver::new(d, weight)?.solve(d, &rhs)?
        };
        debug_assert!(
            !(y.is_finite() && rhs.norm().is_finite()) || {
                let mut lhs = d.matvec_transpose(&d.matvec(&y).unwrap()).unwrap();
                lhs.axpy(weight, &y);
                lhs.sub(&rhs).norm() <= 1e-9 * rhs.norm().max(f64::MIN_POSITIVE)
            },
            "normal-equation residual too large"
        );
        Ok(y)
    }

    fn f_value(&self, x: &DenseVector) -> f64 {
        self.inst.nu * x.norm1()
    }

    fn g_value(&self, y: &DenseVector) -> f64 {
        least_squares_value(self.inst, y)
    }

    /// `‖x − y‖ / max{‖x‖, ‖y‖}`, taken as zero when both vanish.
    fn iterate_relative_error(&self, x: &DenseVector, y: &DenseVector, _r: &DenseVector) -> f64 {
        let scale = x.norm().max(y.norm());
        if scale == 0.0 {
            0.0
        } else {
            x.sub(y).norm() / scale
        }
    }
}
