//! Dense vector and matrix kernels.
//!
//! Everything here is dense and row-major. The only factorization is an
//! unpivoted Cholesky, which doubles as the positive-definiteness test used by
//! the proximal-matrix checks. [`RegularizedNormalSolver`] applies
//! `(DᵀD + ρI)⁻¹` through the Woodbury identity when `D` is wide, so only the
//! small row-space Gram matrix ever gets factored.

use std::ops::{Deref, DerefMut};

use thiserror::Error;

/// Pivots at or below this fraction of the largest diagonal entry count as
/// non-positive.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Allowed asymmetry `|m_ij - m_ji|` relative to `max(1, max |m|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not positive definite (pivot {pivot} is non-positive)")]
    NotPositiveDefinite { pivot: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("column {col} is identically zero")]
    ZeroColumn { col: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(LinalgError::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch {
            op,
            expected,
            found,
        })
    }
}

#[inline]
fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    /// Wraps `data`, rejecting empty input and non-finite entries.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(LinalgError::InvalidArgument("vector must be non-empty".into()));
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    /// Wraps `data` without validation. Callers that may produce non-finite
    /// values are expected to check [`DenseVector::is_finite`] themselves.
    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Self {
            data: vec![value; len],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        dot_slices(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        dot_slices(&self.data, &self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += alpha * v;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> DenseVector {
        self.map(|v| alpha * v)
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseVector {
        DenseVector::from_vec_unchecked(self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &DenseVector, f: impl Fn(f64, f64) -> f64) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector::from_vec_unchecked(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Concatenates several vectors into one.
    pub fn concat(parts: &[&DenseVector]) -> DenseVector {
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        DenseVector::from_vec_unchecked(data)
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// A dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_len("DenseMatrix::from_rows", c, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        DenseVector::from_vec_unchecked((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Standard matrix-vector product `M·v`.
    pub fn matvec(&self, v: &DenseVector) -> Result<DenseVector> {
        check_len("matvec", self.cols, v.len())?;
        Ok(DenseVector::from_vec_unchecked(
            (0..self.rows).map(|i| dot_slices(self.row(i), v)).collect(),
        ))
    }

    /// `Mᵀ·v`, computed row by row without forming the transpose.
    pub fn matvec_transpose(&self, v: &DenseVector) -> Result<DenseVector> {
        check_len("matvec_transpose", self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        Ok(DenseVector::from_vec_unchecked(out))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("matmul", self.cols, other.rows)?;
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Row-space Gram matrix `M·Mᵀ` (rows × rows).
    pub fn gram_rows(&self) -> DenseMatrix {
        let n = self.rows;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot_slices(self.row(i), self.row(j));
                g.data[i * n + j] = v;
                g.data[j * n + i] = v;
            }
        }
        g
    }

    /// Column-space Gram matrix `Mᵀ·M` (cols × cols).
    pub fn gram_cols(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for k in 0..self.rows {
            let row = self.row(k);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let g_row = &mut g.data[i * n..i * n + i + 1];
                for (gij, rj) in g_row.iter_mut().zip(&row[..=i]) {
                    *gij += ri * rj;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[j * n + i] = g.data[i * n + j];
            }
        }
        g
    }

    /// Adds `alpha` to every diagonal entry.
    pub fn add_diagonal(&mut self, alpha: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += alpha;
        }
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    // Row-major, full storage; the strict upper triangle stays zero.
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.lower.clone(),
        }
    }

    /// Solves `(L·Lᵀ)·v = rhs` by forward then backward substitution.
    pub fn solve(&self, rhs: &DenseVector) -> Result<DenseVector> {
        check_len("chol_solve", self.dim, rhs.len())?;
        let n = self.dim;
        let l = &self.lower;
        let mut z = rhs.as_slice().to_vec();
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let s = z[i] - dot_slices(row, &z[..i]);
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l[k * n + i] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        Ok(DenseVector::from_vec_unchecked(z))
    }
}

/// Factors a symmetric matrix. A non-positive pivot is reported as
/// [`LinalgError::NotPositiveDefinite`] carrying the pivot index.
pub fn cholesky(m: &DenseMatrix) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(LinalgError::InvalidArgument(format!(
            "cholesky needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let scale = m.max_abs().max(1.0);
    if m.max_abs_asymmetry() > SYMMETRY_TOLERANCE * scale {
        return Err(LinalgError::InvalidArgument(
            "cholesky needs a symmetric matrix".into(),
        ));
    }
    let n = m.rows;
    let max_diag = (0..n).map(|i| m.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let threshold = PIVOT_TOLERANCE * max_diag.max(0.0);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let (head, tail) = l.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        for i in 0..j {
            let row_i = &head[i * n..i * n + i];
            // symmetrized entry
            let a = 0.5 * (m.get(j, i) + m.get(i, j));
            let s = a - dot_slices(&row_j[..i], row_i);
            row_j[i] = s / head[i * n + i];
        }
        let pivot = m.get(j, j) - dot_slices(&row_j[..j], &row_j[..j]);
        if !(pivot > threshold) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        row_j[j] = pivot.sqrt();
    }
    Ok(CholeskyFactor { dim: n, lower: l })
}

pub fn chol_solve(factor: &CholeskyFactor, rhs: &DenseVector) -> Result<DenseVector> {
    factor.solve(rhs)
}

/// True when [`cholesky`] succeeds.
pub fn is_positive_definite(m: &DenseMatrix) -> Result<bool> {
    match cholesky(m) {
        Ok(_) => Ok(true),
        Err(LinalgError::NotPositiveDefinite { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::InvalidArgument(format!(
            "regularization must be positive, got {rho}"
        )))
    }
}

/// Factors `D·Dᵀ/ρ + I`, the matrix cached by the Woodbury path.
pub fn factor_row_space(d: &DenseMatrix, rho: f64) -> Result<CholeskyFactor> {
    check_rho(rho)?;
    let mut g = d.gram_rows().scaled(1.0 / rho);
    g.add_diagonal(1.0);
    cholesky(&g)
}

fn woodbury_apply(
    d: &DenseMatrix,
    rho: f64,
    rhs: &DenseVector,
    factor: &CholeskyFactor,
) -> Result<DenseVector> {
    check_len("solve_regularized_normal (cache)", d.rows, factor.dim)?;
    // (ρ(DDᵀ/ρ + I))·u = D·rhs, then v = (rhs − Dᵀu)/ρ
    let mut u = factor.solve(&d.matvec(rhs)?)?;
    u.scale(1.0 / rho);
    let dtu = d.matvec_transpose(&u)?;
    Ok(rhs.zip_map(&dtu, |a, b| (a - b) / rho))
}

/// Solves `(DᵀD + ρI)·v = rhs`.
///
/// Wide `D` (rows < cols) goes through the Woodbury identity using the factor
/// of `D·Dᵀ/ρ + I`, taken from `cache` when supplied. Otherwise `DᵀD + ρI` is
/// factored directly on every call; use [`RegularizedNormalSolver`] to keep
/// that factor around.
pub fn solve_regularized_normal(
    d: &DenseMatrix,
    rho: f64,
    rhs: &DenseVector,
    cache: Option<&CholeskyFactor>,
) -> Result<DenseVector> {
    check_rho(rho)?;
    check_len("solve_regularized_normal", d.cols, rhs.len())?;
    if d.rows < d.cols {
        match cache {
            Some(f) => woodbury_apply(d, rho, rhs, f),
            None => woodbury_apply(d, rho, rhs, &factor_row_space(d, rho)?),
        }
    } else {
        let mut m = d.gram_cols();
        m.add_diagonal(rho);
        cholesky(&m)?.solve(rhs)
    }
}

#[derive(Debug, Clone)]
enum NormalFactor {
    /// Factor of `DDᵀ/ρ + I`.
    RowSpace(CholeskyFactor),
    /// Factor of `DᵀD + ρI`.
    Direct(CholeskyFactor),
}

/// A cached solver for `(DᵀD + ρI)·v = rhs` with fixed `D` and `ρ`.
///
/// The factorization is computed once in [`RegularizedNormalSolver::new`];
/// every later solve is a pair of triangular substitutions plus (on the
/// Woodbury path) two products with `D`.
#[derive(Debug, Clone)]
pub struct RegularizedNormalSolver {
    rho: f64,
    rows: usize,
    cols: usize,
    factor: NormalFactor,
}

impl RegularizedNormalSolver {
    pub fn new(d: &DenseMatrix, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let factor = if d.rows < d.cols {
            NormalFactor::RowSpace(factor_row_space(d, rho)?)
        } else {
            let mut m = d.gram_cols();
            m.add_diagonal(rho);
            NormalFactor::Direct(cholesky(&m)?)
        };
        Ok(Self {
            rho,
            rows: d.rows,
            cols: d.cols,
            factor,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn uses_row_space(&self) -> bool {
        matches!(self.factor, NormalFactor::RowSpace(_))
    }

    /// `d` must be the matrix this solver was built from.
    pub fn solve(&self, d: &DenseMatrix, rhs: &DenseVector) -> Result<DenseVector> {
        check_len("RegularizedNormalSolver::solve (rows)", self.rows, d.rows)?;
        check_len("RegularizedNormalSolver::solve (cols)", self.cols, d.cols)?;
        check_len("RegularizedNormalSolver::solve", self.cols, rhs.len())?;
        match &self.factor {
            NormalFactor::RowSpace(f) => woodbury_apply(d, self.rho, rhs, f),
            NormalFactor::Direct(f) => f.solve(rhs),
        }
    }
}

/// Scales every column to unit Euclidean norm.
pub fn normalize_columns(m: &DenseMatrix) -> Result<DenseMatrix> {
    let mut norms = vec![0.0; m.cols];
    for i in 0..m.rows {
        for (n, v) in norms.iter_mut().zip(m.row(i)) {
            *n += v * v;
        }
    }
    if let Some(col) = norms.iter().position(|&n| n == 0.0) {
        return Err(LinalgError::ZeroColumn { col });
    }
    let inv: Vec<f64> = norms.iter().map(|n| 1.0 / n.sqrt()).collect();
    let mut out = m.clone();
    for i in 0..m.rows {
        for (v, s) in out.data[i * m.cols..(i + 1) * m.cols].iter_mut().zip(&inv) {
            *v *= s;
        }
    }
    Ok(out)
}

/// A coupling operator in `Ax + By = c`: either an explicit matrix or a
/// scaled identity, which is what the lasso splitting needs and is much
/// cheaper to apply.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    Dense(DenseMatrix),
    ScaledIdentity { dim: usize, scale: f64 },
}

impl LinearOperator {
    pub fn identity(dim: usize) -> Self {
        LinearOperator::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearOperator::Dense(m) => m.rows,
            LinearOperator::ScaledIdentity { dim, .. } => *dim,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearOperator::Dense(m) => m.cols,
            LinearOperator::ScaledIdentity { dim, .. } => *dim,
        }
    }

    pub fn apply(&self, v: &DenseVector) -> Result<DenseVector> {
        match self {
            LinearOperator::Dense(m) => m.matvec(v),
            LinearOperator::ScaledIdentity { dim, scale } => {
                check_len("LinearOperator::apply", *dim, v.len())?;
                Ok(if *scale == 1.0 { v.clone() } else { v.scaled(*scale) })
            }
        }
    }

    pub fn apply_transpose(&self, v: &DenseVector) -> Result<DenseVector> {
        match self {
            LinearOperator::Dense(m) => m.matvec_transpose(v),
            LinearOperator::ScaledIdentity { .. } => self.apply(v),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LinearOperator::Dense(m) => m.clone(),
            LinearOperator::ScaledIdentity { dim, scale } => DenseMatrix::identity(*dim).scaled(*scale),
        }
    }
}

impl From<DenseMatrix> for LinearOperator {
    fn from(m: DenseMatrix) -> Self {
        LinearOperator::Dense(m)
    }
}
