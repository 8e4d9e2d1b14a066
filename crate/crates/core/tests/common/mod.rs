#![allow(dead_code)]

use ppa_core::linalg::{cholesky, DenseMatrix, DenseVector, LinearOperator};
use ppa_core::problem::{ProxError, TwoBlockProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `min ½‖x − p‖² + ½‖y − q‖²  s.t.  Ax + By = c` with dense `A`, `B`.
pub struct QuadraticProblem {
    pub a: LinearOperator,
    pub b: LinearOperator,
    pub c: DenseVector,
    pub p: DenseVector,
    pub q: DenseVector,
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> DenseVector {
    DenseVector::from_vec((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

impl QuadraticProblem {
    pub fn random(seed: u64, l: usize, m: usize, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_matrix(&mut rng, l, m);
        let mut b = random_matrix(&mut rng, l, n);
        // keep both blocks comfortably full column rank
        for j in 0..m.min(l) {
            a.set(j, j, a.get(j, j) + 2.0);
        }
        for j in 0..n.min(l) {
            b.set(l - 1 - j, j, b.get(l - 1 - j, j) + 2.0);
        }
        Self {
            a: a.into(),
            b: b.into(),
            c: random_vector(&mut rng, l),
            p: random_vector(&mut rng, m),
            q: random_vector(&mut rng, n),
        }
    }

    /// `(x*, y*, μ)` with `x* = p + Aᵀμ`, `y* = q + Bᵀμ`.
    pub fn kkt_point(&self) -> (DenseVector, DenseVector, DenseVector) {
        let a = self.a.to_dense();
        let b = self.b.to_dense();
        let mut m = a.gram_rows();
        let bb = b.gram_rows();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m.set(i, j, m.get(i, j) + bb.get(i, j));
            }
        }
        let mut rhs = self.c.clone();
        rhs.axpy(-1.0, &a.matvec(&self.p).unwrap());
        rhs.axpy(-1.0, &b.matvec(&self.q).unwrap());
        let mu = cholesky(&m).unwrap().solve(&rhs).unwrap();
        let x = self.p.add(&a.matvec_transpose(&mu).unwrap());
        let y = self.q.add(&b.matvec_transpose(&mu).unwrap());
        (x, y, mu)
    }
}

fn quadratic_prox(
    op: &LinearOperator,
    center: &DenseVector,
    reference: &DenseVector,
    shift: &DenseVector,
    weight: f64,
) -> Result<DenseVector, ProxError> {
    if weight.is_nan() || weight <= 0.0 {
        return Err(ProxError::BadWeight(weight));
    }
    // (I + w·MᵀM) v = center + w·Mᵀ(M·reference + shift)
    let m = op.to_dense();
    let mut lhs = m.gram_cols().scaled(weight);
    lhs.add_diagonal(1.0);
    let mut t = m.matvec(reference)?;
    t.axpy(1.0, shift);
    let mut rhs = center.clone();
    rhs.axpy(weight, &m.matvec_transpose(&t)?);
    Ok(cholesky(&lhs)?.solve(&rhs)?)
}

impl TwoBlockProblem for QuadraticProblem {
    fn a(&self) -> &LinearOperator {
        &self.a
    }
    fn b(&self) -> &LinearOperator {
        &self.b
    }
    fn c(&self) -> &DenseVector {
        &self.c
    }
    fn prox_f(&self, x_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError> {
        quadratic_prox(&self.a, &self.p, x_ref, shift, weight)
    }
    fn prox_g(&self, y_ref: &DenseVector, shift: &DenseVector, weight: f64) -> Result<DenseVector, ProxError> {
        quadratic_prox(&self.b, &self.q, y_ref, shift, weight)
    }
    fn f_value(&self, x: &DenseVector) -> f64 {
        0.5 * x.sub(&self.p).norm_squared()
    }
    fn g_value(&self, y: &DenseVector) -> f64 {
        0.5 * y.sub(&self.q).norm_squared()
    }
}

pub fn max_abs_diff(a: &DenseVector, b: &DenseVector) -> f64 {
    a.sub(b).norm_inf()
}
