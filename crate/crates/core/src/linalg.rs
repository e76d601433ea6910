//! Small complex-vector helpers and the Hermitian operator abstraction.

use nalgebra::DMatrix;

use crate::Complex64;

/// Bilinear product Σ a_i b_i (no conjugation).
pub fn dotu(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sesquilinear product Σ conj(a_i) b_i.
pub fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// Linear operator promised to be Hermitian positive semidefinite.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;

    /// out = A·x. `out` has length `dim()`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);

    /// xᴴ A x.
    fn quad_form(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        dotc(x, &y).re
    }
}

/// Dense matrix wrapped as an operator.
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<Complex64>);

impl HermitianOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }
}

/// Materialise an operator as a dense matrix (column by column).
pub fn to_dense<O: HermitianOperator + ?Sized>(op: &O) -> DMatrix<Complex64> {
    let n = op.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for i in 0..n {
            out[(i, j)] = col[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    out
}
