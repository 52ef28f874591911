//! Dense row-major matrices and a left-looking Cholesky factorization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer has the wrong length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols.max(1), k % cols.max(1))).collect();
        Self { rows, cols, data }
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).fold(T::zero(), |a, b| a + b)
    }

    /// Copy with `shift` added to the diagonal.
    pub fn with_diagonal_shift(&self, shift: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = m.get(i, i);
            m.set(i, i, v + shift);
        }
        m
    }

    pub fn mat_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b).sqrt()
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v.to_f64_lossy()).collect() }
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`, plus the diagonal jitter
/// that had to be added to `A` for the factorization to succeed.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
    jitter: T,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive definite matrix; only the lower triangle
    /// is read. Fails with [`Error::IllConditionedGram`] on a nonpositive pivot.
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        match factor_lower(a) {
            Some(l) => Ok(Self { l, jitter: T::zero() }),
            None => Err(Error::IllConditionedGram { condition: condition_estimate(a) }),
        }
    }

    /// Factors `a`, retrying with diagonal jitter `1e-10 · trace / n`
    /// escalated tenfold up to `1e-6 · trace / n`.
    pub fn factor_with_jitter(a: &Matrix<T>) -> Result<Self> {
        if let Some(l) = factor_lower(a) {
            return Ok(Self { l, jitter: T::zero() });
        }
        let n = a.rows().max(1);
        let scale = (a.trace() / T::lit(n as f64)).abs().max(T::min_positive_value());
        for exponent in [-10, -9, -8, -7, -6] {
            let jitter = scale * T::lit(10f64.powi(exponent));
            if let Some(l) = factor_lower(&a.with_diagonal_shift(jitter)) {
                return Ok(Self { l, jitter });
            }
        }
        Err(Error::IllConditionedGram { condition: condition_estimate(a) })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.l
    }

    /// Diagonal jitter added before factorization succeeded (zero if none).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let row = self.l.row(i);
            y[i] = (b[i] - dot(&row[..i], &y[..i])) / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            x[i] = x[i] / self.l.get(i, i);
            let xi = x[i];
            let row = self.l.row(i);
            for k in 0..i {
                x[k] = x[k] - row[k] * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.backward(&self.forward(b))
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.dim()).map(|i| self.l.get(i, i).ln()).fold(T::zero(), |a, b| a + b) * two
    }

    /// `Tr(A⁻¹) = ‖L⁻¹‖_F²`, computed column by column of `L⁻¹`.
    pub fn inverse_trace(&self) -> T {
        let n = self.dim();
        let columns: Vec<T> = (0..n)
            .into_par_iter()
            .map(|j| {
                // Column j of L⁻¹ is zero above row j.
                let mut z = vec![T::zero(); n];
                z[j] = T::one() / self.l.get(j, j);
                for i in j + 1..n {
                    let row = self.l.row(i);
                    z[i] = -dot(&row[j..i], &z[j..i]) / row[i];
                }
                z[j..].iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b)
            })
            .collect();
        columns.into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// `L Lᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.l.row(i)[..k], &self.l.row(j)[..k])
        })
    }
}

/// Left-looking factorization; `None` on a nonpositive or non-finite pivot.
///
/// For column `j`, `L_ij = (A_ij - L_i,:j · L_j,:j) / L_jj` for all `i > j`
/// at once. Each entry is a single `dot`, so the result does not depend on
/// how rows are split between threads.
fn factor_lower<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    assert!(a.is_square(), "Cholesky needs a square matrix");
    let n = a.rows();
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let (head, tail) = l.split_at_mut((j + 1) * n);
        let row_j = &mut head[j * n..];
        let pivot = a.get(j, j) - dot(&row_j[..j], &row_j[..j]);
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return None;
        }
        let ljj = pivot.sqrt();
        row_j[j] = ljj;
        let row_j: &[T] = &head[j * n..j * n + j];
        tail.par_chunks_mut(n).enumerate().for_each(|(offset, row_i)| {
            let i = j + 1 + offset;
            row_i[j] = (a.get(i, j) - dot(&row_i[..j], row_j)) / ljj;
        });
    }
    Some(Matrix::from_row_major(n, n, l))
}

/// Cheap condition proxy `max diag / min diag` for error messages.
fn condition_estimate<T: Scalar>(a: &Matrix<T>) -> f64 {
    let diag: Vec<f64> = (0..a.rows()).map(|i| a.get(i, i).to_f64_lossy()).collect();
    let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| if i == j { n as f64 + 1.0 } else { 1.0 / (1.0 + (i + j) as f64) })
    }

    #[test]
    fn factor_reconstructs() {
        let a = spd(7);
        let c = Cholesky::factor(&a).unwrap();
        let r = c.reconstruct();
        for i in 0..7 {
            for j in 0..7 {
                assert!((r.get(i, j) - a.get(i, j)).abs() < 1e-12);
            }
        }
        assert_eq!(c.jitter(), 0.0);
    }

    #[test]
    fn solve_and_log_det() {
        let a = Matrix::from_row_major(2, 2, vec![4.0, 2.0, 2.0, 3.0]);
        let c = Cholesky::factor(&a).unwrap();
        let x: Vec<f64> = c.solve(&[2.0, 1.0]);
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!((c.log_det() - 8f64.ln()).abs() < 1e-14);
        assert!((c.inverse_trace() - 7.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_needs_jitter() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(Cholesky::factor(&a).is_err());
        let c = Cholesky::factor_with_jitter(&a).unwrap();
        assert!(c.jitter() > 0.0 && c.jitter() <= 1e-6);
    }

    #[test]
    fn indefinite_matrix_fails_after_max_jitter() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(Cholesky::factor_with_jitter(&a), Err(Error::IllConditionedGram { .. })));
    }

    #[test]
    fn single_precision_factor() {
        let a = spd(5).to_f64();
        let a32 = Matrix::from_fn(5, 5, |i, j| a.get(i, j) as f32);
        let c = Cholesky::factor(&a32).unwrap();
        let x = c.solve(&[1.0; 5]);
        let r = a32.mat_vec(&x);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-5));
    }
}
