//! Dense symmetric positive definite solves for the condensed QP.

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = self.data[i * self.n + j] + v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }
}

/// Solves `A[idx, idx] · x = b` for the principal submatrix selected by `idx` via
/// Cholesky. Returns `None` if the submatrix is not numerically positive definite.
pub fn cholesky_solve_sub<T: Real>(a: &DenseMatrix<T>, idx: &[usize], b: &[T]) -> Option<Vec<T>> {
    let m = idx.len();
    let mut l = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a.get(idx[i], idx[j]);
            for k in 0..j {
                sum = sum - l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                l[i * m + i] = sum.sqrt();
            } else {
                l[i * m + j] = sum / l[j * m + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            y[i] = y[i] - l[i * m + k] * y[k];
        }
        y[i] = y[i] / l[i * m + i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            y[i] = y[i] - l[k * m + i] * y[k];
        }
        y[i] = y[i] / l[i * m + i];
    }
    Some(y)
}
