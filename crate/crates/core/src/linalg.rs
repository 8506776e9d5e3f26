//! Dense Cholesky factorization for small symmetric positive-definite
//! matrices (row-major `n x n`).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub(crate) fn factor(a: &[f64], n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut lower = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= lower[i * n + k] * lower[j * n + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    lower[i * n + i] = math::sqrt(sum);
                } else {
                    lower[i * n + j] = sum / lower[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, lower })
    }

    pub(crate) fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| math::ln(self.lower[i * self.n + i]))
            .sum::<f64>()
            * 2.0
    }

    /// `(x - mean)^T A^{-1} (x - mean)` via one forward substitution.
    pub(crate) fn mahalanobis(&self, x: &[f64], mean: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let n = self.n;
        scratch.clear();
        scratch.resize(n, 0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let mut sum = x[i] - mean[i];
            for (l, z) in row.iter().zip(scratch.iter()) {
                sum -= l * z;
            }
            let z = sum / self.lower[i * n + i];
            scratch[i] = z;
            acc += z * z;
        }
        acc
    }
}
