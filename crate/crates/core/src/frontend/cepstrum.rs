use alloc::vec::Vec;
use core::f64::consts::PI;

/// Orthonormal DCT-II of a fixed length, stored as a dense basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dct {
    n: usize,
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        let mut basis = Vec::with_capacity(n * n);
        for j in 0..n {
            let scale = if j == 0 { libm::sqrt(1.0 / n as f64) } else { libm::sqrt(2.0 / n as f64) };
            for k in 0..n {
                basis.push(scale * libm::cos(PI * j as f64 * (k as f64 + 0.5) / n as f64));
            }
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.basis
            .chunks_exact(self.n)
            .map(|b| b.iter().zip(x).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// DCT-III, the transpose of the orthonormal forward basis.
    pub fn inverse(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n);
        (0..self.n)
            .map(|k| c.iter().enumerate().map(|(j, cj)| cj * self.basis[j * self.n + k]).sum())
            .collect()
    }
}
