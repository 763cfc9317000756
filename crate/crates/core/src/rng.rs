//! The single seeded random source.
//!
//! All randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`), a 64-bit
//! counter-based stream cipher generator, seeded through `seed_from_u64`. The
//! crate never reads system entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::gram_schmidt;
use crate::matrix::{ComplexMatrix, C64};

pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for retry number `attempt` of `seed`.
    pub fn derived(seed: u64, attempt: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        Self { inner: rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        let re = self.gaussian();
        let im = self.gaussian();
        C64::new(re, im)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// Orthonormalized complex Gaussian matrix.
    pub fn haar_unitary(&mut self, n: usize) -> ComplexMatrix {
        loop {
            let g = self.gaussian_matrix(n, n);
            let cols: Vec<Vec<C64>> = (0..n).map(|j| g.column(j)).collect();
            let q = gram_schmidt(&cols, 1e-8);
            if q.len() == n {
                return ComplexMatrix::from_columns(n, &q);
            }
        }
    }

    /// A point on the nonnegative part of the unit sphere in `R^n`.
    pub fn nonnegative_unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.gaussian().abs()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Random unit vector in `C^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..n).map(|_| self.complex_gaussian()).collect();
            let norm = crate::linalg::vector_norm(&v);
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}
