//! Dense row-major matrices: a plain one for results and a shared one for
//! lock-free parallel training.

use std::sync::atomic::{AtomicU64, Ordering};

/// Row-major `rows x dim` matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Matrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Matrix shared across training workers.
///
/// Elements are f64 bits in relaxed atomics: concurrent read-modify-write
/// updates may lose each other (hogwild-style, tolerated by contract) but
/// are never undefined behavior. With a single worker updates are exact and
/// runs are bit-reproducible.
pub(crate) struct SharedMatrix {
    rows: usize,
    dim: usize,
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub fn from_matrix(m: &Matrix) -> Self {
        SharedMatrix {
            rows: m.rows,
            dim: m.dim,
            data: m.data.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|v| f64::from_bits(v.load(Ordering::Relaxed)))
                .collect(),
        }
    }

    #[inline]
    fn get(&self, idx: usize) -> f64 {
        f64::from_bits(self.data[idx].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, idx: usize, v: f64) {
        self.data[idx].store(v.to_bits(), Ordering::Relaxed);
    }

    /// buf += row(r)
    pub fn add_row_into(&self, r: usize, buf: &mut [f64]) {
        let base = r * self.dim;
        for (c, slot) in buf.iter_mut().enumerate() {
            *slot += self.get(base + c);
        }
    }

    /// row(r) += scale * v
    pub fn add_scaled_row(&self, r: usize, scale: f64, v: &[f64]) {
        let base = r * self.dim;
        for (c, vc) in v.iter().enumerate() {
            self.set(base + c, self.get(base + c) + scale * vc);
        }
    }

    /// For each component: err += a * row(r), then row(r) += update * h.
    /// Reads the pre-update row value into `err`, matching the reference
    /// word2vec update order.
    pub fn accumulate_and_update(&self, r: usize, a: f64, update: f64, h: &[f64], err: &mut [f64]) {
        let base = r * self.dim;
        for c in 0..self.dim {
            let u = self.get(base + c);
            err[c] += a * u;
            self.set(base + c, u + update * h[c]);
        }
    }
}

/// Read-only row access shared by [`Matrix`] and [`SharedMatrix`] so the
/// gradient math has a single implementation for both.
pub(crate) trait RowRead {
    fn dot(&self, r: usize, v: &[f64]) -> f64;
}

impl RowRead for Matrix {
    #[inline]
    fn dot(&self, r: usize, v: &[f64]) -> f64 {
        self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

impl RowRead for SharedMatrix {
    #[inline]
    fn dot(&self, r: usize, v: &[f64]) -> f64 {
        let base = r * self.dim;
        v.iter()
            .enumerate()
            .map(|(c, b)| self.get(base + c) * b)
            .sum()
    }
}
