//! FFTs on the zero-padded box `[−2L, 2L)^d` with `P = 2N` points per axis.
//!
//! Two-dimensional spectra are kept in transposed order (second frequency
//! index slowest). Every multiplier used here depends on `|ξ|` only or is
//! itself produced by [`PaddedFft::forward_padded`], so the layout never
//! leaks into results.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::Grid;

#[derive(Clone)]
pub struct PaddedFft {
    dim: usize,
    n: usize,
    p: usize,
    h: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedFft").field("dim", &self.dim).field("p", &self.p).finish()
    }
}

fn transpose(buf: &mut [Complex64], p: usize) {
    const B: usize = 16;
    for bi in (0..p).step_by(B) {
        for bj in (bi..p).step_by(B) {
            for i in bi..(bi + B).min(p) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + B).min(p) {
                    buf.swap(i * p + j, j * p + i);
                }
            }
        }
    }
}

impl PaddedFft {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.cells_per_axis();
        let p = 2 * n;
        let mut planner = FftPlanner::new();
        Self {
            dim: grid.n_dim(),
            n,
            p,
            h: grid.spacing(),
            fwd: planner.plan_fft_forward(p),
            inv: planner.plan_fft_inverse(p),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis of the padded box.
    pub fn padded_axis(&self) -> usize {
        self.p
    }

    /// Total number of padded points, `P^d`.
    pub fn padded_len(&self) -> usize {
        self.p.pow(self.dim as u32)
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, rows: &mut [Complex64]) {
        if !rows.is_empty() {
            plan.process(rows);
        }
    }

    /// Transform of physical values embedded in the padded box at indices
    /// `0..N` along every axis.
    pub fn forward_physical(&self, values: &[f64]) -> Vec<Complex64> {
        let (n, p) = (self.n, self.p);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.padded_len()];
        if self.dim == 1 {
            for (b, &v) in buf.iter_mut().zip(values) {
                b.re = v;
            }
            self.run(&self.fwd, &mut buf);
            return buf;
        }
        for i in 0..n {
            for j in 0..n {
                buf[i * p + j].re = values[i * n + j];
            }
        }
        self.run(&self.fwd, &mut buf[..n * p]);
        transpose(&mut buf, p);
        self.run(&self.fwd, &mut buf);
        buf
    }

    /// Transform of a full padded array in natural (row-major) order.
    pub fn forward_padded(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        assert_eq!(buf.len(), self.padded_len());
        self.run(&self.fwd, &mut buf);
        if self.dim == 2 {
            transpose(&mut buf, self.p);
            self.run(&self.fwd, &mut buf);
        }
        buf
    }

    /// Normalized inverse transform restricted to the physical cells.
    pub fn inverse_physical(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        let (n, p) = (self.n, self.p);
        let scale = 1.0 / self.padded_len() as f64;
        self.run(&self.inv, &mut spec);
        if self.dim == 1 {
            spec.truncate(n);
            spec.iter_mut().for_each(|c| *c *= scale);
            return spec;
        }
        transpose(&mut spec, p);
        self.run(&self.inv, &mut spec[..n * p]);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.extend(spec[i * p..i * p + n].iter().map(|c| c * scale));
        }
        out
    }

    /// Normalized inverse transform of the whole padded box, natural order.
    pub fn inverse_padded(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        let scale = 1.0 / self.padded_len() as f64;
        self.run(&self.inv, &mut spec);
        if self.dim == 2 {
            transpose(&mut spec, self.p);
            self.run(&self.inv, &mut spec);
        }
        spec.iter_mut().for_each(|c| *c *= scale);
        spec
    }

    /// Angular wavenumber of FFT index `k` on the padded box of length `P·h`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let signed = if k <= self.p / 2 { k as f64 } else { k as f64 - self.p as f64 };
        2.0 * PI * signed / (self.p as f64 * self.h)
    }

    /// `|ξ|²` for every spectral entry.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        let k2: Vec<f64> = (0..self.p).map(|k| self.wavenumber(k).powi(2)).collect();
        match self.dim {
            1 => k2,
            _ => {
                let mut out = Vec::with_capacity(self.padded_len());
                for a in &k2 {
                    out.extend(k2.iter().map(|b| a + b));
                }
                out
            }
        }
    }
}
