//! Sampled convolution kernels and their padded transforms.

use num_complex::Complex64;

use super::fft::PaddedFft;
use super::FractionalOrder;
use crate::error::{Error, Result};
use crate::field::{DensityField, Grid};
use crate::kernel_model::{riesz_constant, PotentialParams};
use crate::special::lattice_zeta;

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 8;
const GL_SPLIT: usize = 4;

/// Average of `f` over the cell centered at `c` with side `h`, by tensor
/// Gauss–Legendre on `GL_SPLIT^d` subcells.
fn cell_average(dim: usize, c: [f64; 2], h: f64, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> [f64; 2] {
    let (x, w) = gauss_legendre(GL_ORDER);
    let sub = h / GL_SPLIT as f64;
    let mut pts = Vec::with_capacity(GL_SPLIT * GL_ORDER);
    for s in 0..GL_SPLIT {
        let mid = -h / 2.0 + (s as f64 + 0.5) * sub;
        for q in 0..GL_ORDER {
            pts.push((mid + 0.5 * sub * x[q], 0.5 * w[q] / GL_SPLIT as f64));
        }
    }
    let mut acc = [0.0, 0.0];
    if dim == 1 {
        for &(dx, wx) in &pts {
            let v = f([c[0] + dx, 0.0]);
            acc[0] += wx * v[0];
        }
    } else {
        for &(dx, wx) in &pts {
            for &(dy, wy) in &pts {
                let v = f([c[0] + dx, c[1] + dy]);
                acc[0] += wx * wy * v[0];
                acc[1] += wx * wy * v[1];
            }
        }
    }
    acc
}

/// Lays out `sample(offset)` for all offsets in `(−N, N)^d` at their
/// periodic positions in the padded box.
fn padded_kernel(grid: &Grid, sample: impl Fn(isize, isize) -> Complex64) -> Vec<Complex64> {
    let n = grid.cells_per_axis() as isize;
    let p = 2 * n;
    let dim = grid.n_dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); (p as usize).pow(dim as u32)];
    for di in -(n - 1)..n {
        let r = di.rem_euclid(p) as usize;
        if dim == 1 {
            buf[r] = sample(di, 0);
            continue;
        }
        for dj in -(n - 1)..n {
            let c = dj.rem_euclid(p) as usize;
            buf[r * p as usize + c] = sample(di, dj);
        }
    }
    buf
}

/// Cached transform of the interaction-gradient kernel `∇U` for one
/// `(grid, params, ε)`.
#[derive(Debug, Clone)]
pub struct KernelCache {
    grid: Grid,
    params: PotentialParams,
    epsilon: f64,
    fft: PaddedFft,
    spectrum: Vec<Complex64>,
}

/// `∇U(x) = x(|x|^{A−2} − λ|x|^{B−2})` with `|x|² → |x|² + ε²`.
pub fn grad_potential(params: &PotentialParams, x: [f64; 2], epsilon: f64) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1] + epsilon * epsilon;
    let mut f = r2.powf((params.a - 2.0) / 2.0);
    if params.has_repulsion() {
        f -= params.lambda * r2.powf((params.b - 2.0) / 2.0);
    }
    [x[0] * f, x[1] * f]
}

impl KernelCache {
    /// Default mollification radius `h/2`.
    pub fn default_epsilon(grid: &Grid) -> f64 {
        grid.spacing() / 2.0
    }

    pub fn new(grid: Grid, params: PotentialParams, epsilon: f64) -> Result<Self> {
        params.validate()?;
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Domain(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let dim = grid.n_dim();
        let h = grid.spacing();
        let w = grid.cell_volume();
        // |∇U| ~ r^{E−1} is locally integrable in d dimensions iff E − 1 > −d.
        let df = dim as f64;
        let integrable = params.a - 1.0 > -df && (!params.has_repulsion() || params.b - 1.0 > -df);
        let smooth = |x: [f64; 2]| grad_potential(&params, x, 0.0);
        let sample = |di: isize, dj: isize| {
            let x = [di as f64 * h, dj as f64 * h];
            let g = if di == 0 && dj == 0 {
                [0.0, 0.0]
            } else if di.abs() <= 1 && dj.abs() <= 1 {
                if integrable {
                    cell_average(dim, x, h, &smooth)
                } else {
                    grad_potential(&params, x, epsilon)
                }
            } else {
                smooth(x)
            };
            Complex64::new(g[0] * w, g[1] * w)
        };
        let fft = PaddedFft::new(&grid);
        let spectrum = fft.forward_padded(padded_kernel(&grid, sample));
        Ok(Self { grid, params, epsilon, fft, spectrum })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn fft(&self) -> &PaddedFft {
        &self.fft
    }

    /// True when this cache was built for exactly these inputs.
    pub fn matches(&self, grid: &Grid, params: &PotentialParams, epsilon: f64) -> bool {
        self.grid == *grid && self.params == *params && self.epsilon == epsilon
    }

    /// Cell-centered `∇(U∗ρ)` as `(∂₁, ∂₂)` arrays; `∂₂` is all zero in 1D.
    pub fn gradient(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut spec = self.fft.forward_physical(values);
        for (s, k) in spec.iter_mut().zip(&self.spectrum) {
            *s *= k;
        }
        let out = self.fft.inverse_physical(spec);
        out.into_iter().map(|c| (c.re, c.im)).unzip()
    }
}

/// `∇(U∗ρ)` at the cell centers for a field on the cache's grid.
pub fn interaction_gradient(field: &DensityField, cache: &KernelCache) -> Result<(Vec<f64>, Vec<f64>)> {
    if field.grid() != cache.grid() {
        return Err(Error::Domain("field and kernel cache live on different grids".into()));
    }
    Ok(cache.gradient(field.values()))
}

/// Cached transform of the Riesz kernel `C(d,s)|x|^{−(d−2s)}`.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Grid,
    fft: PaddedFft,
    spectrum: Vec<Complex64>,
}

impl RieszKernel {
    /// The origin cell carries the lattice-zeta weight `−Z(β) h^{−β}` that
    /// makes the punctured lattice sum a consistent quadrature of the
    /// singular integral.
    pub fn new(grid: Grid, s: FractionalOrder) -> Result<Self> {
        let dim = grid.n_dim();
        let beta = dim as f64 - 2.0 * s.value();
        if beta <= 0.0 {
            return Err(Error::Domain(format!(
                "Riesz potential needs n − 2s > 0 (n = {dim}, s = {})",
                s.value()
            )));
        }
        let c = riesz_constant(dim, s.value());
        let h = grid.spacing();
        let w = grid.cell_volume();
        let origin = -lattice_zeta(dim, beta) * h.powf(-beta);
        let sample = |di: isize, dj: isize| {
            let k = if di == 0 && dj == 0 {
                origin
            } else {
                (((di * di + dj * dj) as f64).sqrt() * h).powf(-beta)
            };
            Complex64::new(c * k * w, 0.0)
        };
        let fft = PaddedFft::new(&grid);
        let spectrum = fft.forward_padded(padded_kernel(&grid, sample));
        Ok(Self { grid, fft, spectrum })
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.fft.forward_physical(values);
        for (v, k) in spec.iter_mut().zip(&self.spectrum) {
            *v *= k;
        }
        self.fft.inverse_physical(spec).into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Free-space `(−Δ)^{−s} ρ = K_s ∗ ρ` at the cell centers.
pub fn riesz_potential(field: &DensityField, s: FractionalOrder) -> Result<Vec<f64>> {
    Ok(RieszKernel::new(*field.grid(), s)?.apply(field.values()))
}
