//! Degenerate diffusion and the dissipation integral.

use crate::error::{Error, Result};
use crate::field::{DensityField, Grid};
use crate::special::neumaier_sum;

/// Visits every interior face once as `(left, right)` flat indices.
pub(crate) fn for_each_face(grid: &Grid, mut f: impl FnMut(usize, usize)) {
    let n = grid.cells_per_axis();
    if grid.n_dim() == 1 {
        for i in 0..n - 1 {
            f(i, i + 1);
        }
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            if i + 1 < n {
                f(k, k + n);
            }
            if j + 1 < n {
                f(k, k + 1);
            }
        }
    }
}

/// Cell rates of `Δ(v^m)`: five-point (three-point in 1D) Laplacian in flux
/// form with zero flux through the box boundary.
pub fn diffusion_term(field: &DensityField, m: f64) -> Vec<f64> {
    let grid = field.grid();
    let h2 = grid.spacing().powi(2);
    let vm: Vec<f64> = field.values().iter().map(|&v| v.powf(m)).collect();
    let mut rate = vec![0.0; vm.len()];
    for_each_face(grid, |l, r| {
        let flux = (vm[r] - vm[l]) / h2;
        rate[l] += flux;
        rate[r] -= flux;
    });
    rate
}

/// Centered difference of `w` along an axis, one-sided at the box faces.
fn centered(w: &[f64], idx: usize, i: usize, stride: usize, n: usize, h: f64) -> f64 {
    if i == 0 {
        (w[idx + stride] - w[idx]) / h
    } else if i == n - 1 {
        (w[idx] - w[idx - stride]) / h
    } else {
        (w[idx + stride] - w[idx - stride]) / (2.0 * h)
    }
}

/// `∫|∇w|²` for cell values `w`.
pub fn dissipation_of(grid: &Grid, w: &[f64]) -> f64 {
    let n = grid.cells_per_axis();
    let h = grid.spacing();
    let terms = (0..w.len()).map(|idx| match grid.n_dim() {
        1 => centered(w, idx, idx, 1, n, h).powi(2),
        _ => {
            let gx = centered(w, idx, idx / n, n, n, h);
            let gy = centered(w, idx, idx % n, 1, n, h);
            gx * gx + gy * gy
        }
    });
    neumaier_sum(terms) * grid.cell_volume()
}

/// `∫|∇ v^{(m+p−1)/2}|²`.
pub fn dissipation_functional(field: &DensityField, m: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("dissipation needs p >= 1, got {p}")));
    }
    let e = (m + p - 1.0) / 2.0;
    let w: Vec<f64> = field.values().iter().map(|&v| v.powf(e)).collect();
    Ok(dissipation_of(field.grid(), &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{init_profile, ProfileKind};
    use std::f64::consts::PI;

    fn line(n: usize, l: f64, f: impl Fn(f64) -> f64) -> DensityField {
        let grid = Grid::new(1, n, l).unwrap();
        DensityField::from_fn(grid, |x| f(x[0])).unwrap()
    }

    #[test]
    fn constant_field_has_no_diffusion() {
        let f = DensityField::constant(Grid::square(16, 1.0).unwrap(), 2.0).unwrap();
        assert!(diffusion_term(&f, 2.0).iter().all(|&r| r == 0.0));
        assert_eq!(dissipation_functional(&f, 2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn heat_operator_is_second_order() {
        let l = 1.5;
        let err = |n: usize| {
            let f = line(n, l, |x| (PI * x / l).cos() + 1.0);
            let rate = diffusion_term(&f, 1.0);
            let grid = f.grid();
            (0..n)
                .map(|i| (rate[i] + (PI / l).powi(2) * (PI * grid.center(i) / l).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        assert!(err(128) < 1e-3);
    }

    #[test]
    fn porous_medium_rates_telescope() {
        let grid = Grid::square(64, 2.0).unwrap();
        let f = init_profile(&ProfileKind::Bump { radius: 0.8 }, grid, 3.0).unwrap().field;
        let rate = diffusion_term(&f, 2.0);
        let total = neumaier_sum(rate.iter().copied()) * grid.cell_volume();
        let scale = neumaier_sum(rate.iter().map(|r| r.abs())) * grid.cell_volume();
        assert!(total.abs() <= 1e-12 * scale, "{total} vs {scale}");
    }

    #[test]
    fn dissipation_converges_at_second_order() {
        let l = 1.0;
        let v = |x: f64| 1.0 + 0.5 * (PI * x / l).sin();
        let dv = |x: f64| 0.5 * PI / l * (PI * x / l).cos();
        // m + p − 1 = 2 integrates |v'|² = π²/(4L) exactly
        let exact_v = PI * PI / (4.0 * l);
        // m = p = 1 integrates |(√v)'|² = v'²/(4v); fine midpoint reference
        let fine = 200_000;
        let exact_sqrt = (0..fine)
            .map(|i| {
                let x = -l + (i as f64 + 0.5) * 2.0 * l / fine as f64;
                dv(x).powi(2) / (4.0 * v(x))
            })
            .sum::<f64>()
            * 2.0
            * l
            / fine as f64;
        for (p, exact) in [(2.0, exact_v), (1.0, exact_sqrt)] {
            let err = |n: usize| (dissipation_functional(&line(n, l, v), 1.0, p).unwrap() - exact).abs();
            let ratio = err(64) / err(128);
            assert!(ratio > 3.5, "p = {p}: ratio {ratio}");
        }
    }

    #[test]
    fn dissipation_is_homogeneous() {
        let grid = Grid::square(32, 1.0).unwrap();
        let f = init_profile(&ProfileKind::Gaussian { sigma: 0.2 }, grid, 1.0).unwrap().field;
        let (m, p, c) = (1.5, 3.0, 2.7f64);
        let scaled = DensityField::new(grid, f.values().iter().map(|v| c * v).collect()).unwrap();
        let a = dissipation_functional(&f, m, p).unwrap();
        let b = dissipation_functional(&scaled, m, p).unwrap();
        assert!((b / a - c.powf(m + p - 1.0)).abs() < 1e-12 * c.powf(m + p - 1.0));
        assert!(dissipation_functional(&f, m, 0.5).is_err());
    }
}
