//! Spectral fractional Laplacian on the zero-padded box and the
//! Stroock–Varopoulos gap.

use num_complex::Complex64;

use super::fft::PaddedFft;
use super::kernels::RieszKernel;
use super::FractionalOrder;
use crate::error::{Error, Result};
use crate::field::{DensityField, Grid};
use crate::special::neumaier_sum;

/// `|ξ|^alpha` per spectral entry, zero at `ξ = 0`.
pub fn padded_multiplier(fft: &PaddedFft, alpha: f64) -> Vec<f64> {
    fft.wavenumber_sq()
        .into_iter()
        .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(alpha / 2.0) })
        .collect()
}

fn apply_physical(fft: &PaddedFft, values: &[f64], alpha: f64) -> Vec<f64> {
    let mut spec = fft.forward_physical(values);
    for (c, m) in spec.iter_mut().zip(padded_multiplier(fft, alpha)) {
        *c *= m;
    }
    fft.inverse_physical(spec).into_iter().map(|c| c.re).collect()
}

/// `(−Δ)^s v` on the physical cells, with `v` extended by zero to the
/// padded box.
pub fn fractional_laplacian(field: &DensityField, s: FractionalOrder) -> Vec<f64> {
    apply_physical(&PaddedFft::new(field.grid()), field.values(), 2.0 * s.value())
}

/// `(−Δ)^s` applied to a full padded-box array (`P^d` values, natural
/// order). Accepts `0 < s ≤ 1` so the local endpoint can be checked.
pub fn fractional_laplacian_padded(grid: &Grid, values: &[f64], s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("order must lie in (0, 1], got {s}")));
    }
    let fft = PaddedFft::new(grid);
    if values.len() != fft.padded_len() {
        return Err(Error::Data(format!(
            "expected {} padded values, got {}",
            fft.padded_len(),
            values.len()
        )));
    }
    let mut spec = fft.forward_padded(values.iter().map(|&v| Complex64::new(v, 0.0)).collect());
    for (c, m) in spec.iter_mut().zip(padded_multiplier(&fft, 2.0 * s)) {
        *c *= m;
    }
    Ok(fft.inverse_padded(spec).into_iter().map(|c| c.re).collect())
}

/// How far `I_{2s}((−Δ)^s u)` is from `u` on the cells where
/// `u > 10⁻³ max u`, relative to `max u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionError {
    pub raw: f64,
    /// After subtracting the mean deviation. Truncating the slowly decaying
    /// Riesz tail to a finite box shifts the composition by a nearly
    /// constant amount that grows with `s`; this column excludes it.
    pub offset_removed: f64,
    pub offset: f64,
}

pub fn riesz_composition_error(field: &DensityField, s: FractionalOrder) -> Result<CompositionError> {
    let u = field.values();
    let umax = field.max();
    if !(umax > 0.0) {
        return Err(Error::Domain("composition check needs a nonzero field".into()));
    }
    let back = RieszKernel::new(*field.grid(), s)?.apply(&fractional_laplacian(field, s));
    let region: Vec<usize> = (0..u.len()).filter(|&i| u[i] > 1e-3 * umax).collect();
    let offset = region.iter().map(|&i| back[i] - u[i]).sum::<f64>() / region.len() as f64;
    let worst = |shift: f64| region.iter().map(|&i| (back[i] - u[i] - shift).abs()).fold(0.0, f64::max) / umax;
    Ok(CompositionError { raw: worst(0.0), offset_removed: worst(offset), offset: offset / umax })
}

fn energy_with(fft: &PaddedFft, grid: &Grid, w: &[f64], sigma: f64) -> f64 {
    let spec = fft.forward_physical(w);
    let mult = padded_multiplier(fft, 4.0 * sigma);
    let sum = neumaier_sum(spec.iter().zip(&mult).map(|(c, m)| m * c.norm_sqr()));
    sum / fft.padded_len() as f64 * grid.cell_volume()
}

/// `∫|(−Δ)^σ w|²` over the padded box, by Plancherel.
pub fn fractional_energy(grid: &Grid, w: &[f64], sigma: f64) -> f64 {
    energy_with(&PaddedFft::new(grid), grid, w, sigma)
}

/// Both sides of the Stroock–Varopoulos inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvSides {
    /// `∫ v^{γ−1} (−Δ)^{α/2} v`
    pub lhs: f64,
    /// `4(γ−1)/γ² ∫|(−Δ)^{α/4} v^{γ/2}|²`
    pub rhs: f64,
    /// `∫ v^γ`, the natural scale of both sides.
    pub scale: f64,
}

pub fn sv_sides(field: &DensityField, gamma: f64, alpha: f64) -> Result<SvSides> {
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    let grid = field.grid();
    let fft = PaddedFft::new(grid);
    let v = field.values();
    let lap = apply_physical(&fft, v, alpha);
    let lhs = neumaier_sum(v.iter().zip(&lap).map(|(&v, l)| v.powf(gamma - 1.0) * l)) * grid.cell_volume();
    let w: Vec<f64> = v.iter().map(|&v| v.powf(gamma / 2.0)).collect();
    let rhs = 4.0 * (gamma - 1.0) / (gamma * gamma) * energy_with(&fft, grid, &w, alpha / 4.0);
    let scale = neumaier_sum(v.iter().map(|&v| v.powf(gamma))) * grid.cell_volume();
    Ok(SvSides { lhs, rhs, scale })
}

/// LHS − RHS of the Stroock–Varopoulos inequality; nonnegative in the
/// continuum.
pub fn sv_gap(field: &DensityField, gamma: f64, alpha: f64) -> Result<f64> {
    let s = sv_sides(field, gamma, alpha)?;
    Ok(s.lhs - s.rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{init_profile, ProfileKind};
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::square(32, 1.0).unwrap()
    }

    fn bump() -> DensityField {
        init_profile(&ProfileKind::Bump { radius: 0.6 }, grid(), 1.0).unwrap().field
    }

    fn plane_wave(grid: &Grid, k: usize) -> (Vec<f64>, f64) {
        let fft = PaddedFft::new(grid);
        let p = fft.padded_axis();
        let xi = fft.wavenumber(k);
        let h = grid.spacing();
        let v = (0..p * p).map(|idx| (xi * (idx / p) as f64 * h).cos()).collect();
        (v, xi)
    }

    #[test]
    fn constant_is_annihilated_on_the_padded_box() {
        let g = grid();
        let p = 2 * g.cells_per_axis();
        let out = fractional_laplacian_padded(&g, &vec![3.0; p * p], 0.4).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let g = grid();
        for (s, k) in [(0.5, 3), (0.3, 7), (1.0, 5)] {
            let (v, xi) = plane_wave(&g, k);
            let out = fractional_laplacian_padded(&g, &v, s).unwrap();
            let lam = xi.abs().powf(2.0 * s);
            for (o, v) in out.iter().zip(&v) {
                assert!((o - lam * v).abs() <= 1e-10 * lam, "s = {s}");
            }
        }
        assert!(fractional_laplacian_padded(&g, &[0.0; 4], 0.5).is_err());
    }

    #[test]
    fn semigroup_on_the_padded_box() {
        let g = grid();
        let p = 2 * g.cells_per_axis();
        let v: Vec<f64> = (0..p * p).map(|i| ((i * 37 % 101) as f64 / 101.0).powi(2)).collect();
        let twice = fractional_laplacian_padded(&g, &fractional_laplacian_padded(&g, &v, 0.3).unwrap(), 0.45).unwrap();
        let once = fractional_laplacian_padded(&g, &v, 0.75).unwrap();
        let scale = once.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in twice.iter().zip(&once) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn self_adjoint_on_physical_fields() {
        let g = grid();
        let u = bump();
        let w = init_profile(&ProfileKind::UniformRandom { radius: 0.8, seed: 3 }, g, 1.0).unwrap().field;
        let s = FractionalOrder::new(0.35).unwrap();
        let dot = |a: &[f64], b: &[f64]| neumaier_sum(a.iter().zip(b).map(|(x, y)| x * y));
        let lu = fractional_laplacian(&u, s);
        let lw = fractional_laplacian(&w, s);
        let (a, b) = (dot(&lu, w.values()), dot(u.values(), &lw));
        assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
    }

    #[test]
    fn sv_gap_vanishes_on_constants_and_at_gamma_two() {
        let c = DensityField::constant(grid(), 1.0).unwrap();
        // a constant on the physical box is not constant on the padded box;
        // both sides agree only up to the inequality itself
        assert!(sv_gap(&c, 3.0, 1.0).unwrap() >= 0.0);
        let zero = DensityField::zeros(grid());
        assert_eq!(sv_gap(&zero, 3.0, 1.0).unwrap(), 0.0);
        let b = bump();
        let s = sv_sides(&b, 2.0, 1.3).unwrap();
        assert!((s.lhs - s.rhs).abs() <= 1e-10 * s.lhs.abs());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sv_gap_is_nonnegative(seed in any::<u64>(), gamma in 2.01..5.0f64, alpha in 0.1..1.9f64) {
            let f = init_profile(&ProfileKind::UniformRandom { radius: 0.9, seed }, Grid::square(16, 1.0).unwrap(), 1.0).unwrap().field;
            let s = sv_sides(&f, gamma, alpha).unwrap();
            prop_assert!(s.lhs - s.rhs >= -1e-10 * s.scale, "{:?}", s);
        }
    }
}
