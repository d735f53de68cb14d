//! Inequality property suites behind `aggdiff verify`.

use std::time::Instant;

use aggdiff_core::estimates::{
    fractional_sobolev_constant, hls_constant_bound, hls_theta, sobolev_constant, sobolev_quotient_radial,
};
use aggdiff_core::operators::{riesz_composition_error, sv_sides, FractionalOrder};
use aggdiff_core::{init_profile, Grid, ProfileKind, Result};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub seconds: f64,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub suites: Vec<SuiteResult>,
}

fn timed(name: &'static str, suite: impl FnOnce() -> Result<(bool, Value)>) -> SuiteResult {
    let started = Instant::now();
    let (pass, detail) = suite().unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
    SuiteResult { name, pass, seconds: started.elapsed().as_secs_f64(), detail }
}

/// Stroock–Varopoulos gap on seeded random fields, relative to `∫v^γ`.
fn sv_sweep() -> Result<(bool, Value)> {
    let grid = Grid::square(32, 1.0)?;
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    for seed in 0..100u64 {
        let f = init_profile(&ProfileKind::UniformRandom { radius: 0.9, seed }, grid, 1.0)?.field;
        for gamma in [3.0, 4.0] {
            for alpha in [0.5, 1.0, 1.5] {
                let s = sv_sides(&f, gamma, alpha)?;
                worst = worst.min((s.lhs - s.rhs) / s.scale);
                cases += 1;
            }
        }
    }
    Ok((worst >= -1e-10, json!({ "cases": cases, "min_relative_gap": worst, "tolerance": -1e-10 })))
}

/// `C̄_HLS(n, A, (p+1)/p, s)/(p+1)` must not grow along `p`.
fn hls_growth() -> Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for (n, a) in [(2usize, 1.0), (2, 0.5), (3, 0.5), (3, 1.5), (3, -0.5)] {
        let mut ratios = Vec::new();
        for p in 2..=64 {
            let p = p as f64;
            let Ok((_, s)) = hls_theta(a, n, p) else { continue };
            ratios.push(hls_constant_bound(n, a, (p + 1.0) / p, s)? / (p + 1.0));
        }
        let head = ratios.iter().take(8).cloned().fold(0.0, f64::max);
        let tail = ratios.last().copied().unwrap_or(f64::INFINITY);
        pass &= tail <= head;
        rows.push(json!({ "n": n, "A": a, "head_max": head, "tail": tail }));
    }
    Ok((pass, Value::Array(rows)))
}

fn sobolev_quotient() -> Result<(bool, Value)> {
    let s3 = sobolev_constant(3)?;
    let bubble = sobolev_quotient_radial(3, 256, |r| (1.0 + r * r).powf(-0.5))?;
    let gauss = sobolev_quotient_radial(3, 256, |r| (-r * r).exp())?;
    let gap = (bubble - s3).abs() / s3;
    let s_half = fractional_sobolev_constant(3, 0.5)?;
    let pass = gap <= 0.05 && gauss > s3 && (s_half - 0.370018).abs() <= 1e-5;
    Ok((pass, json!({ "S3": s3, "bubble": bubble, "gaussian": gauss, "relative_gap": gap, "S(3,1/2)": s_half })))
}

/// `I_{2s}(−Δ)^s u = u` on a Gaussian of width `0.05` in the unit box:
/// raw to `10⁻³` for `s ≤ 1/2`, up to the box-truncation offset for all `s`.
fn riesz_composition(cells: usize) -> Result<(bool, Value)> {
    let grid = Grid::square(cells, 1.0)?;
    let u = init_profile(&ProfileKind::Gaussian { sigma: 0.05 }, grid, 1.0)?.field;
    let mut pass = true;
    let mut rows = Vec::new();
    for s in [0.25, 0.5, 0.75] {
        let e = riesz_composition_error(&u, FractionalOrder::new(s)?)?;
        pass &= e.offset_removed <= 1e-3 && (s > 0.5 || e.raw <= 1e-3);
        rows.push(json!({ "s": s, "raw": e.raw, "offset": e.offset, "offset_removed": e.offset_removed }));
    }
    Ok((pass, json!({ "N": cells, "orders": rows })))
}

pub fn verify(cells: usize) -> VerifyReport {
    let suites = vec![
        timed("sv_sweep", sv_sweep),
        timed("hls_bound_growth", hls_growth),
        timed("sobolev_quotient", sobolev_quotient),
        timed("riesz_composition", || riesz_composition(cells)),
    ];
    VerifyReport { pass: suites.iter().all(|s| s.pass), suites }
}
