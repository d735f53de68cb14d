//! Special functions used by the kernel normalizations and inequality
//! constants.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Volume of the unit ball in `n` dimensions, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) / gamma(nf / 2.0 + 1.0)
}

/// Surface area `|S^{n-1}| = n·α_n` of the unit sphere in `n` dimensions.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Sum of the alternating series `Σ_{k≥0} (-1)^k a_k` by the
/// Cohen–Villegas–Zagier acceleration. Exact to roughly `5.8^{-terms}` when
/// `a_k` is a moment sequence of a positive measure on `[0, 1]`.
fn alternating_sum(terms: usize, a: impl Fn(usize) -> f64) -> f64 {
    let n = terms as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(n);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..terms {
        let kf = k as f64;
        c = b - c;
        s += c * a(k);
        b = (kf + n) * (kf - n) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

const CVZ_TERMS: usize = 42;

/// Riemann zeta function for real `s > 0`, `s ≠ 1`, through the Dirichlet
/// eta function.
pub fn riemann_zeta(s: f64) -> f64 {
    debug_assert!(s > 0.0 && s != 1.0);
    let eta = alternating_sum(CVZ_TERMS, |k| (k as f64 + 1.0).powf(-s));
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Dirichlet beta function `Σ (-1)^k (2k+1)^{-s}` for real `s > 0`.
pub fn dirichlet_beta(s: f64) -> f64 {
    debug_assert!(s > 0.0);
    alternating_sum(CVZ_TERMS, |k| (2.0 * k as f64 + 1.0).powf(-s))
}

/// Analytically continued lattice sum `Σ'_{k ∈ Z^dim} |k|^{-beta}` for the
/// integer lattice in one or two dimensions, `0 < beta < dim` included.
pub fn lattice_zeta(dim: usize, beta: f64) -> f64 {
    match dim {
        1 => 2.0 * riemann_zeta(beta),
        2 => 4.0 * riemann_zeta(beta / 2.0) * dirichlet_beta(beta / 2.0),
        _ => panic!("lattice_zeta: unsupported dimension {dim}"),
    }
}

/// Compensated (Neumaier) summation; order-deterministic.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
