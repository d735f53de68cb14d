//! Constants of the `L^p → L^∞` bootstrap: iteration exponents, inequality
//! constants, `p_k` sequences and the `y_k` recursion bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma, unit_sphere_area};

/// Which iteration scheme a constant belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Weak,
    Attractive,
    Strong,
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Case::Weak),
            "attractive" => Ok(Case::Attractive),
            "strong" => Ok(Case::Strong),
            _ => Err(Error::ParamDomain(format!("unknown case `{s}` (weak, attractive, strong)"))),
        }
    }
}

/// `p_k` of the chosen iteration. `A = 2` in the attractive case falls back
/// to the weak sequence.
pub fn pk_sequence(case: Case, k: u32, n: usize, a: f64) -> Result<f64> {
    let two_k = 2f64.powi(k as i32);
    let nf = n as f64;
    match case {
        Case::Weak => Ok(two_k + 1.0),
        Case::Attractive if a == 2.0 => Ok(two_k + 1.0),
        Case::Attractive if a > 2.0 => Err(Error::ParamDomain(format!("A <= 2 violated (A = {a})"))),
        Case::Attractive => Ok(two_k + nf / (2.0 - a) + nf),
        Case::Strong => Ok(two_k + nf),
    }
}

/// A named strict inequality with its margin (positive when it holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub holds: bool,
    pub margin: f64,
}

impl Flag {
    fn less(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), holds: lhs < rhs, margin: rhs - lhs }
    }

    fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), holds: lhs <= rhs, margin: rhs - lhs }
    }

    fn agree(name: &str, a: f64, b: f64, rel: f64) -> Self {
        let err = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        Self { name: name.into(), holds: err <= rel, margin: rel - err }
    }
}

/// One rung of the bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConstants {
    pub case: Case,
    pub k: Option<u32>,
    pub p_k: f64,
    pub p_km1: f64,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub theta3: Option<f64>,
    /// HLS interpolation exponent (attractive case).
    pub theta: Option<f64>,
    pub ell2: Option<f64>,
    pub eta: Option<f64>,
    pub eta_closed_form: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub q1: Option<f64>,
    pub nu2: Option<f64>,
    /// `n = 2`: the Sobolev exponent `2n/(n−2)` degenerates and the
    /// formulas are evaluated as their `n − 2 = 0` limit.
    pub formal: bool,
    pub flags: Vec<Flag>,
}

impl IterationConstants {
    fn empty(case: Case, n: usize, p_k: f64, p_km1: f64) -> Self {
        Self {
            case,
            k: None,
            p_k,
            p_km1,
            theta1: None,
            theta2: None,
            theta3: None,
            theta: None,
            ell2: None,
            eta: None,
            eta_closed_form: None,
            eta1: None,
            eta2: None,
            q1: None,
            nu2: None,
            formal: n == 2,
            flags: Vec::new(),
        }
    }

    /// The first failing flag as an error.
    pub fn check(self) -> Result<Self> {
        match self.flags.iter().find(|f| !f.holds) {
            Some(f) => Err(Error::Validity { name: f.name.clone(), margin: f.margin }),
            None => Ok(self),
        }
    }

    pub fn all_hold(&self) -> bool {
        self.flags.iter().all(|f| f.holds)
    }

    pub fn min_margin(&self) -> f64 {
        self.flags.iter().map(|f| f.margin).fold(f64::INFINITY, f64::min)
    }
}

fn check_common(m: f64, n: usize, p_k: f64, p_km1: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::ParamDomain(format!("n >= 2 violated (n = {n})")));
    }
    if !(m > 1.0 - 2.0 / n as f64) {
        return Err(Error::ParamDomain(format!("m > 1-2/n violated (m = {m}, n = {n})")));
    }
    if !(p_km1 >= 1.0 && p_k > p_km1) {
        return Err(Error::ParamDomain(format!("p_k > p_km1 >= 1 violated ({p_k}, {p_km1})")));
    }
    Ok(())
}

/// `(n−2)/(n(m+p−1))`, the reciprocal Sobolev exponent of `ρ^{(m+p−1)/2}`.
fn sobolev_reciprocal(m: f64, n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (nf - 2.0) / (nf * (m + p - 1.0))
}

struct WeakCore {
    theta2: f64,
    one_minus_theta2: f64,
    ell2: f64,
    eta: f64,
    eta_closed: f64,
}

fn weak_core(m: f64, n: usize, p_k: f64, p_km1: f64) -> WeakCore {
    let nf = n as f64;
    let sr = sobolev_reciprocal(m, n, p_k);
    let den = 1.0 / p_km1 - sr;
    let theta2 = (1.0 / p_k - sr) / den;
    let one_minus_theta2 = (1.0 / p_km1 - 1.0 / p_k) / den;
    let ell2 = (m + p_k - 1.0) / (m + p_k - 1.0 - one_minus_theta2 * p_k);
    let eta = ell2 * p_k * theta2 / p_km1;
    let eta_closed = (m - 1.0 + 2.0 / nf * p_k) / (m - 1.0 + 2.0 / nf * p_km1);
    WeakCore { theta2, one_minus_theta2, ell2, eta, eta_closed }
}

fn weak_flags(core: &WeakCore, m: f64, n: usize, p_k: f64) -> Vec<Flag> {
    let nf = n as f64;
    vec![
        Flag::less("0 < theta2", 0.0, core.theta2),
        Flag::less("theta2 < 1", core.theta2, 1.0),
        Flag::less("1 < ell2", 1.0, core.ell2),
        Flag::less("ell2 < n+1", core.ell2, nf + 1.0),
        Flag::less("0 < eta", 0.0, core.eta),
        Flag::less("eta < 2", core.eta, 2.0),
        Flag::less("(1-theta2) p_k/(m+p_k-1) < 1", core.one_minus_theta2 * p_k / (m + p_k - 1.0), 1.0),
        Flag::agree("eta formulas agree", core.eta, core.eta_closed, 1e-12),
    ]
}

/// Exponents of the weak-singularity iteration step from `p_{k−1}` to `p_k`.
pub fn weak_constants(m: f64, n: usize, p_k: f64, p_km1: f64) -> Result<IterationConstants> {
    check_common(m, n, p_k, p_km1)?;
    let core = weak_core(m, n, p_k, p_km1);
    let mut c = IterationConstants::empty(Case::Weak, n, p_k, p_km1);
    c.flags = weak_flags(&core, m, n, p_k);
    c.theta2 = Some(core.theta2);
    c.ell2 = Some(core.ell2);
    c.eta = Some(core.eta);
    c.eta_closed_form = Some(core.eta_closed);
    c.check()
}

/// `θ₁` of the single-`p` interpolation between `L¹` and the Sobolev
/// exponent, and the Young ratio `p(1−θ₁)/(m+p−1)`, which must stay below 1.
pub fn step1_theta1(m: f64, n: usize, p: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    if !(p > 1.0) {
        return Err(Error::ParamDomain(format!("p > 1 violated (p = {p})")));
    }
    if !(m > 1.0 - 2.0 / nf) {
        return Err(Error::ParamDomain(format!("m > 1-2/n violated (m = {m}, n = {n})")));
    }
    let q = m + p - 1.0;
    let one_minus = (p - 1.0) * q * nf / (p * (q * nf - nf + 2.0));
    let young = p * one_minus / q;
    if !(young < 1.0) {
        return Err(Error::Validity { name: "p(1-theta1)/(m+p-1) < 1".into(), margin: 1.0 - young });
    }
    Ok((1.0 - one_minus, young))
}

/// HLS interpolation exponent `θ = (−n + (2−A)(p+1))/(np)` and the
/// matching `s = n(p+1)/((n−2+A)(p+1)+n)`.
pub fn hls_theta(a: f64, n: usize, p: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    if !(a >= 2.0 - nf && a < 2.0) {
        return Err(Error::ParamDomain(format!("2-n <= A < 2 violated (A = {a}, n = {n})")));
    }
    let threshold = ((a - 2.0 + nf) / (2.0 - a)).max(1.0);
    if !(p > threshold) {
        return Err(Error::Domain(format!(
            "p > max{{1, (A-2+n)/(2-A)}} = {threshold} violated (p = {p})"
        )));
    }
    let theta = (-nf + (2.0 - a) * (p + 1.0)) / (nf * p);
    let s = nf * (p + 1.0) / ((nf - 2.0 + a) * (p + 1.0) + nf);
    Ok((theta, s))
}

/// Upper bound `C̄(n, A, r, s)` for the HLS constant with kernel
/// `|x|^{−(2−A)}`.
pub fn hls_constant_bound(n: usize, a: f64, r: f64, s: f64) -> Result<f64> {
    let nf = n as f64;
    if !(a > 2.0 - nf && a < 2.0) {
        return Err(Error::Domain(format!("2-n < A < 2 violated (A = {a}, n = {n})")));
    }
    if !(r > 1.0 && s > 1.0) {
        return Err(Error::Domain(format!("r, s > 1 violated (r = {r}, s = {s})")));
    }
    let lam = 2.0 - a;
    let rel = 1.0 / r + lam / nf + 1.0 / s - 2.0;
    if rel.abs() > 1e-12 {
        return Err(Error::Domain(format!("1/r + (2-A)/n + 1/s = 2 violated (off by {rel:e})")));
    }
    let e = lam / nf;
    let bracket = (lam / (nf * (1.0 - 1.0 / s))).powf(e) + (lam / (nf * (1.0 - 1.0 / r))).powf(e);
    Ok(nf / (nf - 2.0 + a) * (unit_sphere_area(n) / nf).powf(e) / (s * r) * bracket)
}

/// Sharp fractional Sobolev constant
/// `S(n,s) = 2^{−2s}π^{−s} Γ((n−2s)/2)/Γ((n+2s)/2) [Γ(n)/Γ(n/2)]^{2s/n}`.
pub fn fractional_sobolev_constant(n: usize, s: f64) -> Result<f64> {
    let nf = n as f64;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("0 < s < 1 violated (s = {s})")));
    }
    if !(nf > 2.0 * s) {
        return Err(Error::Domain(format!("n > 2s violated (n = {n}, s = {s})")));
    }
    let log = -2.0 * s * 2f64.ln() - s * std::f64::consts::PI.ln() + ln_gamma((nf - 2.0 * s) / 2.0)
        - ln_gamma((nf + 2.0 * s) / 2.0)
        + 2.0 * s / nf * (ln_gamma(nf) - ln_gamma(nf / 2.0));
    Ok(log.exp())
}

/// Exponents of the strong-singularity iteration (`p_k = 2^k + n`).
pub fn strong_constants(m: f64, n: usize, b: f64, p_k: f64, p_km1: f64) -> Result<IterationConstants> {
    check_common(m, n, p_k, p_km1)?;
    let nf = n as f64;
    if !(b > -nf && b < 2.0 - nf) {
        return Err(Error::ParamDomain(format!("-n < B < 2-n violated (B = {b}, n = {n})")));
    }
    let core = weak_core(m, n, p_k, p_km1);
    let e = (2.0 * nf - 2.0 + b) / (nf * (p_k + 1.0));
    let theta3 = (1.0 / (p_k + 1.0) - e) / (1.0 / p_km1 - e);
    let q1 = 1.0 / theta3;
    let q1_closed = (nf * (p_k + 1.0) - (2.0 * nf - 2.0 + b) * p_km1) / ((2.0 - b - nf) * p_km1);
    let q1_cap = nf / (2.0 - nf - b) + 1.0;
    let nu2 = q1.max(core.ell2);
    let eta2 = (p_k + 1.0) / p_km1;
    let mut c = IterationConstants::empty(Case::Strong, n, p_k, p_km1);
    c.flags = weak_flags(&core, m, n, p_k);
    c.flags.extend([
        Flag::less("0 < theta3", 0.0, theta3),
        Flag::less("theta3 < 1", theta3, 1.0),
        Flag::agree("q1 formulas agree", q1, q1_closed, 1e-12),
        Flag::less("q1 < n/(2-n-B)+1", q1, q1_cap),
        Flag::less("1 < nu2", 1.0, nu2),
        Flag::at_most("nu2 <= max{n+1, n/(2-n-B)+1}", nu2, (nf + 1.0).max(q1_cap)),
        Flag::at_most("eta2 <= 2", eta2, 2.0),
    ]);
    c.theta2 = Some(core.theta2);
    c.theta3 = Some(theta3);
    c.ell2 = Some(core.ell2);
    c.eta = Some(core.eta);
    c.eta_closed_form = Some(core.eta_closed);
    c.eta1 = Some(core.eta);
    c.eta2 = Some(eta2);
    c.q1 = Some(q1);
    c.nu2 = Some(nu2);
    c.check()
}

/// Exponents of the diffusion-dominated attractive iteration
/// (`p_k = 2^k + n/(2−A) + n`).
pub fn attractive_constants(m: f64, n: usize, a: f64, p_k: f64, p_km1: f64) -> Result<IterationConstants> {
    check_common(m, n, p_k, p_km1)?;
    let nf = n as f64;
    let core = weak_core(m, n, p_k, p_km1);
    let (theta, _) = hls_theta(a, n, p_k)?;
    let sr = sobolev_reciprocal(m, n, p_k);
    let den = 1.0 / p_km1 - sr;
    let theta1 = (1.0 / (p_k + 1.0) - sr) / den;
    let one_minus_theta1 = (1.0 / p_km1 - 1.0 / (p_k + 1.0)) / den;
    let q = m + p_k - 1.0;
    let young = one_minus_theta1 * (p_k + theta) / q;
    let nu2 = q / (q - one_minus_theta1 * (p_k + theta));
    let eta2 = nu2 * (p_k + theta) * theta1 / p_km1;
    let mut c = IterationConstants::empty(Case::Attractive, n, p_k, p_km1);
    c.flags = weak_flags(&core, m, n, p_k);
    c.flags.extend([
        Flag::less("(1-theta1)(p_k+theta)/(m+p_k-1) < 1", young, 1.0),
        Flag::less("1 < nu2", 1.0, nu2),
        Flag::at_most("nu2 <= n+1", nu2, nf + 1.0),
        Flag::less("0 < eta2", 0.0, eta2),
        Flag::at_most("eta2 <= 2", eta2, 2.0),
    ]);
    c.theta = Some(theta);
    c.theta1 = Some(theta1);
    c.theta2 = Some(core.theta2);
    c.ell2 = Some(core.ell2);
    c.eta = Some(core.eta);
    c.eta_closed_form = Some(core.eta_closed);
    c.eta1 = Some(core.eta);
    c.eta2 = Some(eta2);
    c.nu2 = Some(nu2);
    c.check()
}

/// Constants for rungs `k = 1..=k_max` of one case.
pub fn constants_table(
    case: Case,
    m: f64,
    n: usize,
    a: f64,
    b: f64,
    k_max: u32,
) -> Result<Vec<IterationConstants>> {
    (1..=k_max)
        .map(|k| {
            let p_k = pk_sequence(case, k, n, a)?;
            let p_km1 = pk_sequence(case, k - 1, n, a)?;
            let mut c = match case {
                Case::Weak => weak_constants(m, n, p_k, p_km1),
                Case::Attractive if a == 2.0 => weak_constants(m, n, p_k, p_km1),
                Case::Attractive => attractive_constants(m, n, a, p_k, p_km1),
                Case::Strong => strong_constants(m, n, b, p_k, p_km1),
            }?;
            c.k = Some(k);
            Ok(c)
        })
        .collect()
}

/// Sharp Sobolev constant `S_n = πn(n−2)(Γ(n/2)/Γ(n))^{2/n}` in
/// `S_n‖h‖²_{2*} ≤ ‖∇h‖²₂`.
pub fn sobolev_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "the Sobolev exponent 2n/(n-2) needs n >= 3 (n = {n})"
        )));
    }
    let nf = n as f64;
    Ok(std::f64::consts::PI * nf * (nf - 2.0) * (gamma(nf / 2.0) / gamma(nf)).powf(2.0 / nf))
}

/// Numerical Sobolev quotient `‖∇h‖²₂ / ‖h‖²_{2*}` of a radial profile in
/// `n ≥ 3` dimensions. The half-line is mapped to `θ ∈ (0, π/2)` by
/// `r = tan θ` and split into `cells` midpoint cells; `h'` comes from
/// centered differences of the sampled profile.
pub fn sobolev_quotient_radial(n: usize, cells: usize, profile: impl Fn(f64) -> f64) -> Result<f64> {
    if n < 3 || cells < 8 {
        return Err(Error::Domain(format!("need n >= 3 and >= 8 cells (n = {n}, cells = {cells})")));
    }
    let nf = n as f64;
    let crit = 2.0 * nf / (nf - 2.0);
    let dth = std::f64::consts::FRAC_PI_2 / cells as f64;
    let th: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * dth).collect();
    let h: Vec<f64> = th.iter().map(|t| profile(t.tan())).collect();
    let mut grad = 0.0;
    let mut norm = 0.0;
    for i in 0..cells {
        let r = th[i].tan();
        let jac = 1.0 / th[i].cos().powi(2);
        // even reflection through the origin, one-sided at θ = π/2
        let dh = if i == 0 {
            (h[1] - h[0]) / (2.0 * dth)
        } else if i == cells - 1 {
            (h[i] - h[i - 1]) / dth
        } else {
            (h[i + 1] - h[i - 1]) / (2.0 * dth)
        };
        let dhdr = dh / jac;
        let w = r.powf(nf - 1.0) * jac * dth;
        grad += dhdr * dhdr * w;
        norm += h[i].abs().powf(crit) * w;
    }
    // both integrals carry the sphere area |S^{n−1}|
    Ok(unit_sphere_area(n).powf(2.0 / nf) * grad / norm.powf(2.0 / crit))
}

/// Result of replaying the `y_k` recursion in the log domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YkReplay {
    pub k: u32,
    pub p_k: f64,
    pub log_brute_force: f64,
    pub log_closed_form: f64,
    /// `|log brute − log closed| / |log closed|`. The logs reach `2^k`
    /// magnitudes, so agreement is judged relative to them.
    pub log_relative_error: f64,
    /// `brute_force^{1/p_k}`.
    pub root: f64,
    /// `2^{n+2} 2^{2(n+1)} C̃ max{y₀, D}`.
    pub limit_bound: f64,
}

/// Replays `y_k = 2a_k max{y_{k−1}², D^{2^k}}` with
/// `a_k = C̃ 2^{n+1} 2^{(n+1)k}` and `p_k = 2^k + 1`, and evaluates the
/// telescoped product for `k = 1..=k_max`.
pub fn yk_bound_replay(c_tilde: f64, n: usize, d: f64, y0_sup: f64, k_max: u32) -> Result<Vec<YkReplay>> {
    if !(c_tilde > 1.0) {
        return Err(Error::Domain(format!("C_tilde > 1 violated ({c_tilde})")));
    }
    if !(d >= 1.0) {
        return Err(Error::Domain(format!("D >= 1 violated ({d})")));
    }
    if !(y0_sup > 0.0) {
        return Err(Error::Domain(format!("sup y0 > 0 violated ({y0_sup})")));
    }
    let ln2 = std::f64::consts::LN_2;
    let nf = n as f64;
    let (lc, ld, ly0) = (c_tilde.ln(), d.ln(), y0_sup.ln());
    let limit_bound = ((nf + 2.0) * ln2 + 2.0 * (nf + 1.0) * ln2 + lc + ly0.max(ld)).exp();
    let mut log_y = ly0;
    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let kf = k as f64;
        let two_k = 2f64.powi(k as i32);
        let log_2ak = ln2 + lc + (nf + 1.0) * ln2 + (nf + 1.0) * kf * ln2;
        log_y = log_2ak + (2.0 * log_y).max(two_k * ld);
        let log_closed = (two_k - 1.0) * ((nf + 2.0) * ln2 + lc)
            + (2.0 * two_k - kf - 2.0) * (nf + 1.0) * ln2
            + two_k * ly0.max(ld);
        let p_k = two_k + 1.0;
        out.push(YkReplay {
            k,
            p_k,
            log_brute_force: log_y,
            log_closed_form: log_closed,
            log_relative_error: (log_y - log_closed).abs() / log_closed.abs().max(1.0),
            root: (log_y / p_k).exp(),
            limit_bound,
        });
    }
    Ok(out)
}

/// `D₀ = max{1, ‖ρ₀‖₁, ‖ρ₀‖_∞}` and the smallest `D` with
/// `D₀^{p_k/2^k} ≤ D` for all `k ≥ 0`, namely `D₀^{p_0}`.
pub fn d_constants(case: Case, n: usize, a: f64, l1: f64, linf: f64) -> Result<(f64, f64)> {
    let d0 = 1f64.max(l1).max(linf);
    let p0 = pk_sequence(case, 0, n, a)?;
    Ok((d0, d0.powf(p0)))
}

/// The `k`-dependent factor `C(σ₁)(1 + C^{ℓ₂}) S_n^{−ℓ₂p_k(1−θ₂)/(m+p_k−1)}`
/// of the weak iteration, with `σ₁ = C₁` and `C(σ₁) = (σ₁ℓ₁)^{−ℓ₂/ℓ₁}/ℓ₂`.
/// Bounded in `k` exactly when a finite `C̃` exists.
pub fn csigma_sequence(m: f64, n: usize, c_interaction: f64, c1: f64, k_max: u32) -> Result<Vec<f64>> {
    let s_n = sobolev_constant(n)?;
    (1..=k_max)
        .map(|k| {
            let p_k = pk_sequence(Case::Weak, k, n, 0.0)?;
            let p_km1 = pk_sequence(Case::Weak, k - 1, n, 0.0)?;
            let core = weak_core(m, n, p_k, p_km1);
            let ell2 = core.ell2;
            let ell1 = ell2 / (ell2 - 1.0);
            let c_sigma = (c1 * ell1).powf(-ell2 / ell1) / ell2;
            let expo = ell2 * p_k * core.one_minus_theta2 / (m + p_k - 1.0);
            Ok(c_sigma * (1.0 + c_interaction.powf(ell2)) * s_n.powf(-expo))
        })
        .collect()
}

/// `C₁ = mp(p−1)/(m+p−1)²`: half the ceiling `2mp(p−1)/(m+p−1)²`.
pub fn dissipation_retention(m: f64, p: f64) -> f64 {
    m * p * (p - 1.0) / (m + p - 1.0).powi(2)
}

/// Named constants of the inequalities used along the bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityConstants {
    pub sobolev: Option<f64>,
    pub fractional_sobolev: Option<f64>,
    pub hls_bound: Option<f64>,
    pub riesz_constant: Option<f64>,
    pub sphere_area: f64,
    pub c1: f64,
    pub c_tilde: Option<f64>,
    pub d0: f64,
    pub d: f64,
}

impl InequalityConstants {
    /// Evaluates every constant that is defined for `(n, A, B, m, p)`;
    /// undefined ones are `None`.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        case: Case,
        n: usize,
        a: f64,
        b: f64,
        m: f64,
        p: f64,
        c_tilde: Option<f64>,
        l1: f64,
        linf: f64,
    ) -> Result<Self> {
        let nf = n as f64;
        let frac_order = (2.0 - nf - b) / 2.0;
        let strong = case == Case::Strong;
        let hls_bound = hls_theta(a, n, p)
            .ok()
            .and_then(|(_, s)| hls_constant_bound(n, a, (p + 1.0) / p, s).ok());
        let (d0, d) = d_constants(case, n, a, l1, linf)?;
        let c1 = dissipation_retention(m, p);
        let out = Self {
            sobolev: sobolev_constant(n).ok(),
            fractional_sobolev: if strong { fractional_sobolev_constant(n, frac_order).ok() } else { None },
            hls_bound,
            riesz_constant: if strong { Some(crate::kernel_model::riesz_constant(n, (b + nf) / 2.0)) } else { None },
            sphere_area: unit_sphere_area(n),
            c1,
            c_tilde,
            d0,
            d,
        };
        let ceiling = 2.0 * m * p * (p - 1.0) / (m + p - 1.0).powi(2);
        if !(c1 > 0.0 && c1 < ceiling) {
            return Err(Error::Validity { name: "0 < C1 < 2mp(p-1)/(m+p-1)^2".into(), margin: ceiling - c1 });
        }
        Ok(out)
    }
}
