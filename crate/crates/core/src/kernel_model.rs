//! Power-law interaction potential `U(x) = |x|^A/A − λ|x|^B/B`, its
//! distributional Laplacian, and the regime classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, unit_ball_volume};

/// Absolute tolerance for exact-regime membership (`B = 2 − n`,
/// `A = 2 − n`, `m = 1 − A/n`).
pub const EXACT_TOL: f64 = 1e-12;

/// Exponents, strength and dimension of the interaction potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    #[serde(rename = "A")]
    pub a: f64,
    /// Repulsive exponent; ignored when `lambda == 0`.
    #[serde(rename = "B")]
    pub b: f64,
    pub lambda: f64,
    pub n: usize,
}

impl PotentialParams {
    pub fn new(a: f64, b: f64, lambda: f64, n: usize) -> Result<Self> {
        let p = Self { a, b, lambda, n };
        p.validate()?;
        Ok(p)
    }

    /// Purely attractive potential (`λ = 0`).
    pub fn attractive(a: f64, n: usize) -> Result<Self> {
        Self::new(a, 0.0, 0.0, n)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if self.n < 2 {
            return Err(Error::ParamDomain(format!("n >= 2 violated (n = {})", self.n)));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::ParamDomain(format!(
                "lambda >= 0 violated (lambda = {})",
                self.lambda
            )));
        }
        if !self.a.is_finite() || self.a > 2.0 {
            return Err(Error::ParamDomain(format!("A <= 2 violated (A = {})", self.a)));
        }
        if self.lambda > 0.0 {
            if !self.b.is_finite() || self.b <= -nf {
                return Err(Error::ParamDomain(format!(
                    "B > -n violated (B = {}, n = {})",
                    self.b, self.n
                )));
            }
            if self.b >= self.a {
                return Err(Error::ParamDomain(format!(
                    "A > B violated (A = {}, B = {})",
                    self.a, self.b
                )));
            }
        } else if self.a <= -nf {
            return Err(Error::ParamDomain(format!(
                "A > -n violated (A = {}, n = {})",
                self.a, self.n
            )));
        }
        Ok(())
    }

    pub fn has_repulsion(&self) -> bool {
        self.lambda > 0.0
    }

    /// `2 − n`, the Newtonian exponent.
    pub fn newtonian_exponent(&self) -> f64 {
        2.0 - self.n as f64
    }
}

/// Diffusion exponent `m` of `Δρ^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionExponent(f64);

impl DiffusionExponent {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::ParamDomain(format!("m > 0 violated (m = {m})")));
        }
        Ok(Self(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Standing assumption `m > 1 − 2/n` of all simulated regimes.
    pub fn is_admissible(self, n: usize) -> bool {
        self.0 > 1.0 - 2.0 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    WeakSingularInterior,
    WeakSingularNewtonianB,
    StrongSingular,
    AttractiveDiffusionDominated,
    AttractiveNewtonian,
    FairCompetition,
    Unclassified,
}

impl RegimeTag {
    /// Regimes for which uniform-in-time bounds are expected.
    pub fn expects_bounded(self) -> bool {
        !matches!(self, RegimeTag::FairCompetition | RegimeTag::Unclassified)
    }
}

/// Classification result together with the inequalities that fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub witnesses: Vec<String>,
}

fn approx_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= EXACT_TOL
}

/// Sorts `(params, m)` into the regime whose theorem applies.
///
/// With repulsion the precedence is interior weak, Newtonian-B, strong. For
/// `λ = 0` the fair-competition line `m = 1 − A/n` is tested first, then the
/// Newtonian and interior attractive cases, both of which require the
/// diffusion-dominated inequality `m > 1 − A/n`.
pub fn classify(params: &PotentialParams, m: f64) -> Result<Regime> {
    params.validate()?;
    DiffusionExponent::new(m)?;
    let n = params.n as f64;
    let (a, b) = (params.a, params.b);
    let newton = 2.0 - n;
    let m_floor = 1.0 - 2.0 / n;
    let mut witnesses = Vec::new();
    let tag = if params.has_repulsion() {
        witnesses.push("lambda > 0".to_string());
        if m > m_floor {
            witnesses.push("m > 1-2/n".to_string());
            if b > newton + EXACT_TOL && b < a && a <= 2.0 {
                witnesses.push("2-n < B < A <= 2".to_string());
                RegimeTag::WeakSingularInterior
            } else if approx_eq(b, newton) && b < a && a <= 2.0 {
                witnesses.push("B = 2-n < A <= 2".to_string());
                RegimeTag::WeakSingularNewtonianB
            } else if -n < b && b < newton - EXACT_TOL && newton - EXACT_TOL <= a && a <= 2.0 {
                witnesses.push("-n < B < 2-n <= A <= 2".to_string());
                RegimeTag::StrongSingular
            } else {
                RegimeTag::Unclassified
            }
        } else {
            RegimeTag::Unclassified
        }
    } else {
        witnesses.push("lambda = 0".to_string());
        let fair = 1.0 - a / n;
        if approx_eq(m, fair) {
            witnesses.push("m = 1-A/n".to_string());
            RegimeTag::FairCompetition
        } else if approx_eq(a, newton) && m > fair && m > m_floor {
            witnesses.push("A = 2-n".to_string());
            witnesses.push("m > 1-A/n".to_string());
            RegimeTag::AttractiveNewtonian
        } else if a > newton + EXACT_TOL && a <= 2.0 && m > fair {
            witnesses.push("2-n < A <= 2".to_string());
            witnesses.push("m > 1-A/n".to_string());
            RegimeTag::AttractiveDiffusionDominated
        } else {
            RegimeTag::Unclassified
        }
    };
    if tag == RegimeTag::Unclassified {
        witnesses.clear();
    }
    Ok(Regime { tag, witnesses })
}

/// `r^e / e`, with `log r` at `e = 0`.
fn power_over_exponent(r: f64, e: f64) -> f64 {
    if e == 0.0 {
        r.ln()
    } else {
        r.powf(e) / e
    }
}

/// Radial profile of `U` at distance `r > 0`.
pub fn potential_value(params: &PotentialParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("U is singular at r = {r}")));
    }
    let mut u = power_over_exponent(r, params.a);
    if params.has_repulsion() {
        u -= params.lambda * power_over_exponent(r, params.b);
    }
    Ok(u)
}

fn require_weak_interior(params: &PotentialParams) -> Result<()> {
    let newton = params.newtonian_exponent();
    if !params.has_repulsion() {
        return Err(Error::RegimeMismatch("requires lambda > 0".into()));
    }
    if !(params.b > newton + EXACT_TOL && params.b < params.a && params.a <= 2.0) {
        return Err(Error::RegimeMismatch(format!(
            "requires 2-n < B < A <= 2 (A = {}, B = {}, n = {})",
            params.a, params.b, params.n
        )));
    }
    Ok(())
}

/// `f(r) = (A−2+n) r^{A−2} − λ(B−2+n) r^{B−2}`, the Laplacian of `U` away
/// from the origin in the interior weak-singularity case.
pub fn laplacian_mass_f(params: &PotentialParams, r: f64) -> Result<f64> {
    require_weak_interior(params)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("f is singular at r = {r}")));
    }
    let n = params.n as f64;
    let (a, b) = (params.a, params.b);
    Ok((a - 2.0 + n) * r.powf(a - 2.0) - params.lambda * (b - 2.0 + n) * r.powf(b - 2.0))
}

/// Unique zero `r₀ = (λ(B−2+n)/(A−2+n))^{1/(A−B)}` of `f`; `f < 0` below it.
pub fn repulsion_zero_r0(params: &PotentialParams) -> Result<f64> {
    require_weak_interior(params)?;
    let n = params.n as f64;
    let (a, b) = (params.a, params.b);
    Ok((params.lambda * (b - 2.0 + n) / (a - 2.0 + n)).powf(1.0 / (a - b)))
}

/// Riesz normalization `C(n,s) = Γ(n/2 − s) / (4^s π^{n/2} Γ(s))`, so that
/// `C(n,s)|x|^{-(n-2s)}` is the kernel of `(−Δ)^{-s}`.
pub fn riesz_constant(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    gamma(nf / 2.0 - s) / (4f64.powf(s) * std::f64::consts::PI.powf(nf / 2.0) * gamma(s))
}

/// One additive piece of `Δ(U∗ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LaplacianTerm {
    /// `coefficient · (|x|^exponent ∗ ρ)`.
    Convolution { coefficient: f64, exponent: f64 },
    /// `coefficient · ρ(x)`.
    Local { coefficient: f64 },
    /// `coefficient · (−Δ)^order ρ`.
    Fractional { coefficient: f64, order: f64 },
}

/// `Δ(U∗ρ)` written as a sum of convolution, local and fractional terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianForm {
    pub terms: Vec<LaplacianTerm>,
}

/// Laplacian of `sign · (|x|^e / e) ∗ ρ` as a single term.
fn power_term(n: usize, e: f64, sign: f64) -> LaplacianTerm {
    let nf = n as f64;
    let newton = 2.0 - nf;
    if (e - newton).abs() <= EXACT_TOL {
        LaplacianTerm::Local { coefficient: sign * nf * unit_ball_volume(n) }
    } else if e > newton {
        LaplacianTerm::Convolution { coefficient: sign * (e - 2.0 + nf), exponent: e - 2.0 }
    } else {
        let s = (e + nf) / 2.0;
        LaplacianTerm::Fractional { coefficient: -sign * riesz_constant(n, s) / e, order: 1.0 - s }
    }
}

pub fn interaction_laplacian_form(params: &PotentialParams) -> LaplacianForm {
    let mut terms = vec![power_term(params.n, params.a, 1.0)];
    if params.has_repulsion() {
        terms.push(power_term(params.n, params.b, -params.lambda));
    }
    LaplacianForm { terms }
}
