//! Norm time series, per-state differential-inequality residuals and the
//! boundedness verdict.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{dissipation_retention, hls_constant_bound, hls_theta, pk_sequence, Case};
use crate::field::DensityField;
use crate::kernel_model::{classify, repulsion_zero_r0, riesz_constant, PotentialParams, RegimeTag};
use crate::operators::{dissipation_functional, fractional_energy};
use crate::solver::{SimConfig, Termination};
use crate::special::{neumaier_sum, unit_sphere_area};

/// Boundary-band mass fraction above which the truncation of `ℝⁿ` to the
/// box is no longer trusted.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// A cell holding more than this fraction of the mass marks the run as
/// under-resolved.
pub const RESOLUTION_FRACTION: f64 = 0.05;

/// Both sides of `d/dt ∫ρ^p ≤ RHS` at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
}

impl Residual {
    /// `LHS − RHS`; the inequality holds when this is at most [`tol`](Self::tol).
    pub fn value(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn tol(&self) -> f64 {
        1e-6 * (self.lhs.abs() + self.rhs.abs() + 1.0)
    }

    pub fn passes(&self) -> bool {
        self.value() <= self.tol()
    }
}

fn power_integral(field: &DensityField, q: f64) -> f64 {
    neumaier_sum(field.values().iter().map(|&v| v.powf(q))) * field.grid().cell_volume()
}

/// Evaluates the regime's `L^p` differential inequality at `field`, where
/// `rate` is the discrete right-hand side of the scheme at that state.
///
/// The left side is the discrete chain rule `p Σ v^{p−1} rate h^n`. The
/// right side keeps `−2C₁∫|∇ρ^{(m+p−1)/2}|²` with `C₁ = mp(p−1)/(m+p−1)²`
/// and bounds the interaction term by the regime's estimate.
pub fn differential_inequality_residual(
    field: &DensityField,
    rate: &[f64],
    params: &PotentialParams,
    m: f64,
    p: f64,
) -> Result<Residual> {
    let grid = field.grid();
    if grid.n_dim() != params.n {
        return Err(Error::Domain(format!(
            "field dimension {} differs from the potential's n = {}",
            grid.n_dim(),
            params.n
        )));
    }
    let tag = classify(params, m)?.tag;
    let interaction = interaction_bound(field, params, tag, p)?;
    let (lhs, diss) = chain_rule_and_dissipation(field, rate, m, p)?;
    Ok(Residual { lhs, rhs: -2.0 * dissipation_retention(m, p) * diss + interaction })
}

/// Residual of the pure porous-medium inequality `d/dt ∫ρ^p ≤ −2C₁D`.
pub fn diffusion_only_residual(field: &DensityField, rate: &[f64], m: f64, p: f64) -> Result<Residual> {
    let (lhs, diss) = chain_rule_and_dissipation(field, rate, m, p)?;
    Ok(Residual { lhs, rhs: -2.0 * dissipation_retention(m, p) * diss })
}

fn chain_rule_and_dissipation(field: &DensityField, rate: &[f64], m: f64, p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("residual needs p >= 1, got {p}")));
    }
    if rate.len() != field.values().len() {
        return Err(Error::Domain("rate and field lengths differ".into()));
    }
    let lhs = p
        * neumaier_sum(field.values().iter().zip(rate).map(|(&v, &r)| {
            if p == 1.0 {
                r
            } else {
                v.powf(p - 1.0) * r
            }
        }))
        * field.grid().cell_volume();
    Ok((lhs, dissipation_functional(field, m, p)?))
}

/// Upper bound of `(p−1)∫ρ^p ΔU∗ρ` for the regime.
fn interaction_bound(field: &DensityField, params: &PotentialParams, tag: RegimeTag, p: f64) -> Result<f64> {
    let n = params.n as f64;
    let (a, b, lambda) = (params.a, params.b, params.lambda);
    let mass = field.mass();
    let pm1 = p - 1.0;
    if pm1 == 0.0 {
        return Ok(0.0);
    }
    let newton = 2.0 - n;
    let local = unit_sphere_area(params.n);
    let int_p = || power_integral(field, p);
    let int_p1 = || power_integral(field, p + 1.0);
    let bound = match tag {
        RegimeTag::WeakSingularInterior => {
            let r0 = repulsion_zero_r0(params)?;
            pm1 * (a - 2.0 + n) * r0.powf(a - 2.0) * mass * int_p()
        }
        RegimeTag::WeakSingularNewtonianB => {
            let c = if a == 2.0 { n } else { (a - 2.0 + n) * lambda.powf((a - 2.0) / (a - 2.0 + n)) };
            pm1 * c * mass * int_p()
        }
        RegimeTag::StrongSingular => {
            let attraction = if a == 2.0 {
                n * mass * int_p()
            } else if (a - newton).abs() < 1e-12 {
                local * int_p1()
            } else {
                local * int_p1() + (a - 2.0 + n) * mass * int_p()
            };
            let sigma = (2.0 - n - b) / 4.0;
            let w: Vec<f64> = field.values().iter().map(|&v| v.powf((p + 1.0) / 2.0)).collect();
            let energy = fractional_energy(field.grid(), &w, sigma);
            let sv = 4.0 * p * pm1 / (p + 1.0).powi(2);
            pm1 * attraction + lambda * riesz_constant(params.n, (n + b) / 2.0) / b * sv * energy
        }
        RegimeTag::AttractiveNewtonian => pm1 * local * int_p1(),
        RegimeTag::AttractiveDiffusionDominated => {
            if a == 2.0 {
                pm1 * n * mass * int_p()
            } else {
                let (theta, s) = hls_theta(a, params.n, p)?;
                let c_hls = hls_constant_bound(params.n, a, (p + 1.0) / p, s)?;
                let norm = field.lp_norm(p + 1.0)?;
                pm1 * (a - 2.0 + n) * c_hls * mass.powf(1.0 - theta) * norm.powf(p + theta)
            }
        }
        RegimeTag::FairCompetition | RegimeTag::Unclassified => {
            return Err(Error::RegimeMismatch(format!("no differential inequality for regime {tag:?}")));
        }
    };
    Ok(bound)
}

/// Time series of the monitored quantities, sampled at output times.
/// Per-`p` columns are indexed `[p_index][sample]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub p_values: Vec<f64>,
    pub cell_volume: f64,
    pub times: Vec<f64>,
    pub dt: Vec<f64>,
    pub mass: Vec<f64>,
    pub linf: Vec<f64>,
    pub lp: Vec<Vec<f64>>,
    pub dissipation: Vec<Vec<f64>>,
    pub residual: Vec<Vec<Option<Residual>>>,
    pub boundary_fraction: Vec<f64>,
}

impl NormSeries {
    pub fn new(p_values: Vec<f64>, cell_volume: f64) -> Self {
        let k = p_values.len();
        Self {
            p_values,
            cell_volume,
            times: Vec::new(),
            dt: Vec::new(),
            mass: Vec::new(),
            linf: Vec::new(),
            lp: vec![Vec::new(); k],
            dissipation: vec![Vec::new(); k],
            residual: vec![Vec::new(); k],
            boundary_fraction: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of `p` among the monitored exponents.
    pub fn p_index(&self, p: f64) -> Option<usize> {
        self.p_values.iter().position(|&q| (q - p).abs() <= 1e-9 * p.abs().max(1.0))
    }

    /// Largest relative deviation of the mass from its first sample.
    pub fn mass_drift(&self) -> f64 {
        let m0 = match self.mass.first() {
            Some(&m) if m > 0.0 => m,
            _ => return 0.0,
        };
        self.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max)
    }

    /// All recorded residuals pass their tolerance.
    pub fn residuals_pass(&self) -> bool {
        self.residual.iter().flatten().flatten().all(Residual::passes)
    }

    /// Times strictly increasing, norms nonnegative, column lengths equal.
    pub fn check(&self) -> Result<()> {
        let n = self.len();
        let per_p = self.lp.iter().chain(&self.dissipation).all(|c| c.len() == n)
            && self.residual.iter().all(|c| c.len() == n);
        if self.dt.len() != n || self.mass.len() != n || self.linf.len() != n || self.boundary_fraction.len() != n || !per_p {
            return Err(Error::Data("series columns have different lengths".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("times are not strictly increasing".into()));
        }
        let negative = self.mass.iter().chain(&self.linf).chain(self.lp.iter().flatten()).any(|&x| !(x >= 0.0));
        if negative {
            return Err(Error::Data("negative or NaN norm in series".into()));
        }
        Ok(())
    }

    /// CSV with columns `t, dt, mass, linf, lp_<p>…, diss_<p>…, resid_<p>…,
    /// boundary_frac`. Residuals that were not evaluated are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["t".to_string(), "dt".into(), "mass".into(), "linf".into()];
        for prefix in ["lp", "diss", "resid"] {
            header.extend(self.p_values.iter().map(|p| format!("{prefix}_{p}")));
        }
        header.push("boundary_frac".into());
        writeln!(w, "{}", header.join(","))?;
        let f = |x: f64| format!("{x:.16e}");
        for i in 0..self.len() {
            let mut row = vec![f(self.times[i]), f(self.dt[i]), f(self.mass[i]), f(self.linf[i])];
            row.extend(self.lp.iter().map(|c| f(c[i])));
            row.extend(self.dissipation.iter().map(|c| f(c[i])));
            row.extend(self.residual.iter().map(|c| c[i].map(|r| f(r.value())).unwrap_or_default()));
            row.push(f(self.boundary_fraction[i]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Residual evaluation strategy fixed at construction.
#[derive(Debug, Clone, Copy)]
enum ResidualMode {
    Off,
    DiffusionOnly,
    Interaction(PotentialParams),
}

/// Fold-style consumer of solver states that builds a [`NormSeries`].
#[derive(Debug, Clone)]
pub struct Recorder {
    m: f64,
    mode: ResidualMode,
    series: NormSeries,
}

impl Recorder {
    pub fn new(config: &SimConfig, params: Option<PotentialParams>, initial: &DensityField) -> Result<Self> {
        let mode = match params {
            None => ResidualMode::DiffusionOnly,
            Some(p) if p.n != initial.grid().n_dim() => ResidualMode::Off,
            Some(p) => match classify(&p, config.m)?.tag {
                RegimeTag::FairCompetition | RegimeTag::Unclassified => ResidualMode::Off,
                _ => ResidualMode::Interaction(p),
            },
        };
        Ok(Self {
            m: config.m,
            mode,
            series: NormSeries::new(config.monitored_p.clone(), initial.grid().cell_volume()),
        })
    }

    /// Appends one sample. `dt` is the step that led to this state; a
    /// non-finite value (no step yet) is stored as 0.
    pub fn record(&mut self, t: f64, dt: f64, field: &DensityField, rate: &[f64]) -> Result<()> {
        if let Some(&last) = self.series.times.last() {
            if !(t > last) {
                return Err(Error::Data(format!("sample time {t} not after {last}")));
            }
        }
        let s = &mut self.series;
        let mass = field.mass();
        s.times.push(t);
        s.dt.push(if dt.is_finite() { dt } else { 0.0 });
        s.mass.push(mass);
        s.linf.push(field.max());
        s.boundary_fraction.push(if mass > 0.0 { field.boundary_mass() / mass } else { 0.0 });
        for (i, &p) in s.p_values.iter().enumerate() {
            s.lp[i].push(field.lp_norm(p)?);
            s.dissipation[i].push(dissipation_functional(field, self.m, p)?);
            let r = match &self.mode {
                ResidualMode::Off => None,
                ResidualMode::DiffusionOnly => Some(diffusion_only_residual(field, rate, self.m, p)?),
                // p below the HLS threshold has no inequality to test
                ResidualMode::Interaction(params) => {
                    match differential_inequality_residual(field, rate, params, self.m, p) {
                        Ok(r) => Some(r),
                        Err(Error::Domain(_)) => None,
                        Err(e) => return Err(e),
                    }
                }
            };
            s.residual[i].push(r);
        }
        Ok(())
    }

    pub fn last_time(&self) -> f64 {
        self.series.times.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn series(&self) -> &NormSeries {
        &self.series
    }

    pub fn finish(self) -> NormSeries {
        self.series
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictTag {
    Bounded,
    Growing,
    BlowupSuspected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub peak_linf: f64,
    /// Max of `L^∞` over the last quarter of `[0, T]` divided by its max
    /// over the middle half.
    pub tail_to_peak: f64,
    /// Peak `L^∞` over the initial `L^∞`.
    pub growth_factor: f64,
    /// `L^∞(T) / L^∞(T/2)`.
    pub half_horizon_ratio: f64,
    pub max_boundary_fraction: f64,
    /// Some cell held more than 5% of the mass: the grid no longer resolves
    /// the profile.
    pub resolution_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tag: VerdictTag,
    pub evidence: Evidence,
}

fn window_max(series: &NormSeries, lo: f64, hi: f64, closed_hi: bool) -> Option<f64> {
    series
        .times
        .iter()
        .zip(&series.linf)
        .filter(|(&t, _)| t >= lo && (t < hi || (closed_hi && t <= hi)))
        .map(|(_, &l)| l)
        .reduce(f64::max)
}

/// Classifies a trajectory.
///
/// * `BlowupSuspected` when the run stopped on the cap or on `dt_min`.
/// * `Bounded` when it completed, the boundary fraction stayed below
///   [`BOUNDARY_TOLERANCE`], and the last-quarter maximum of `L^∞` is at
///   most 1.05 times the middle-half maximum.
/// * `Growing` when it completed and `L^∞(T) ≥ 2 L^∞(T/2)`.
/// * `Inconclusive` otherwise.
pub fn boundedness_verdict(series: &NormSeries, termination: Termination) -> Result<Verdict> {
    if series.is_empty() {
        return Err(Error::Data("cannot judge an empty series".into()));
    }
    let t_end = *series.times.last().unwrap();
    let peak = series.linf.iter().copied().fold(0.0, f64::max);
    let first = series.linf[0];
    let tail = window_max(series, 0.75 * t_end, t_end, true);
    let middle = window_max(series, 0.25 * t_end, 0.75 * t_end, false);
    let tail_to_peak = match (tail, middle) {
        (Some(t), Some(m)) if m > 0.0 => t / m,
        _ => f64::NAN,
    };
    let half_idx = series.times.iter().rposition(|&t| t <= 0.5 * t_end).unwrap_or(0);
    let half = series.linf[half_idx];
    let half_horizon_ratio = if half > 0.0 { series.linf.last().unwrap() / half } else { f64::NAN };
    let max_boundary = series.boundary_fraction.iter().copied().fold(0.0, f64::max);
    let mass = series.mass[0];
    let evidence = Evidence {
        peak_linf: peak,
        tail_to_peak,
        growth_factor: if first > 0.0 { peak / first } else { f64::NAN },
        half_horizon_ratio,
        max_boundary_fraction: max_boundary,
        resolution_flag: mass > 0.0 && peak * series.cell_volume / mass > RESOLUTION_FRACTION,
    };
    let tag = if termination != Termination::Completed {
        VerdictTag::BlowupSuspected
    } else if max_boundary < BOUNDARY_TOLERANCE && tail_to_peak <= 1.05 {
        VerdictTag::Bounded
    } else if half_horizon_ratio >= 2.0 {
        VerdictTag::Growing
    } else {
        VerdictTag::Inconclusive
    };
    Ok(Verdict { tag, evidence })
}

/// `sup_t y_k(t)` with `y_k = ‖ρ‖^{p_k}_{p_k}` for one rung of the bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YkSup {
    pub k: u32,
    pub p_k: f64,
    pub log_sup: f64,
    /// `(sup_t y_k)^{1/p_k} = sup_t ‖ρ‖_{p_k}`.
    pub root: f64,
}

/// `sup_t y_k` for `k = 0..=k_max`. Every `p_k` must be monitored.
pub fn yk_trajectory(series: &NormSeries, case: Case, n: usize, a: f64, k_max: u32) -> Result<Vec<YkSup>> {
    if series.is_empty() {
        return Err(Error::Data("empty series".into()));
    }
    (0..=k_max)
        .map(|k| {
            let p_k = pk_sequence(case, k, n, a)?;
            let idx = series
                .p_index(p_k)
                .ok_or_else(|| Error::Data(format!("p = {p_k} (k = {k}) is not monitored")))?;
            let root = series.lp[idx].iter().copied().fold(0.0, f64::max);
            Ok(YkSup { k, p_k, log_sup: p_k * root.ln(), root })
        })
        .collect()
}
