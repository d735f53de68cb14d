//! Explicit upwind finite-volume integrator for
//! `ρ_t = Δρ^m + div(ρ∇(U∗ρ))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DensityField, Grid};
use crate::kernel_model::PotentialParams;
use crate::monitor::{NormSeries, Recorder};
use crate::operators::KernelCache;

/// Values below this are flushed to zero after each update so the far field
/// never drifts into subnormal arithmetic.
pub const FLUSH_BELOW: f64 = 1e-200;

/// Largest fraction of a cell's content that may leave it in one step.
const OUTFLOW_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub dt_min: f64,
    /// Termination threshold as a multiple of the initial `L^∞`.
    pub blowup_cap_factor: f64,
    pub output_every: f64,
    /// Mollification radius; `None` means `h/2`.
    pub epsilon_mollify: Option<f64>,
    pub monitored_p: Vec<f64>,
}

impl SimConfig {
    pub fn new(m: f64, t_end: f64) -> Self {
        Self {
            m,
            t_end,
            cfl: 0.45,
            dt_min: 1e-12,
            blowup_cap_factor: 1e6,
            output_every: if t_end > 0.0 { t_end / 50.0 } else { 1.0 },
            epsilon_mollify: None,
            monitored_p: vec![2.0, 3.0, 5.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParamDomain(msg));
        if !(self.m.is_finite() && self.m > 0.0) {
            return bad(format!("m > 0 violated (m = {})", self.m));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("T_end >= 0 violated (T_end = {})", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("0 < cfl <= 1 violated (cfl = {})", self.cfl));
        }
        if !(self.dt_min > 0.0) || (self.t_end > 0.0 && self.dt_min >= self.t_end) {
            return bad(format!("0 < dt_min < T_end violated (dt_min = {})", self.dt_min));
        }
        if !(self.blowup_cap_factor > 1.0) {
            return bad(format!("blowup_cap_factor > 1 violated ({})", self.blowup_cap_factor));
        }
        if !(self.output_every > 0.0) {
            return bad(format!("output_every > 0 violated ({})", self.output_every));
        }
        if let Some(e) = self.epsilon_mollify {
            if !(e >= 0.0) {
                return bad(format!("epsilon_mollify >= 0 violated ({e})"));
            }
        }
        if let Some(p) = self.monitored_p.iter().find(|p| !(**p >= 1.0)) {
            return bad(format!("monitored p >= 1 violated (p = {p})"));
        }
        Ok(())
    }
}

/// `v^m` per cell, avoiding `powf` when `2m` is an integer.
fn porous_pressure(v: &[f64], m: f64) -> Vec<f64> {
    let twice = 2.0 * m;
    if twice.fract() == 0.0 && twice <= 16.0 {
        let whole = m.floor() as i32;
        if m.fract() == 0.0 {
            v.iter().map(|&x| x.powi(whole)).collect()
        } else {
            v.iter().map(|&x| x.powi(whole) * x.sqrt()).collect()
        }
    } else {
        v.iter().map(|&x| if x > 0.0 { x.powf(m) } else { 0.0 }).collect()
    }
}

/// Cell-centered advective velocity `u = −∇(U∗ρ)`.
#[derive(Debug, Clone)]
pub struct Velocity {
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl Velocity {
    pub fn max_speed(&self) -> f64 {
        self.ux.iter().zip(&self.uy).map(|(x, y)| x * x + y * y).fold(0.0, f64::max).sqrt()
    }
}

pub fn advective_velocity(field: &DensityField, cache: &KernelCache) -> Result<Velocity> {
    let (gx, gy) = crate::operators::interaction_gradient(field, cache)?;
    Ok(Velocity { ux: gx.into_iter().map(|g| -g).collect(), uy: gy.into_iter().map(|g| -g).collect() })
}

/// Right-hand side of the scheme at one state.
#[derive(Debug, Clone)]
pub struct Rates {
    /// `−div F` per cell.
    pub rate: Vec<f64>,
    pub max_speed: f64,
    /// Largest admissible step from the CFL rule alone.
    pub dt_cfl: f64,
    /// Largest step keeping every cell's outflow below 90% of its content.
    pub dt_positive: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    BlowupCap,
    DtMin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub linf: f64,
    pub min_value: f64,
    pub max_speed: f64,
    pub boundary_fraction: f64,
    /// The positivity guard, not the CFL rule, set `dt`.
    pub guard_limited: bool,
    /// The step was set by the distance to the next output time.
    pub output_clipped: bool,
}

/// Outcome of [`Solver::run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: DensityField,
    pub series: NormSeries,
    pub termination: Termination,
    pub t_final: f64,
    pub steps: usize,
    pub initial_linf: f64,
    pub peak_linf: f64,
    /// Smallest cell value seen over all steps.
    pub min_value: f64,
    /// Largest relative mass change against the initial mass over all steps.
    pub max_mass_drift: f64,
}

/// A failed run together with the last valid state.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub last_state: DensityField,
    pub t: f64,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (last valid state at t = {})", self.error, self.t)
    }
}

impl std::error::Error for RunFailure {}

/// Grid, interaction kernel and time-stepping parameters of one trajectory.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: Grid,
    config: SimConfig,
    params: Option<PotentialParams>,
    cache: Option<KernelCache>,
}

impl Solver {
    /// `params = None` switches the interaction off (pure diffusion).
    pub fn new(grid: Grid, params: Option<PotentialParams>, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let cache = match params {
            Some(p) => {
                let eps = config.epsilon_mollify.unwrap_or_else(|| KernelCache::default_epsilon(&grid));
                Some(KernelCache::new(grid, p, eps)?)
            }
            None => None,
        };
        Ok(Self { grid, config, params, cache })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn params(&self) -> Option<&PotentialParams> {
        self.params.as_ref()
    }

    pub fn cache(&self) -> Option<&KernelCache> {
        self.cache.as_ref()
    }

    pub fn velocity(&self, field: &DensityField) -> Result<Velocity> {
        match &self.cache {
            Some(c) => advective_velocity(field, c),
            None => Ok(Velocity { ux: vec![0.0; self.grid.len()], uy: vec![0.0; self.grid.len()] }),
        }
    }

    /// Upwind fluxes and the two step limits at `field`.
    pub fn rates(&self, field: &DensityField) -> Result<Rates> {
        if field.grid() != &self.grid {
            return Err(Error::Domain("field lives on a different grid than the solver".into()));
        }
        let v = field.values();
        let m = self.config.m;
        let h = self.grid.spacing();
        // the interaction gradient g; the velocity is −g
        let (gx, gy) = match &self.cache {
            Some(c) => c.gradient(v),
            None => (vec![0.0; v.len()], vec![0.0; v.len()]),
        };
        let vm = porous_pressure(v, m);
        let mut rate = vec![0.0; v.len()];
        let mut outflow = vec![0.0; v.len()];
        let n = self.grid.cells_per_axis();
        let mut face = |l: usize, r: usize, gl: f64, gr: f64| {
            let u = -0.5 * (gl + gr);
            let upwind = if u > 0.0 { v[l] } else { v[r] };
            let flux = -(vm[r] - vm[l]) / h + u * upwind;
            rate[l] -= flux / h;
            rate[r] += flux / h;
            if flux > 0.0 {
                outflow[l] += flux;
            } else {
                outflow[r] -= flux;
            }
        };
        if self.grid.n_dim() == 1 {
            for i in 0..n - 1 {
                face(i, i + 1, gx[i], gx[i + 1]);
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    if i + 1 < n {
                        face(k, k + n, gx[k], gx[k + n]);
                    }
                    if j + 1 < n {
                        face(k, k + 1, gy[k], gy[k + 1]);
                    }
                }
            }
        }
        // m v^{m−1} = m v^m / v
        let wave = v
            .iter()
            .zip(&vm)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, &xm)| m * xm / x)
            .fold(0.0, f64::max)
            .max(1e-30);
        let max_speed = gx.iter().zip(&gy).map(|(x, y)| x * x + y * y).fold(0.0, f64::max).sqrt();
        let d = self.grid.n_dim() as f64;
        let dt_diff = h * h / (2.0 * d * wave);
        let dt_adv = if max_speed > 0.0 { h / (2.0 * max_speed) } else { f64::INFINITY };
        let dt_cfl = self.config.cfl * dt_diff.min(dt_adv);
        let dt_positive = v
            .iter()
            .zip(&outflow)
            .filter(|(_, &o)| o > 0.0)
            .map(|(&x, &o)| OUTFLOW_FRACTION * h * x / o)
            .fold(f64::INFINITY, f64::min);
        Ok(Rates { rate, max_speed, dt_cfl, dt_positive })
    }

    /// One forward-Euler step of length at most `dt_cap`.
    pub fn step(&self, field: &DensityField, t: f64, dt_cap: f64) -> Result<(DensityField, StepReport)> {
        let rates = self.rates(field)?;
        self.advance(field, &rates, t, dt_cap)
    }

    fn advance(&self, field: &DensityField, rates: &Rates, t: f64, dt_cap: f64) -> Result<(DensityField, StepReport)> {
        let dt_free = rates.dt_cfl.min(rates.dt_positive);
        if dt_free < self.config.dt_min {
            return Err(Error::BlowupSuspected { t, dt: dt_free });
        }
        let dt = dt_free.min(dt_cap);
        let linf_old = field.max();
        let mut out = Vec::with_capacity(field.values().len());
        let mut min_value = f64::INFINITY;
        for (&v, &r) in field.values().iter().zip(&rates.rate) {
            let mut x = v + dt * r;
            if !x.is_finite() {
                return Err(Error::Invariant(format!("non-finite density at t = {t}")));
            }
            min_value = min_value.min(x);
            if x < -1e-14 * linf_old {
                return Err(Error::Invariant(format!("negative density {x:e} at t = {t}")));
            }
            if x < FLUSH_BELOW {
                x = 0.0;
            }
            out.push(x);
        }
        let next = DensityField::from_raw(self.grid, out);
        let mass = next.mass();
        let report = StepReport {
            t: t + dt,
            dt,
            mass,
            linf: next.max(),
            min_value,
            max_speed: rates.max_speed,
            boundary_fraction: if mass > 0.0 { next.boundary_mass() / mass } else { 0.0 },
            guard_limited: rates.dt_positive < rates.dt_cfl,
            output_clipped: dt_cap <= dt_free,
        };
        Ok((next, report))
    }

    /// Integrates to `T_end`, recording at every output time.
    pub fn run(&self, initial: &DensityField) -> std::result::Result<RunOutcome, Box<RunFailure>> {
        self.run_with(initial, |_, _, _| {})
    }

    /// As [`run`](Self::run), calling `observe(t, state, rates)` at every
    /// output time.
    pub fn run_with(
        &self,
        initial: &DensityField,
        mut observe: impl FnMut(f64, &DensityField, &Rates),
    ) -> std::result::Result<RunOutcome, Box<RunFailure>> {
        let fail = |error: Error, state: &DensityField, t: f64| {
            Box::new(RunFailure { error, last_state: state.clone(), t })
        };
        let mut recorder = Recorder::new(&self.config, self.params, initial)
            .map_err(|e| fail(e, initial, 0.0))?;
        let mass0 = initial.mass();
        let linf0 = initial.max();
        let cap = self.config.blowup_cap_factor * linf0;
        let mut state = initial.clone();
        let mut t = 0.0;
        let mut k_out = 0usize;
        let mut steps = 0usize;
        let mut peak = linf0;
        let mut min_value = initial.min();
        let mut drift = 0.0f64;
        let mut last_dt = f64::NAN;
        let t_end = self.config.t_end;
        let termination = loop {
            let rates = self.rates(&state).map_err(|e| fail(e, &state, t))?;
            let at_output = t >= (k_out as f64) * self.config.output_every || t >= t_end;
            if at_output {
                recorder.record(t, last_dt, &state, &rates.rate).map_err(|e| fail(e, &state, t))?;
                observe(t, &state, &rates);
                k_out += 1;
            }
            if t >= t_end {
                break Termination::Completed;
            }
            let next_out = ((k_out as f64) * self.config.output_every).min(t_end);
            let (next, report) = match self.advance(&state, &rates, t, next_out - t) {
                Ok(x) => x,
                Err(Error::BlowupSuspected { .. }) => break Termination::DtMin,
                Err(e) => return Err(fail(e, &state, t)),
            };
            steps += 1;
            t = if report.output_clipped { next_out } else { report.t };
            last_dt = report.dt;
            min_value = min_value.min(report.min_value);
            drift = drift.max((report.mass - mass0).abs() / mass0.max(f64::MIN_POSITIVE));
            peak = peak.max(report.linf);
            state = next;
            if report.linf > cap {
                break Termination::BlowupCap;
            }
        };
        if termination != Termination::Completed {
            let rates = self.rates(&state).map_err(|e| fail(e, &state, t))?;
            if recorder.last_time() < t {
                recorder.record(t, last_dt, &state, &rates.rate).map_err(|e| fail(e, &state, t))?;
            }
            observe(t, &state, &rates);
        }
        Ok(RunOutcome {
            final_state: state,
            series: recorder.finish(),
            termination,
            t_final: t,
            steps,
            initial_linf: linf0,
            peak_linf: peak,
            min_value,
            max_mass_drift: drift,
        })
    }
}
