//! Serializable description of one experiment and its translation into
//! solver inputs. Parsing from text, with line-numbered diagnostics, lives
//! in the CLI; this module owns the schema and the semantic checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::Case;
use crate::field::{init_profile, Grid, InitialProfile, ProfileKind};
use crate::kernel_model::{classify, PotentialParams, Regime};
use crate::monitor::{boundedness_verdict, Verdict, VerdictTag};
use crate::solver::{RunFailure, RunOutcome, SimConfig, Solver, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Run,
    Classify,
    Constants,
    Verify,
    Sweep,
}

/// What a run is expected to show. `Blowup` marks negative controls, for
/// which a blow-up termination is the success outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Any,
    Bounded,
    Blowup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B", default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    pub n: usize,
}

impl PotentialSection {
    pub fn params(&self) -> Result<PotentialParams> {
        match (self.lambda > 0.0, self.b) {
            (true, None) => Err(Error::ParamDomain("B is required when lambda > 0".into())),
            (true, Some(b)) => PotentialParams::new(self.a, b, self.lambda, self.n),
            // B is ignored without repulsion
            (false, _) => PotentialParams::new(self.a, 0.0, self.lambda, self.n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSection {
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N")]
    pub cells: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    /// Grid dimension; defaults to the potential's `n`.
    #[serde(default)]
    pub n_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub mass: f64,
    pub profile: ProfileKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub dt_min: Option<f64>,
    #[serde(default)]
    pub blowup_cap_factor: Option<f64>,
    #[serde(default)]
    pub output_every: Option<f64>,
    #[serde(default)]
    pub epsilon_mollify: Option<f64>,
    #[serde(default)]
    pub monitored_p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for per-run artifacts; `None` writes nothing.
    #[serde(default)]
    pub dir: Option<String>,
    /// Stem of the artifact file names.
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub masses: Vec<f64>,
    #[serde(default)]
    pub m_values: Vec<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub case: Case,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// Repulsive exponent for the strong case when no potential is given.
    #[serde(rename = "B", default)]
    pub b: Option<f64>,
}

fn default_k_max() -> u32 {
    10
}

/// One experiment: the model, its discretization and what to do with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub expect: Expect,
    pub potential: PotentialSection,
    pub diffusion: DiffusionSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub constants: Option<ConstantsSection>,
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<PotentialParams> {
        self.potential.params()
    }

    pub fn grid(&self) -> Result<Grid> {
        let dim = self.grid.n_dim.unwrap_or(self.potential.n);
        Grid::new(dim, self.grid.cells, self.grid.half_width)
    }

    /// Solver settings with every unset key at its default.
    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        let mut c = SimConfig::new(self.diffusion.m, s.t_end);
        if let Some(v) = s.cfl {
            c.cfl = v;
        }
        if let Some(v) = s.dt_min {
            c.dt_min = v;
        }
        if let Some(v) = s.blowup_cap_factor {
            c.blowup_cap_factor = v;
        }
        if let Some(v) = s.output_every {
            c.output_every = v;
        }
        c.epsilon_mollify = s.epsilon_mollify;
        if let Some(p) = &s.monitored_p {
            c.monitored_p = p.clone();
        }
        c
    }

    /// Copy with every defaulted solver key written out.
    pub fn effective(&self) -> Self {
        let mut out = self.clone();
        let c = self.sim_config();
        out.sim = SimSection {
            t_end: c.t_end,
            cfl: Some(c.cfl),
            dt_min: Some(c.dt_min),
            blowup_cap_factor: Some(c.blowup_cap_factor),
            output_every: Some(c.output_every),
            epsilon_mollify: c.epsilon_mollify,
            monitored_p: Some(c.monitored_p),
        };
        out.grid.n_dim = Some(self.grid.n_dim.unwrap_or(self.potential.n));
        out
    }

    /// Every semantic check short of running.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        classify(&params, self.diffusion.m)?;
        let grid = self.grid()?;
        if grid.n_dim() != params.n {
            return Err(Error::ParamDomain(format!(
                "grid.n_dim = {} must equal potential.n = {}",
                grid.n_dim(),
                params.n
            )));
        }
        self.sim_config().validate()?;
        init_profile(&self.initial.profile, grid, self.initial.mass)?;
        Ok(())
    }

    pub fn regime(&self) -> Result<Regime> {
        classify(&self.params()?, self.diffusion.m)
    }

    pub fn initial_profile(&self) -> Result<InitialProfile> {
        init_profile(&self.initial.profile, self.grid()?, self.initial.mass)
    }

    pub fn solver(&self) -> Result<Solver> {
        Solver::new(self.grid()?, Some(self.params()?), self.sim_config())
    }

    /// Validates, discretizes the initial profile and runs to completion.
    pub fn execute(&self) -> Result<Trajectory> {
        self.validate()?;
        let initial = self.initial_profile()?;
        let solver = self.solver()?;
        let outcome = solver.run(&initial.field).map_err(|f| f.error.clone())?;
        let verdict = boundedness_verdict(&outcome.series, outcome.termination)?;
        Ok(Trajectory { near_boundary: initial.near_boundary, outcome, verdict })
    }

    /// As [`execute`](Self::execute), keeping the failure context.
    pub fn execute_detailed(&self) -> std::result::Result<Trajectory, ExecuteError> {
        self.validate().map_err(ExecuteError::Config)?;
        let initial = self.initial_profile().map_err(ExecuteError::Config)?;
        let solver = self.solver().map_err(ExecuteError::Config)?;
        let outcome = solver.run(&initial.field).map_err(ExecuteError::Run)?;
        let verdict = boundedness_verdict(&outcome.series, outcome.termination).map_err(ExecuteError::Config)?;
        Ok(Trajectory { near_boundary: initial.near_boundary, outcome, verdict })
    }
}

#[derive(Debug)]
pub enum ExecuteError {
    Config(Error),
    Run(Box<RunFailure>),
}

impl std::fmt::Display for ExecuteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecuteError::Config(e) => write!(f, "{e}"),
            ExecuteError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExecuteError {}

/// A finished run with its verdict.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub near_boundary: bool,
    pub outcome: RunOutcome,
    pub verdict: Verdict,
}

impl Trajectory {
    /// Whether the run delivered what the configuration expects.
    pub fn meets(&self, expect: Expect) -> bool {
        match expect {
            Expect::Any => true,
            Expect::Bounded => self.verdict.tag == VerdictTag::Bounded,
            Expect::Blowup => self.outcome.termination != Termination::Completed,
        }
    }
}
