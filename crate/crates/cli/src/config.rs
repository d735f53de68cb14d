//! Config text → [`ExperimentConfig`], with diagnostics that name the
//! offending key and the line it sits on.

use std::fmt;

use aggdiff_core::{Error as CoreError, Expect, ExperimentConfig, ProfileKind};
use clap::Args;

/// A rejected configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line of the offending key, when it could be located.
    pub line: Option<usize>,
    /// Dotted key path, e.g. `potential.lambda`.
    pub key: Option<String>,
    /// Where the value came from when not from the file, e.g. `--lambda`.
    pub flag: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(flag) = &self.flag {
            write!(f, "flag {flag}: ")?;
        } else if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn plain(message: impl Into<String>) -> Self {
        Self { line: None, key: None, flag: None, message: message.into() }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the section header when the
/// key is absent from the text.
pub fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        let in_section = current == section || current.starts_with(&format!("{section}."));
        if let Some((lhs, _)) = line.split_once('=') {
            let lhs = lhs.trim().trim_matches('"');
            if (in_section && lhs == key) || (current.is_empty() && lhs == format!("{section}.{key}")) {
                return Some(i + 1);
            }
        }
    }
    header
}

/// Message prefixes of the core validation errors and the key each one
/// concerns. Order matters: `A > B` must win over `A > -n`.
const KEY_OF_MESSAGE: &[(&str, &str, &str)] = &[
    ("lambda", "potential", "lambda"),
    ("A > B", "potential", "B"),
    ("A ", "potential", "A"),
    ("B ", "potential", "B"),
    ("n >= 2", "potential", "n"),
    ("grid.n_dim", "grid", "n_dim"),
    ("grid dimension", "grid", "n_dim"),
    ("N ", "grid", "N"),
    ("L ", "grid", "L"),
    ("m ", "diffusion", "m"),
    ("T_end", "sim", "t_end"),
    ("0 < cfl", "sim", "cfl"),
    ("0 < dt_min", "sim", "dt_min"),
    ("blowup_cap_factor", "sim", "blowup_cap_factor"),
    ("output_every", "sim", "output_every"),
    ("epsilon_mollify", "sim", "epsilon_mollify"),
    ("monitored p", "sim", "monitored_p"),
    ("mass", "initial", "mass"),
    ("target mass", "initial", "mass"),
    ("sigma", "initial", "profile"),
    ("radius", "initial", "profile"),
    ("width", "initial", "profile"),
    ("separation", "initial", "profile"),
    ("profile", "initial", "profile"),
];

fn inner_message(e: &CoreError) -> &str {
    match e {
        CoreError::ParamDomain(s) | CoreError::Domain(s) | CoreError::RegimeMismatch(s) | CoreError::Data(s) => s,
        _ => "",
    }
}

/// Attaches key and line information to a semantic error.
pub fn locate(text: &str, e: &CoreError) -> ConfigError {
    let msg = inner_message(e);
    let hit = KEY_OF_MESSAGE.iter().find(|(prefix, _, _)| msg.starts_with(prefix));
    match hit {
        Some((_, section, key)) => ConfigError {
            line: key_line(text, section, key),
            key: Some(format!("{section}.{key}")),
            flag: None,
            message: e.to_string(),
        },
        None => ConfigError::plain(e.to_string()),
    }
}

/// Parses and fully validates a configuration. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    load_with(text, &Overrides::default())
}

fn parse_expect(s: &str) -> Result<Expect, String> {
    match s {
        "any" => Ok(Expect::Any),
        "bounded" => Ok(Expect::Bounded),
        "blowup" => Ok(Expect::Blowup),
        _ => Err(format!("expected one of any, bounded, blowup; got `{s}`")),
    }
}

/// Command-line flags mirroring config keys; a set flag wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long = "N")]
    pub cells: Option<usize>,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub half_width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Gaussian width; replaces the configured profile.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "t_end", allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long = "dt_min")]
    pub dt_min: Option<f64>,
    #[arg(long = "blowup_cap_factor")]
    pub blowup_cap_factor: Option<f64>,
    #[arg(long = "output_every")]
    pub output_every: Option<f64>,
    #[arg(long = "epsilon_mollify")]
    pub epsilon_mollify: Option<f64>,
    #[arg(long = "monitored_p", value_delimiter = ',')]
    pub monitored_p: Vec<f64>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    pub dir: Option<String>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_parser = parse_expect)]
    pub expect: Option<Expect>,
}

impl Overrides {
    /// Writes every set flag into `cfg`; returns the dotted keys touched
    /// together with their flag spelling.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Vec<(String, String)> {
        let mut touched = Vec::new();
        let mut set = |key: &str, flag: &str| touched.push((key.to_string(), flag.to_string()));
        if let Some(v) = self.a {
            cfg.potential.a = v;
            set("potential.A", "--A");
        }
        if let Some(v) = self.b {
            cfg.potential.b = Some(v);
            set("potential.B", "--B");
        }
        if let Some(v) = self.lambda {
            cfg.potential.lambda = v;
            set("potential.lambda", "--lambda");
        }
        if let Some(v) = self.n {
            cfg.potential.n = v;
            set("potential.n", "--n");
        }
        if let Some(v) = self.m {
            cfg.diffusion.m = v;
            set("diffusion.m", "--m");
        }
        if let Some(v) = self.cells {
            cfg.grid.cells = v;
            set("grid.N", "--N");
        }
        if let Some(v) = self.half_width {
            cfg.grid.half_width = v;
            set("grid.L", "--L");
        }
        if let Some(v) = self.mass {
            cfg.initial.mass = v;
            set("initial.mass", "--mass");
        }
        if let Some(v) = self.sigma {
            cfg.initial.profile = ProfileKind::Gaussian { sigma: v };
            set("initial.profile", "--sigma");
        }
        if let Some(v) = self.t_end {
            cfg.sim.t_end = v;
            set("sim.t_end", "--t_end");
        }
        if let Some(v) = self.cfl {
            cfg.sim.cfl = Some(v);
            set("sim.cfl", "--cfl");
        }
        if let Some(v) = self.dt_min {
            cfg.sim.dt_min = Some(v);
            set("sim.dt_min", "--dt_min");
        }
        if let Some(v) = self.blowup_cap_factor {
            cfg.sim.blowup_cap_factor = Some(v);
            set("sim.blowup_cap_factor", "--blowup_cap_factor");
        }
        if let Some(v) = self.output_every {
            cfg.sim.output_every = Some(v);
            set("sim.output_every", "--output_every");
        }
        if let Some(v) = self.epsilon_mollify {
            cfg.sim.epsilon_mollify = Some(v);
            set("sim.epsilon_mollify", "--epsilon_mollify");
        }
        if !self.monitored_p.is_empty() {
            cfg.sim.monitored_p = Some(self.monitored_p.clone());
            set("sim.monitored_p", "--monitored_p");
        }
        if let Some(v) = &self.dir {
            cfg.output.dir = Some(v.clone());
            set("output.dir", "--dir");
        }
        if let Some(v) = &self.name {
            cfg.output.name = Some(v.clone());
            set("output.name", "--name");
        }
        if let Some(v) = self.expect {
            cfg.expect = v;
            set("expect", "--expect");
        }
        touched
    }
}

/// Parses `text`, applies `overrides` and validates the result. Errors on
/// overridden keys name the flag instead of a file line.
pub fn load_with(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of(text, s.start)),
        key: None,
        flag: None,
        message: e.message().trim().to_string(),
    })?;
    let touched = overrides.apply(&mut cfg);
    cfg.validate().map_err(|e| {
        let mut err = locate(text, &e);
        if let Some((_, flag)) = touched.iter().find(|(k, _)| Some(k) == err.key.as_ref()) {
            err.flag = Some(flag.clone());
            err.line = None;
        }
        err
    })?;
    Ok(cfg)
}
