//! The subcommands. Each returns the process exit code or a [`CliError`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aggdiff_core::estimates::{constants_table, Case, IterationConstants};
use aggdiff_core::{
    classify, Error as CoreError, ExecuteError, Expect, ExperimentConfig, PotentialParams, Regime, Termination,
    Trajectory, VerdictTag,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{locate, ConfigError, Overrides};
use crate::{exit, CliError};

/// Exit code for a finished trajectory under its expectation.
pub fn trajectory_code(t: &Trajectory, expect: Expect) -> i32 {
    let blew_up = t.outcome.termination != Termination::Completed;
    match (expect, blew_up) {
        (Expect::Blowup, true) => exit::OK,
        (Expect::Blowup, false) => exit::FAILED,
        (_, true) => exit::BLOWUP,
        (Expect::Bounded, false) if t.verdict.tag != VerdictTag::Bounded => exit::FAILED,
        _ => exit::OK,
    }
}

fn execute(cfg: &ExperimentConfig, text: &str) -> Result<Trajectory, CliError> {
    cfg.execute_detailed().map_err(|e| match e {
        ExecuteError::Config(e) => CliError::Config(locate(text, &e)),
        ExecuteError::Run(f) => CliError::Invariant(f.to_string()),
    })
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub name: &'a str,
    pub regime: Regime,
    pub termination: Termination,
    pub t_final: f64,
    pub steps: usize,
    pub max_mass_drift: f64,
    pub min_value: f64,
    pub initial_linf: f64,
    pub peak_linf: f64,
    pub near_boundary: bool,
    pub verdict: &'a aggdiff_core::Verdict,
    pub expect: Expect,
    pub exit_code: i32,
}

fn report<'a>(name: &'a str, cfg: &ExperimentConfig, t: &'a Trajectory) -> Result<RunReport<'a>, CliError> {
    let o = &t.outcome;
    Ok(RunReport {
        name,
        regime: cfg.regime().map_err(|e| CliError::Config(ConfigError::plain(e.to_string())))?,
        termination: o.termination,
        t_final: o.t_final,
        steps: o.steps,
        max_mass_drift: o.max_mass_drift,
        min_value: o.min_value,
        initial_linf: o.initial_linf,
        peak_linf: o.peak_linf,
        near_boundary: t.near_boundary,
        verdict: &t.verdict,
        expect: cfg.expect,
        exit_code: trajectory_code(t, cfg.expect),
    })
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.verdict.json`.
fn write_artifacts(dir: &Path, stem: &str, t: &Trajectory, report: &RunReport) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut csv = std::io::BufWriter::new(fs::File::create(dir.join(format!("{stem}.csv")))?);
    t.outcome.series.write_csv(&mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    csv.flush()?;
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.verdict.json")), json + "\n")?;
    Ok(())
}

pub fn effective_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(&cfg.effective()).unwrap_or_else(|e| format!("# effective config unavailable: {e}\n"))
}

/// `run`: one trajectory, its CSV series and verdict JSON.
pub fn run(cfg: &ExperimentConfig, text: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let name = cfg.output.name.clone().unwrap_or_else(|| "run".into());
    eprint!("# effective configuration\n{}", effective_toml(cfg));
    let t = execute(cfg, text)?;
    let rep = report(&name, cfg, &t)?;
    if let Some(dir) = &cfg.output.dir {
        let dir = PathBuf::from(dir);
        write_artifacts(&dir, &name, &t, &rep)?;
        fs::write(dir.join(format!("{name}.config.toml")), effective_toml(cfg))?;
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&rep).map_err(|e| CliError::Io(e.to_string()))?)?;
    Ok(rep.exit_code)
}

/// Potential and diffusion exponent from flags alone.
fn params_from_flags(o: &Overrides) -> Result<(PotentialParams, f64), CliError> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Config(ConfigError::plain(format!("{flag} is required without a config file"))))
    };
    let a = need(o.a, "--A")?;
    let m = need(o.m, "--m")?;
    let n = o.n.ok_or_else(|| CliError::Config(ConfigError::plain("--n is required without a config file")))?;
    let lambda = o.lambda.unwrap_or(0.0);
    let b = if lambda > 0.0 { need(o.b, "--B")? } else { o.b.unwrap_or(0.0) };
    let params = PotentialParams::new(a, b, lambda, n).map_err(|e| CliError::Config(flag_error(&e)))?;
    Ok((params, m))
}

fn flag_error(e: &CoreError) -> ConfigError {
    let mut err = locate("", e);
    err.flag = err.key.as_ref().map(|k| format!("--{}", k.rsplit('.').next().unwrap_or(k)));
    err
}

/// `classify`: the regime of the configured or flagged model, as JSON.
pub fn classify_cmd(cfg: Option<&ExperimentConfig>, o: &Overrides, out: &mut dyn Write) -> Result<i32, CliError> {
    let (params, m) = match cfg {
        Some(c) => (c.params().map_err(|e| CliError::Config(ConfigError::plain(e.to_string())))?, c.diffusion.m),
        None => params_from_flags(o)?,
    };
    let regime = classify(&params, m).map_err(|e| CliError::Config(flag_error(&e)))?;
    let body = json!({
        "A": params.a, "B": params.b, "lambda": params.lambda, "n": params.n, "m": m,
        "tag": regime.tag, "witnesses": regime.witnesses,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&body).map_err(|e| CliError::Io(e.to_string()))?)?;
    Ok(exit::OK)
}

/// Inputs of the `constants` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsRequest {
    pub case: Case,
    pub m: f64,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub k_max: u32,
}

pub fn constants_rows(req: &ConstantsRequest) -> Result<Vec<IterationConstants>, CliError> {
    constants_table(req.case, req.m, req.n, req.a, req.b, req.k_max).map_err(|e| match e {
        CoreError::Validity { .. } => CliError::Failed(e.to_string()),
        other => CliError::Config(flag_error(&other)),
    })
}

/// `constants`: the bootstrap exponent table, as JSON.
pub fn constants(req: &ConstantsRequest, out: &mut dyn Write) -> Result<i32, CliError> {
    let rows = constants_rows(req)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(|e| CliError::Io(e.to_string()))?)?;
    Ok(exit::OK)
}

/// Worker count: flag, then `AGGDIFF_WORKERS`, then the config, then the
/// number of available cores.
pub fn worker_count(flag: Option<usize>, cfg: &ExperimentConfig) -> usize {
    flag.or_else(|| std::env::var("AGGDIFF_WORKERS").ok().and_then(|v| v.trim().parse().ok()))
        .or(cfg.sweep.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub mass: f64,
    pub m: f64,
    pub regime: String,
    pub termination: String,
    pub t_final: f64,
    pub steps: usize,
    pub verdict: String,
    pub peak_linf: f64,
    pub growth_factor: f64,
    pub max_mass_drift: f64,
    pub exit_code: i32,
}

impl SweepRow {
    const HEADER: &'static str =
        "index,mass,m,regime,termination,t_final,steps,verdict,peak_linf,growth_factor,max_mass_drift,exit_code";

    fn csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{}",
            self.index,
            self.mass,
            self.m,
            self.regime,
            self.termination,
            self.t_final,
            self.steps,
            self.verdict,
            self.peak_linf,
            self.growth_factor,
            self.max_mass_drift,
            self.exit_code
        )
    }
}

/// Exit-code precedence when several runs disagree.
fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        exit::CONFIG => 4,
        exit::INVARIANT => 3,
        exit::BLOWUP => 2,
        exit::FAILED => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// `sweep`: every (mass, m) combination, run in parallel; per-run
/// artifacts as they finish and one summary at the end.
pub fn sweep(cfg: &ExperimentConfig, text: &str, workers: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let masses = if cfg.sweep.masses.is_empty() { vec![cfg.initial.mass] } else { cfg.sweep.masses.clone() };
    let ms = if cfg.sweep.m_values.is_empty() { vec![cfg.diffusion.m] } else { cfg.sweep.m_values.clone() };
    let jobs: Vec<ExperimentConfig> = masses
        .iter()
        .flat_map(|&mass| ms.iter().map(move |&m| (mass, m)))
        .map(|(mass, m)| {
            let mut c = cfg.clone();
            c.initial.mass = mass;
            c.diffusion.m = m;
            c
        })
        .collect();
    for job in &jobs {
        job.validate().map_err(|e| CliError::Config(locate(text, &e)))?;
    }
    let name = cfg.output.name.clone().unwrap_or_else(|| "sweep".into());
    let dir = cfg.output.dir.as_ref().map(PathBuf::from);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SweepRow, CliError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let row = sweep_one(i, job, text, &name, dir.as_deref());
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let mut code = exit::OK;
    let mut lines = vec![SweepRow::HEADER.to_string()];
    for r in results.into_inner().unwrap().into_iter().flatten() {
        let row = r?;
        code = worst(code, row.exit_code);
        lines.push(row.csv());
    }
    let summary = lines.join("\n") + "\n";
    if let Some(dir) = &dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{name}_summary.csv")), &summary)?;
    }
    out.write_all(summary.as_bytes())?;
    Ok(code)
}

fn sweep_one(
    index: usize,
    cfg: &ExperimentConfig,
    text: &str,
    name: &str,
    dir: Option<&Path>,
) -> Result<SweepRow, CliError> {
    let stem = format!("{name}_{index:03}");
    let t = match execute(cfg, text) {
        Ok(t) => t,
        Err(CliError::Invariant(msg)) => {
            return Ok(SweepRow {
                index,
                mass: cfg.initial.mass,
                m: cfg.diffusion.m,
                regime: String::new(),
                termination: format!("error: {}", msg.replace(',', ";")),
                t_final: f64::NAN,
                steps: 0,
                verdict: String::new(),
                peak_linf: f64::NAN,
                growth_factor: f64::NAN,
                max_mass_drift: f64::NAN,
                exit_code: exit::INVARIANT,
            })
        }
        Err(e) => return Err(e),
    };
    let rep = report(&stem, cfg, &t)?;
    if let Some(dir) = dir {
        write_artifacts(dir, &stem, &t, &rep)?;
    }
    Ok(SweepRow {
        index,
        mass: cfg.initial.mass,
        m: cfg.diffusion.m,
        regime: format!("{:?}", rep.regime.tag),
        termination: format!("{:?}", rep.termination),
        t_final: rep.t_final,
        steps: rep.steps,
        verdict: format!("{:?}", t.verdict.tag),
        peak_linf: rep.peak_linf,
        growth_factor: t.verdict.evidence.growth_factor,
        max_mass_drift: rep.max_mass_drift,
        exit_code: rep.exit_code,
    })
}
