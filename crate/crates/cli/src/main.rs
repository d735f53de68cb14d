use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggdiff_cli::commands::{self, ConstantsRequest};
use aggdiff_cli::config::{load_with, Overrides};
use aggdiff_cli::verify::verify;
use aggdiff_cli::{exit, CliError, ConfigError};
use aggdiff_core::estimates::Case;
use aggdiff_core::{ExperimentConfig, Mode};
use clap::{Parser, Subcommand};

/// Aggregation-diffusion experiments: runs, regime classification,
/// bootstrap constants and inequality checks.
#[derive(Debug, Parser)]
#[command(name = "aggdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory; prints the verdict JSON.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the regime of a config, or of --A/--B/--lambda/--n/--m.
    Classify {
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the bootstrap exponent table.
    Constants {
        config: Option<PathBuf>,
        #[arg(long)]
        case: Option<Case>,
        #[arg(long)]
        kmax: Option<u32>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the inequality property suites.
    Verify {
        /// Grid size of the Riesz composition check.
        #[arg(long = "N", default_value_t = 256)]
        cells: usize,
    },
    /// Run a grid of trajectories over masses and/or diffusion exponents.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        masses: Vec<f64>,
        #[arg(long = "m_values", value_delimiter = ',')]
        m_values: Vec<f64>,
        /// Parallel workers; falls back to AGGDIFF_WORKERS, then the config.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Do whatever the config's `mode` key asks for.
    Exec {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<(ExperimentConfig, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(ConfigError::plain(format!("{}: {e}", path.display()))))?;
    let cfg = load_with(&text, overrides).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        CliError::Config(e)
    })?;
    Ok((cfg, text))
}

fn constants_request(
    cfg: Option<&ExperimentConfig>,
    case: Option<Case>,
    kmax: Option<u32>,
    o: &Overrides,
) -> Result<ConstantsRequest, CliError> {
    let section = cfg.and_then(|c| c.constants.as_ref());
    let missing = |what: &str| CliError::Config(ConfigError::plain(format!("{what} is required")));
    let case = case.or(section.map(|s| s.case)).ok_or_else(|| missing("--case"))?;
    let m = o.m.or(cfg.map(|c| c.diffusion.m)).ok_or_else(|| missing("--m"))?;
    let n = o.n.or(cfg.map(|c| c.potential.n)).ok_or_else(|| missing("--n"))?;
    let a = o.a.or(cfg.map(|c| c.potential.a)).unwrap_or(0.0);
    let b = o.b.or(section.and_then(|s| s.b)).or(cfg.and_then(|c| c.potential.b));
    let b = match (case, b) {
        (Case::Strong, None) => return Err(missing("--B")),
        (_, b) => b.unwrap_or(0.0),
    };
    let k_max = kmax.or(section.map(|s| s.k_max)).unwrap_or(10);
    Ok(ConstantsRequest { case, m, n, a, b, k_max })
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Run { config, overrides } => {
            let (cfg, text) = load(&config, &overrides)?;
            commands::run(&cfg, &text, out)
        }
        Command::Classify { config, overrides } => match config {
            Some(path) => {
                let (cfg, _) = load(&path, &overrides)?;
                commands::classify_cmd(Some(&cfg), &overrides, out)
            }
            None => commands::classify_cmd(None, &overrides, out),
        },
        Command::Constants { config, case, kmax, overrides } => {
            let cfg = config.map(|p| load(&p, &overrides)).transpose()?.map(|(c, _)| c);
            let req = constants_request(cfg.as_ref(), case, kmax, &overrides)?;
            commands::constants(&req, out)
        }
        Command::Verify { cells } => {
            let report = verify(cells);
            writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?)?;
            Ok(if report.pass { exit::OK } else { exit::FAILED })
        }
        Command::Sweep { config, masses, m_values, workers, overrides } => {
            let (mut cfg, text) = load(&config, &overrides)?;
            if !masses.is_empty() {
                cfg.sweep.masses = masses;
            }
            if !m_values.is_empty() {
                cfg.sweep.m_values = m_values;
            }
            let workers = commands::worker_count(workers, &cfg);
            commands::sweep(&cfg, &text, workers, out)
        }
        Command::Exec { config, overrides } => {
            let (cfg, text) = load(&config, &overrides)?;
            match cfg.mode {
                Mode::Run => commands::run(&cfg, &text, out),
                Mode::Classify => commands::classify_cmd(Some(&cfg), &overrides, out),
                Mode::Constants => {
                    let req = constants_request(Some(&cfg), None, None, &overrides)?;
                    commands::constants(&req, out)
                }
                Mode::Verify => dispatch(Command::Verify { cells: cfg.grid.cells }, out),
                Mode::Sweep => {
                    let workers = commands::worker_count(None, &cfg);
                    commands::sweep(&cfg, &text, workers, out)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aggdiff: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
