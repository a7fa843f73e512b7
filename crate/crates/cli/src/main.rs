mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use ising_kawasaki::Error;

use config::ExperimentConfig;
use output::{json_string, Outputs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Lib(Error::InvalidInput(_) | Error::Parse { .. } | Error::NoNonuniqueness { .. }) => 2,
            CliError::Lib(Error::TooLarge { .. } | Error::RetriesExhausted(_)) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ising", version, about = "Ising / Kawasaki dynamics experiments", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key = value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV/JSON artifacts and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the effective configuration in file form and exit.
    #[arg(long)]
    dump_config: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Largest number of free vertices for exact enumeration.
    #[arg(long, default_value_t = 24)]
    pub cap: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Uniqueness and magnetization thresholds at (Δ, β[, λ]).
    Thresholds(commands::ThresholdsArgs),
    /// Threshold curves over a β range.
    PhaseDiagram(commands::PhaseDiagramArgs),
    /// First-moment landscape f(η) and its critical points.
    Landscape(commands::LandscapeArgs),
    /// Run a chain from seeded starts and record η traces.
    Simulate(commands::SimulateArgs),
    /// Exact spectrum, gap and mixing bounds of a chain on a small graph.
    Spectra(commands::SpectraArgs),
    /// Exact identities and inequalities on a small graph.
    Exactcheck(commands::ExactcheckArgs),
    /// Metastability traces on random regular graphs or their unions.
    Metastability(commands::MetastabilityArgs),
    /// Random regular (multi)graph as an edge list.
    GraphGen(commands::GraphGenArgs),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Thresholds(a) => &a.common,
            Command::PhaseDiagram(a) => &a.common,
            Command::Landscape(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Spectra(a) => &a.common,
            Command::Exactcheck(a) => &a.common,
            Command::Metastability(a) => &a.common,
            Command::GraphGen(a) => &a.common,
        }
    }
}

/// Result of a subcommand: a JSON summary for stdout plus named artifacts.
pub struct Report {
    pub summary: serde_json::Value,
    pub artifacts: Vec<(String, String)>,
    pub failed_checks: Option<String>,
}

/// Splices `--config FILE` entries in front of the user's own flags.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| CliError::Validation("--config needs a path".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read config {path}: {e}")))?;
    let cfg = ExperimentConfig::parse(&text)?;
    // the root command takes no options of its own, so a subcommand can only come first
    let sub_pos = rest.get(1).filter(|a| !a.starts_with('-')).map(|_| 1);
    let (sub_name, insert_at) = match (sub_pos, &cfg.subcommand) {
        (Some(p), Some(s)) if rest[p] != *s => {
            return Err(CliError::Validation(format!(
                "config is for '{s}' but the command line asks for '{}'",
                rest[p]
            )))
        }
        (Some(p), _) => (rest[p].clone(), p + 1),
        (None, Some(s)) => {
            rest.insert(1, s.clone());
            (s.clone(), 2)
        }
        (None, None) => return Err(CliError::Validation("no subcommand given".into())),
    };
    let root = Cli::command();
    let sub = root
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::Validation(format!("unknown subcommand '{sub_name}'")))?;
    let extra = cfg.to_args(sub)?;
    rest.splice(insert_at..insert_at, extra);
    Ok(rest)
}

fn run() -> Result<(), CliError> {
    let argv = expand_config(std::env::args().collect())?;
    let root = Cli::command();
    let matches = match root.clone().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(()),
                _ => Err(CliError::Validation("invalid arguments".into())),
            };
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Validation(e.to_string()))?;
    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand required");
    let effective = ExperimentConfig::from_matches(
        sub_name,
        root.find_subcommand(sub_name).expect("known"),
        sub_matches,
    );
    let common = cli.command.common().clone();
    if common.dump_config {
        print!("{}", effective.to_file_string());
        return Ok(());
    }
    if common.threads == 0 {
        return Err(CliError::Validation("--threads must be >= 1".into()));
    }

    let start = Instant::now();
    let mut outputs = Outputs::new(common.out.as_deref())?;
    let result = (|| -> Result<Report, CliError> {
        let report = match &cli.command {
            Command::Thresholds(a) => commands::thresholds(a)?,
            Command::PhaseDiagram(a) => commands::phase_diagram(a)?,
            Command::Landscape(a) => commands::landscape(a)?,
            Command::Simulate(a) => commands::simulate(a)?,
            Command::Spectra(a) => commands::spectra(a)?,
            Command::Exactcheck(a) => commands::exactcheck(a)?,
            Command::Metastability(a) => commands::metastability(a)?,
            Command::GraphGen(a) => commands::graph_gen(a)?,
        };
        for (name, text) in &report.artifacts {
            outputs.write(name, text)?;
        }
        outputs.write("summary.json", &json_string(&report.summary))?;
        let manifest = serde_json::json!({
            "tool": "ising",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": sub_name,
            "config": effective.entries,
            "seed": common.seed,
            "threads": common.threads,
            "wall_time_secs": start.elapsed().as_secs_f64(),
            "outputs": outputs.names(),
        });
        outputs.write("manifest.json", &json_string(&manifest))?;
        Ok(report)
    })();
    match result {
        Ok(report) => {
            print!("{}", json_string(&report.summary));
            match report.failed_checks {
                Some(msg) => Err(CliError::ChecksFailed(msg)),
                None => Ok(()),
            }
        }
        Err(e) => {
            outputs.discard();
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
