//! Command-line driver: single runs and parameter sweeps over scenario files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pas_core::metrics::{missed_detections, write_node_csv, write_summary_csv, Summary};
use pas_core::scenario::{ScenarioFile, ScenarioFileError, SweepParam, DEFAULT_REPS};
use pas_core::sim::{run, RunOptions};
use pas_core::sweep::{sweep, SweepError};

#[derive(Parser)]
#[command(name = "pas-sim", version, about = "Adaptive-sleeping sensor network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write nodes.csv and summary.csv.
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the event trace to trace.tsv.
        #[arg(long)]
        trace: bool,
    },
    /// Sweep one protocol parameter with seed replication.
    Sweep {
        scenario: PathBuf,
        /// `max_sleep` or `alert_threshold`; defaults to the file's [sweep].
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated ascending values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Failure with its exit status: 2 for bad input, 3 for configuration or I/O.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, output, trace } => run_command(&scenario, &output, trace),
        Command::Sweep { scenario, param, values, reps, output } => {
            sweep_command(&scenario, param.as_deref(), values, reps, &output)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    ScenarioFile::load(path).map_err(|e| match e {
        ScenarioFileError::Parse(err) => Failure::usage(format!("{}: {err}", path.display())),
        ScenarioFileError::Io(err) => Failure::runtime(format!("{}: {err}", path.display())),
    })
}

fn create(dir: &Path, name: &str) -> Result<fs::File, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn write_failure(e: impl std::fmt::Display) -> Failure {
    Failure::runtime(format!("writing results: {e}"))
}

fn run_command(path: &Path, output: &Path, trace: bool) -> Result<(), Failure> {
    let file = load(path)?;
    let scenario = file.build().map_err(|e| Failure::runtime(e.to_string()))?;
    let result =
        run(&scenario, RunOptions { trace: trace || file.trace }).map_err(|e| Failure::runtime(e.to_string()))?;

    write_node_csv(&result, create(output, "nodes.csv")?).map_err(write_failure)?;
    let summary = Summary::of(&result);
    write_summary_csv([&summary], create(output, "summary.csv")?).map_err(write_failure)?;
    if let Some(text) = &result.trace {
        fs::write(output.join("trace.tsv"), text).map_err(write_failure)?;
    }

    let missed = missed_detections(&result);
    if !missed.is_empty() {
        eprintln!("warning: {} node(s) reached by the stimulus never detected it: {missed:?}", missed.len());
    }
    match summary.avg_delay_s {
        Some(d) => println!(
            "{} {}: avg delay {d:.4} s, avg energy {:.6} J",
            result.scenario, summary.strategy, summary.avg_energy_j
        ),
        None => println!(
            "{} {}: stimulus reached no node, avg energy {:.6} J",
            result.scenario, summary.strategy, summary.avg_energy_j
        ),
    }
    Ok(())
}

fn sweep_command(
    path: &Path,
    param: Option<&str>,
    values: Option<Vec<f64>>,
    reps: Option<usize>,
    output: &Path,
) -> Result<(), Failure> {
    let file = load(path)?;
    let from_file = file.sweep.as_ref();
    let param: SweepParam = match (param, from_file) {
        (Some(name), _) => name.parse().map_err(|e: String| Failure::usage(e))?,
        (None, Some(s)) => s.param,
        (None, None) => return Err(Failure::usage("no --param given and the scenario has no [sweep] section")),
    };
    let values = values
        .or_else(|| from_file.map(|s| s.values.clone()))
        .ok_or_else(|| Failure::usage("no --values given and the scenario has no [sweep] section"))?;
    let reps = reps.or(from_file.map(|s| s.reps)).unwrap_or(DEFAULT_REPS);

    let out = sweep(&file, param, &values, reps).map_err(|e| match e {
        SweepError::Empty | SweepError::Values => Failure::usage(e.to_string()),
        SweepError::NotSweepable(_) | SweepError::Config { .. } => Failure::runtime(e.to_string()),
    })?;

    write_summary_csv(out.runs.iter().map(|r| &r.summary), create(output, "summary.csv")?).map_err(write_failure)?;
    write_summary_csv(out.aggregate.iter().map(|p| &p.summary), create(output, "aggregate.csv")?)
        .map_err(write_failure)?;

    for p in &out.aggregate {
        let delay = p.summary.avg_delay_s.map_or_else(|| "-".to_string(), |d| format!("{d:.4}"));
        println!("{param}={}: avg delay {delay} s, avg energy {:.6} J", p.value, p.summary.avg_energy_j);
    }
    Ok(())
}
