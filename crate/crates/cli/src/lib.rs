//! Experiment driver: config loading, sweep runs, CSV and plot output, and
//! trace replay.

pub mod config;
pub mod plot;
pub mod replay;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use config::{FieldError, RunConfig};
pub use replay::{parse_trace, ReplayReport, TraceError};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics_path: PathBuf,
    pub plot_paths: Vec<PathBuf>,
    pub summary: String,
}

fn resolve_out_dir(config: &RunConfig, out_dir: Option<&Path>) -> PathBuf {
    out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Evaluate the sweep and write `metrics.csv` (plus plots when asked).
pub fn run(config: &RunConfig, out_dir: Option<&Path>, plots: bool) -> Result<RunOutput> {
    config.validate()?;
    let kinds = config.scenario_kinds()?;
    let distances = config.distances()?;
    let records = config.scenario_model()?.run_sweep(&distances, &kinds)?;

    let dir = resolve_out_dir(config, out_dir);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let metrics_path = dir.join("metrics.csv");
    write_file(&metrics_path, &report::metrics_csv(&records))?;

    let mut plot_paths = Vec::new();
    if plots {
        for metric in plot::Metric::ALL {
            let path = dir.join(metric.file_name());
            write_file(&path, &plot::render(metric, &records, &kinds))?;
            plot_paths.push(path);
        }
    }
    Ok(RunOutput {
        metrics_path,
        plot_paths,
        summary: report::summary_table(&records, &kinds),
    })
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub decisions_path: PathBuf,
    pub report: ReplayReport,
}

/// Replay a trace file and write `decisions.csv`.
pub fn replay_file(config: &RunConfig, trace_path: &Path, out_dir: Option<&Path>) -> Result<ReplayOutput> {
    config.validate()?;
    let text = fs::read_to_string(trace_path).with_context(|| format!("cannot read trace {}", trace_path.display()))?;
    let trace = parse_trace(&text)?;
    let report = replay::replay(config, &trace)?;
    let dir = resolve_out_dir(config, out_dir);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let decisions_path = dir.join("decisions.csv");
    write_file(&decisions_path, &report.csv())?;
    Ok(ReplayOutput { decisions_path, report })
}
