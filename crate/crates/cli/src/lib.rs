//! Drivers behind the `nslasso` binary: Monte-Carlo simulation, the scaled
//! Gram eigenvalue study and rolling forecast comparisons. Every driver writes
//! CSV only; identical configurations produce byte-identical files.

pub mod config;
pub mod eigen;
pub mod forecast;
pub mod simulate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{Command, Params, RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(nslasso::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<nslasso::Error> for CliError {
    fn from(e: nslasso::Error) -> Self {
        match e {
            nslasso::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Runtime(other),
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(&path)?)))
}

fn dispatch(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    match &cfg.params {
        Params::Simulate(p) => {
            let rows = simulate::simulate(p, cfg.replications, cfg.seed)?;
            std::fs::create_dir_all(dir)?;
            let (path, f) = create(dir, "simulate_summary.csv")?;
            simulate::write_summary_csv(&rows, f)?;
            written.push(path);
        }
        Params::EigenStudy(p) => {
            let (rows, d) = eigen::run_eigen(p, cfg.replications, cfg.seed)?;
            std::fs::create_dir_all(dir)?;
            let (path, f) = create(dir, "eigen_study.csv")?;
            nslasso::diagnostics::write_eigen_study_csv(&rows, f)?;
            written.push(path);
            let (path, f) = create(dir, "expected_d_summary.csv")?;
            eigen::write_d_csv(&d, f)?;
            written.push(path);
            let (path, f) = create(dir, "expected_d.csv")?;
            eigen::write_d_matrix_csv(&d, f)?;
            written.push(path);
        }
        Params::Forecast(p) => {
            let ds = forecast::load_dataset(p)?;
            let exps = forecast::run_experiments(&ds, p)?;
            std::fs::create_dir_all(dir)?;
            let (path, f) = create(dir, "forecast_records.csv")?;
            forecast::write_records_csv(&exps, f)?;
            written.push(path);
            let (path, f) = create(dir, "forecast_summary.csv")?;
            forecast::write_summary_csv(&exps, f)?;
            written.push(path);
            let (path, f) = create(dir, "forecast_selection.csv")?;
            forecast::write_selection_csv(&exps, f)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Runs `cfg`, capping worker threads at `cfg.jobs` when set. Returns the
/// files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}
