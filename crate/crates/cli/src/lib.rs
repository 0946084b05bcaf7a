//! Configuration-driven driver for the `metagibbs` verification suites.
//!
//! A run reads one JSON config, executes the selected suite, and writes
//! `<name>.report.json` (plus `<name>.csv` for sweeps) into the output
//! directory. Outputs depend only on the config and seed.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

use config::{Experiment, ExperimentConfig, Overrides};
pub use error::CliError;
use report::{Report, TOOL, VERSION};

/// Suites with a one-line description and their default tolerance.
pub const SUITES: [(&str, &str, &str); 5] = [
    ("verify-theorem1", "meta Gibbs: generalization error equals ISKL/gamma", "1e-10 absolute"),
    ("verify-theorem2", "super-task identities and loss ordering", "1e-9 absolute"),
    ("mean-estimation", "Monte Carlo against the closed form", "4 standard errors"),
    ("bounds", "distribution-free bound slacks", "slack >= -1e-9"),
    ("rate-sweep", "generalization rate over (m, n)", "slope 1e-9, component 1e-10"),
];

/// Result of a completed run; `passed` is false when a gating check failed.
#[derive(Debug)]
pub struct RunOutput {
    pub report: Report,
    pub report_path: PathBuf,
}

pub fn run(config_path: &Path, overrides: Overrides, out: &Path) -> Result<RunOutput, CliError> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides)?;
    run_config(&cfg, out)
}

pub fn run_config(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput, CliError> {
    if cfg.name.is_empty() || cfg.name.contains(['/', '\\']) || cfg.name.starts_with('.') {
        return Err(CliError::ConfigInvalid(format!("name {:?} is not a plain file stem", cfg.name)));
    }
    let (seed, cap) = (cfg.seed, cfg.cap());
    let o = match &cfg.experiment {
        Experiment::VerifyTheorem1(c) => experiments::verify_theorem1(c, seed, cap)?,
        Experiment::VerifyTheorem2(c) => experiments::verify_theorem2(c, seed, cap)?,
        Experiment::MeanEstimation(c) => experiments::mean_estimation(c, seed)?,
        Experiment::Bounds(c) => experiments::bounds(c, seed, cap)?,
        Experiment::RateSweep(c) => experiments::rate_sweep_run(c, &cfg.name, seed, out)?,
    };
    let mut report = Report {
        tool: TOOL,
        version: VERSION,
        suite: cfg.experiment.suite(),
        name: cfg.name.clone(),
        config_sha256: cfg.hash(),
        seed,
        passed: false,
        checks: o.checks,
        artifacts: o.artifacts,
        details: o.details,
    };
    report.passed = report.failed_gating() == 0;
    let report_path = report.write(out)?;
    Ok(RunOutput { report, report_path })
}

/// True when a report's recorded hash matches the given config.
pub fn report_matches_config(report_json: &str, cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let v: serde_json::Value = serde_json::from_str(report_json)?;
    Ok(v.get("config_sha256").and_then(|h| h.as_str()) == Some(cfg.hash().as_str()))
}
