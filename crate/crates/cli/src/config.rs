//! Experiment configuration: one JSON document per run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use metagibbs::env::{FiniteEnvironment, DEFAULT_STATE_CAP};
use metagibbs::mean_est::{McMode, MeanEstConfig};
use metagibbs::meta::MetaInstance;
use metagibbs::presets::{bern2_with, tiny_super};
use metagibbs::super_task::SuperInstance;
use metagibbs::DiscreteDist;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Stem for the output files.
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Enumeration cap; the library default when absent.
    #[serde(default)]
    pub cap: Option<u128>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyTheorem1(Theorem1Config),
    VerifyTheorem2(Theorem2Config),
    MeanEstimation(MeanEstimationConfig),
    Bounds(BoundsConfig),
    RateSweep(RateSweepConfig),
}

impl Experiment {
    pub fn suite(&self) -> &'static str {
        match self {
            Experiment::VerifyTheorem1(_) => "verify-theorem1",
            Experiment::VerifyTheorem2(_) => "verify-theorem2",
            Experiment::MeanEstimation(_) => "mean-estimation",
            Experiment::Bounds(_) => "bounds",
            Experiment::RateSweep(_) => "rate-sweep",
        }
    }
}

/// A finite environment written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    /// One sample law per task, over a shared sample space.
    pub tasks: Vec<Vec<f64>>,
    pub task_prior: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

impl EnvironmentSpec {
    fn build(&self) -> Result<FiniteEnvironment, CliError> {
        let tasks = self.tasks.iter().map(|t| DiscreteDist::from_probs(t.clone())).collect::<Result<Vec<_>, _>>()?;
        Ok(FiniteEnvironment::new(tasks, DiscreteDist::from_probs(self.task_prior.clone())?, self.m, self.n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetaSpec {
    /// The two-Bernoulli-task instance with the disagreement loss.
    Bern2 {
        m: usize,
        n: usize,
    },
    Custom(CustomMeta),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMeta {
    pub environment: EnvironmentSpec,
    /// `loss[u][w][z]`
    pub loss: Vec<Vec<Vec<f64>>>,
    /// Prior over `(u, w_1..w_m)`; uniform when absent.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default)]
    pub loss_bounds: Option<(f64, f64)>,
}

impl MetaSpec {
    pub fn build(&self, gamma: f64) -> Result<MetaInstance, CliError> {
        match self {
            MetaSpec::Bern2 { m, n } => {
                preset_sizes(&[*m, *n], 20)?;
                Ok(bern2_with(*m, *n, 1.0).with_gamma(gamma)?)
            }
            MetaSpec::Custom(c) => {
                let env = c.environment.build()?;
                let (u, w) = (c.loss.len(), c.loss.first().map_or(0, Vec::len));
                let prior = c.prior.clone().unwrap_or_else(|| MetaInstance::uniform_prior(&env, u, w));
                Ok(MetaInstance::new(env, c.loss.clone(), gamma, prior, c.loss_bounds)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperSpec {
    /// `m = 1`, binary spaces, the two Bernoulli tasks.
    TinySuper {
        n: usize,
    },
    Custom(CustomSuper),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSuper {
    pub environment: EnvironmentSpec,
    pub loss: Vec<Vec<Vec<f64>>>,
    /// Prior over `(u, w_1..w_m)` for the training tasks.
    pub prior_train: Vec<f64>,
    /// Prior over a single task-specific parameter.
    pub prior_test: Vec<f64>,
    #[serde(default)]
    pub loss_bounds: Option<(f64, f64)>,
}

impl SuperSpec {
    pub fn build(&self, gamma: f64) -> Result<SuperInstance, CliError> {
        match self {
            SuperSpec::TinySuper { n } => {
                preset_sizes(&[*n], 8)?;
                Ok(tiny_super(*n, 1.0).with_gamma(gamma)?)
            }
            SuperSpec::Custom(c) => Ok(SuperInstance::new(
                c.environment.build()?,
                c.loss.clone(),
                gamma,
                c.prior_train.clone(),
                c.prior_test.clone(),
                c.loss_bounds,
            )?),
        }
    }
}

fn preset_sizes(sizes: &[usize], max: usize) -> Result<(), CliError> {
    if sizes.iter().any(|&s| s == 0 || s > max) {
        return Err(CliError::ConfigInvalid(format!("preset sizes must lie in 1..={max}, got {sizes:?}")));
    }
    Ok(())
}

fn default_t1_tol() -> f64 {
    1e-10
}

fn default_t2_tol() -> f64 {
    1e-9
}

fn default_slack_tol() -> f64 {
    1e-9
}

fn default_z() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem1Config {
    pub instance: MetaSpec,
    pub gammas: Vec<f64>,
    /// Additional seeded random instances per `γ`.
    #[serde(default)]
    pub random_instances: u64,
    #[serde(default = "default_t1_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Config {
    pub instance: SuperSpec,
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub random_variants: u64,
    #[serde(default = "default_t2_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    RaoBlackwell,
    FullySampled,
}

impl From<ModeSpec> for McMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::RaoBlackwell => McMode::RaoBlackwell,
            ModeSpec::FullySampled => McMode::FullySampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanEstimationConfig {
    pub model: MeanEstConfig,
    pub trials: u64,
    #[serde(default = "default_mode")]
    pub mode: ModeSpec,
    /// Extra `σ_τ` values whose estimates must agree with the closed form.
    #[serde(default)]
    pub sigma_tau_sweep: Vec<f64>,
    /// Also run with the shifted-Rademacher sample law.
    #[serde(default)]
    pub non_gaussian: bool,
    /// Agreement threshold in standard errors.
    #[serde(default = "default_z")]
    pub z_threshold: f64,
}

fn default_mode() -> ModeSpec {
    ModeSpec::RaoBlackwell
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub meta: Vec<MetaSpec>,
    pub super_tasks: Vec<SuperSpec>,
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub random_meta: u64,
    #[serde(default)]
    pub random_super: u64,
    #[serde(default = "default_slack_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSpec {
    MeanEst {
        base: MeanEstConfig,
        /// Monte Carlo column; omitted when absent.
        #[serde(default)]
        mc_trials: Option<u64>,
    },
    /// The two-Bernoulli-task instance rebuilt for every `(m, n)`.
    Bern2 { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSweepConfig {
    pub family: SweepSpec,
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    #[serde(default = "default_slope_tol")]
    pub tolerance: f64,
}

fn default_slope_tol() -> f64 {
    1e-9
}

/// Command-line overrides of scalar fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub cap: Option<u128>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))
    }

    pub fn apply(&mut self, o: Overrides) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(c) = o.cap {
            self.cap = Some(c);
        }
        if let Some(t) = o.trials {
            match &mut self.experiment {
                Experiment::MeanEstimation(m) => m.trials = t,
                Experiment::RateSweep(RateSweepConfig { family: SweepSpec::MeanEst { mc_trials, .. }, .. }) => {
                    *mc_trials = Some(t)
                }
                other => {
                    return Err(CliError::ConfigInvalid(format!("--trials does not apply to {}", other.suite())));
                }
            }
        }
        Ok(())
    }

    pub fn cap(&self) -> u128 {
        self.cap.unwrap_or(DEFAULT_STATE_CAP)
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
