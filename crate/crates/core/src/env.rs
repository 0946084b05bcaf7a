//! Finite task environments: exact enumeration of meta-training datasets and
//! seeded sampling of training and test tasks.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::info::DiscreteDist;
use crate::numeric::{checked_pow, decode_digits};
use crate::rng::{substream, Role};

/// Default cap on enumerated states.
pub const DEFAULT_STATE_CAP: u128 = 10_000_000;

/// Tasks over a finite sample space, a prior over tasks, and the sizes
/// `m` (tasks) and `n` (samples per task). Samples are i.i.d. within a task.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteEnvironment {
    sample_space: Vec<String>,
    tasks: Vec<DiscreteDist>,
    task_prior: DiscreteDist,
    m: usize,
    n: usize,
}

impl FiniteEnvironment {
    pub fn new(tasks: Vec<DiscreteDist>, task_prior: DiscreteDist, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!("need m, n >= 1 (got m={m}, n={n})")));
        }
        let first = tasks.first().ok_or_else(|| Error::InvalidParameter("environment has no tasks".into()))?;
        let sample_space = first.outcomes().to_vec();
        if let Some(t) = tasks.iter().find(|t| t.outcomes() != sample_space.as_slice()) {
            return Err(Error::DomainMismatch(format!(
                "task over {} outcomes differs from the sample space of {}",
                t.len(),
                sample_space.len()
            )));
        }
        if task_prior.len() != tasks.len() {
            return Err(Error::ShapeMismatch(format!(
                "task prior has {} entries for {} tasks",
                task_prior.len(),
                tasks.len()
            )));
        }
        Ok(Self { sample_space, tasks, task_prior, m, n })
    }

    pub fn sample_space(&self) -> &[String] {
        &self.sample_space
    }

    pub fn z_size(&self) -> usize {
        self.sample_space.len()
    }

    pub fn tasks(&self) -> &[DiscreteDist] {
        &self.tasks
    }

    pub fn task_prior(&self) -> &DiscreteDist {
        &self.task_prior
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same environment with different sizes.
    pub fn with_sizes(&self, m: usize, n: usize) -> Result<Self> {
        Self::new(self.tasks.clone(), self.task_prior.clone(), m, n)
    }

    /// Number of task assignments `|T|^m`.
    pub fn assignment_count(&self) -> Result<usize> {
        count(self.tasks.len(), self.m)
    }

    /// Number of meta-datasets `|Z|^{mn}`.
    pub fn dataset_count(&self) -> Result<usize> {
        count(self.z_size(), self.m * self.n)
    }

    /// Probability of `n` i.i.d. samples from one task.
    pub fn task_data_prob(&self, task: usize, data: &[usize]) -> f64 {
        let p = self.tasks[task].probs();
        data.iter().map(|&z| p[z]).product()
    }

    /// `P(M = tasks, D = datasets)` for a full meta-sample; datasets are
    /// flattened row-major (task, sample).
    pub fn sample_prob(&self, tasks: &[usize], data: &[usize]) -> f64 {
        let prior = self.task_prior.probs();
        tasks
            .iter()
            .enumerate()
            .map(|(i, &t)| prior[t] * self.task_data_prob(t, &data[i * self.n..(i + 1) * self.n]))
            .product()
    }

    /// Law of one task's `n` samples with the task drawn from the prior,
    /// indexed by the dataset code (radix `|Z|`, first sample most significant).
    pub fn single_task_law(&self) -> Result<Vec<f64>> {
        let nd = count(self.z_size(), self.n)?;
        Ok((0..nd)
            .map(|code| {
                let data = decode_digits(code, self.z_size(), self.n);
                self.task_prior.probs().iter().enumerate().map(|(t, &pt)| pt * self.task_data_prob(t, &data)).sum()
            })
            .collect())
    }

    /// Folded law of the full meta-dataset (task identities summed out).
    pub fn dataset_law(&self) -> Result<Vec<f64>> {
        let single = self.single_task_law()?;
        let nd = self.dataset_count()?;
        let per = single.len();
        Ok((0..nd).map(|code| decode_digits(code, per, self.m).iter().map(|&c| single[c]).product()).collect())
    }
}

fn count(base: usize, exp: usize) -> Result<usize> {
    checked_pow(base, exp)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or(Error::StateSpaceTooLarge { required: u128::MAX, cap: DEFAULT_STATE_CAP })
}

/// One meta-training sample: task identities and an `m × n` dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaSample {
    pub task_ids: Vec<usize>,
    pub datasets: Vec<Vec<usize>>,
    /// Exact probability in enumeration mode; `None` when sampled.
    pub probability: Option<f64>,
    /// `(master_seed, trial_index)` in sampling mode.
    pub seed_path: Option<(u64, u64)>,
}

impl MetaSample {
    /// Row-major flattening of the datasets.
    pub fn flat_data(&self) -> Vec<usize> {
        self.datasets.iter().flatten().copied().collect()
    }
}

/// Every `(task assignment, dataset)` pair with positive probability.
pub struct MetaEnumeration<'a> {
    env: &'a FiniteEnvironment,
    tasks: Vec<usize>,
    data: Vec<usize>,
    done: bool,
}

impl Iterator for MetaEnumeration<'_> {
    type Item = MetaSample;

    fn next(&mut self) -> Option<MetaSample> {
        let env = self.env;
        while !self.done {
            let p = env.sample_prob(&self.tasks, &self.data);
            let item = (p > 0.0).then(|| MetaSample {
                task_ids: self.tasks.clone(),
                datasets: self.data.chunks(env.n).map(<[usize]>::to_vec).collect(),
                probability: Some(p),
                seed_path: None,
            });
            // odometer: data digits fastest, then task digits
            if !bump(&mut self.data, env.z_size()) && !bump(&mut self.tasks, env.tasks.len()) {
                self.done = true;
            }
            if item.is_some() {
                return item;
            }
        }
        None
    }
}

/// Increments a little-endian-at-the-back odometer; false on wraparound.
fn bump(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Exhaustive enumeration, refused above `cap` states.
pub fn enumerate_meta_datasets(env: &FiniteEnvironment, cap: u128) -> Result<MetaEnumeration<'_>> {
    let required = checked_pow(env.tasks.len(), env.m)
        .zip(checked_pow(env.z_size(), env.m * env.n))
        .and_then(|(a, b)| a.checked_mul(b))
        .unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::StateSpaceTooLarge { required, cap });
    }
    Ok(MetaEnumeration { env, tasks: vec![0; env.m], data: vec![0; env.m * env.n], done: false })
}

fn draw_data(env: &FiniteEnvironment, task: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let dist = WeightedIndex::new(env.tasks[task].probs()).expect("validated distribution");
    (0..env.n).map(|_| dist.sample(rng)).collect()
}

/// Draws a meta-training sample; deterministic in `(master_seed, trial_index)`.
pub fn sample_meta_datasets(env: &FiniteEnvironment, master_seed: u64, trial_index: u64) -> MetaSample {
    let mut task_rng = substream(master_seed, trial_index, Role::TrainTasks);
    let mut data_rng = substream(master_seed, trial_index, Role::TrainData);
    let prior = WeightedIndex::new(env.task_prior.probs()).expect("validated distribution");
    let task_ids: Vec<usize> = (0..env.m).map(|_| prior.sample(&mut task_rng)).collect();
    let datasets = task_ids.iter().map(|&t| draw_data(env, t, &mut data_rng)).collect();
    MetaSample { task_ids, datasets, probability: None, seed_path: Some((master_seed, trial_index)) }
}

/// Draws an unseen test task and its `n` samples from streams disjoint from
/// the training draws.
pub fn test_task_draw(env: &FiniteEnvironment, master_seed: u64, trial_index: u64) -> (usize, Vec<usize>) {
    let mut task_rng = substream(master_seed, trial_index, Role::TestTask);
    let mut data_rng = substream(master_seed, trial_index, Role::TestData);
    let prior = WeightedIndex::new(env.task_prior.probs()).expect("validated distribution");
    let t = prior.sample(&mut task_rng);
    (t, draw_data(env, t, &mut data_rng))
}
