//! The joint-training meta Gibbs algorithm on finite instances: risks,
//! the exact generalization identity, and the lautum-expansion
//! decomposition.
//!
//! A hypothesis is `h = (u, w_1, ..., w_m)`, coded as `u·|W|^m + wcode`
//! with `w_1` the most significant digit of `wcode`. A meta-dataset is coded
//! the same way in radix `|Z|`, task-major.

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{FiniteEnvironment, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::gibbs::gibbs_weights;
use crate::info::{
    cond_info_groups, info_triple, product_conditional_divergence, Axis, DiscreteDist, InfoKind, JointDist,
};
use crate::numeric::{checked_pow, decode_digits, pairwise_sum};

/// A finite meta-learning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaInstance {
    env: FiniteEnvironment,
    u_size: usize,
    w_size: usize,
    /// `loss[(u·|W| + w)·|Z| + z]`
    loss: Vec<f64>,
    gamma: f64,
    prior: Vec<f64>,
    loss_bounds: Option<(f64, f64)>,
}

impl MetaInstance {
    /// `loss[u][w][z]` must be non-negative and finite; `prior` is over the
    /// coded hypothesis space of size `|U|·|W|^m`.
    pub fn new(
        env: FiniteEnvironment,
        loss: Vec<Vec<Vec<f64>>>,
        gamma: f64,
        prior: Vec<f64>,
        loss_bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        let u_size = loss.len();
        let w_size = loss.first().map_or(0, Vec::len);
        if u_size == 0 || w_size == 0 {
            return Err(Error::InvalidParameter("U and W must be non-empty".into()));
        }
        let z = env.z_size();
        let mut flat = Vec::with_capacity(u_size * w_size * z);
        for row in &loss {
            if row.len() != w_size {
                return Err(Error::ShapeMismatch("ragged loss table over W".into()));
            }
            for cell in row {
                if cell.len() != z {
                    return Err(Error::ShapeMismatch(format!("loss row has {} entries, |Z| = {z}", cell.len())));
                }
                flat.extend_from_slice(cell);
            }
        }
        if let Some(&bad) = flat.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!("loss must be finite and non-negative, found {bad}")));
        }
        if let Some((lo, hi)) = loss_bounds {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidParameter(format!("empty loss range [{lo}, {hi}]")));
            }
            if let Some(&found) = flat.iter().find(|v| **v < lo || **v > hi) {
                return Err(Error::LossRangeViolation { lo, hi, found });
            }
        }
        let h = checked_pow(w_size, env.m())
            .and_then(|v| v.checked_mul(u_size as u128))
            .filter(|&v| v <= DEFAULT_STATE_CAP)
            .ok_or(Error::StateSpaceTooLarge { required: u128::MAX, cap: DEFAULT_STATE_CAP })? as usize;
        if prior.len() != h {
            return Err(Error::PriorSupportMismatch(format!(
                "prior has {} entries, hypothesis space has {h}",
                prior.len()
            )));
        }
        // validates non-negativity and normalization
        DiscreteDist::from_probs(prior.clone())?;
        Ok(Self { env, u_size, w_size, loss: flat, gamma, prior, loss_bounds })
    }

    /// Uniform prior over the hypothesis space.
    pub fn uniform_prior(env: &FiniteEnvironment, u_size: usize, w_size: usize) -> Vec<f64> {
        let h = u_size * w_size.pow(env.m() as u32);
        vec![1.0 / h as f64; h]
    }

    /// Product prior `π(u) Π_i π(w_i)` with a common `π(w)`.
    pub fn product_prior(env: &FiniteEnvironment, pu: &[f64], pw: &[f64]) -> Vec<f64> {
        let m = env.m();
        let nw = pw.len().pow(m as u32);
        let mut out = Vec::with_capacity(pu.len() * nw);
        for &a in pu {
            for code in 0..nw {
                out.push(a * decode_digits(code, pw.len(), m).iter().map(|&w| pw[w]).product::<f64>());
            }
        }
        out
    }

    pub fn env(&self) -> &FiniteEnvironment {
        &self.env
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn w_size(&self) -> usize {
        self.w_size
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn loss(&self, u: usize, w: usize, z: usize) -> f64 {
        self.loss[(u * self.w_size + w) * self.env.z_size() + z]
    }

    /// Declared loss range, or the observed min/max when none was declared.
    pub fn loss_range(&self) -> (f64, f64) {
        self.loss_bounds.unwrap_or_else(|| {
            let lo = self.loss.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = self.loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
    }

    pub fn declared_loss_bounds(&self) -> Option<(f64, f64)> {
        self.loss_bounds
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        Ok(Self { gamma, ..self.clone() })
    }

    /// Number of joint task-parameter configurations `|W|^m`.
    pub fn w_joint_size(&self) -> usize {
        self.w_size.pow(self.env.m() as u32)
    }

    pub fn hypothesis_count(&self) -> usize {
        self.u_size * self.w_joint_size()
    }

    /// `(u, [w_1, ..., w_m])` for a hypothesis code.
    pub fn decode_hypothesis(&self, h: usize) -> (usize, Vec<usize>) {
        let nw = self.w_joint_size();
        (h / nw, decode_digits(h % nw, self.w_size, self.env.m()))
    }

    /// `L_P(u, w, μ) = E_{Z~μ} ℓ(u, w, Z)` for task `t`.
    pub fn task_population_loss(&self, u: usize, w: usize, t: usize) -> f64 {
        let p = self.env.tasks()[t].probs();
        (0..self.env.z_size()).map(|z| p[z] * self.loss(u, w, z)).sum()
    }

    fn energies(&self, data: &[usize]) -> Vec<f64> {
        let n = self.env.n();
        let nw = self.w_joint_size();
        // per-task risks, reused across all hypotheses
        let mut risk = vec![0.0; self.u_size * self.w_size * self.env.m()];
        for u in 0..self.u_size {
            for w in 0..self.w_size {
                for (i, d) in data.chunks(n).enumerate() {
                    risk[(u * self.w_size + w) * self.env.m() + i] = individual_empirical_risk(self, u, w, d);
                }
            }
        }
        let m = self.env.m();
        (0..self.hypothesis_count())
            .map(|h| {
                let (u, ws) = (h / nw, decode_digits(h % nw, self.w_size, m));
                ws.iter().enumerate().map(|(i, &w)| risk[(u * self.w_size + w) * m + i]).sum::<f64>() / m as f64
            })
            .collect()
    }

    /// Posterior weights over hypotheses for a flattened meta-dataset.
    pub fn posterior_weights(&self, data: &[usize]) -> Vec<f64> {
        gibbs_weights(&self.prior, &self.energies(data), self.gamma).0
    }
}

/// `(1/n) Σ_j ℓ(u, w, z_j)`.
pub fn individual_empirical_risk(inst: &MetaInstance, u: usize, w: usize, data: &[usize]) -> f64 {
    data.iter().map(|&z| inst.loss(u, w, z)).sum::<f64>() / data.len() as f64
}

/// `(1/m) Σ_i` of the per-task empirical risks.
pub fn joint_empirical_risk(inst: &MetaInstance, u: usize, ws: &[usize], datasets: &[Vec<usize>]) -> f64 {
    ws.iter().zip(datasets).map(|(&w, d)| individual_empirical_risk(inst, u, w, d)).sum::<f64>() / ws.len() as f64
}

fn check_shape(inst: &MetaInstance, datasets: &[Vec<usize>]) -> Result<Vec<usize>> {
    let env = inst.env();
    if datasets.len() != env.m() || datasets.iter().any(|d| d.len() != env.n()) {
        return Err(Error::ShapeMismatch(format!("expected {} datasets of {} samples", env.m(), env.n())));
    }
    let flat: Vec<usize> = datasets.iter().flatten().copied().collect();
    if let Some(z) = flat.iter().find(|&&z| z >= env.z_size()) {
        return Err(Error::InvalidParameter(format!("sample {z} outside the sample space")));
    }
    Ok(flat)
}

/// Meta Gibbs posterior over coded hypotheses for one meta-dataset.
pub fn meta_gibbs_posterior(inst: &MetaInstance, datasets: &[Vec<usize>]) -> Result<DiscreteDist> {
    let flat = check_shape(inst, datasets)?;
    let w = inst.posterior_weights(&flat);
    let s: f64 = w.iter().sum();
    DiscreteDist::from_probs(w.iter().map(|v| v / s).collect())
}

/// Marginals of the prior over `u` and each `w_i`, and the largest
/// deviation of the prior from their product.
fn prior_factors(inst: &MetaInstance) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let m = inst.env().m();
    let mut pu = vec![0.0; inst.u_size];
    let mut pw = vec![vec![0.0; inst.w_size]; m];
    for (h, &p) in inst.prior.iter().enumerate() {
        let (u, ws) = inst.decode_hypothesis(h);
        pu[u] += p;
        for (i, &w) in ws.iter().enumerate() {
            pw[i][w] += p;
        }
    }
    let deviation = inst
        .prior
        .iter()
        .enumerate()
        .map(|(h, &p)| {
            let (u, ws) = inst.decode_hypothesis(h);
            let prod: f64 = pu[u] * ws.iter().enumerate().map(|(i, &w)| pw[i][w]).product::<f64>();
            (p - prod).abs()
        })
        .fold(0.0, f64::max);
    (pu, pw, deviation)
}

/// Tolerance for accepting a prior as a product of its marginals.
pub const FACTORIZATION_TOL: f64 = 1e-12;

/// Per-task base learner `P_{W_i | U=u, D_i} ∝ π_i(w) e^{-(γ/m) L_E(u, w, D_i)}`.
fn base_learner(inst: &MetaInstance, pw: &[f64], u: usize, data: &[usize]) -> Vec<f64> {
    let f: Vec<f64> = (0..inst.w_size).map(|w| individual_empirical_risk(inst, u, w, data)).collect();
    gibbs_weights(pw, &f, inst.gamma / inst.env().m() as f64).0
}

/// Largest total-variation distance between `P_{W|U=u,D}` and
/// `Π_i P_{W_i|U=u,D_i}` over all datasets and meta-parameters.
pub fn base_learner_factorization_check(inst: &MetaInstance) -> Result<f64> {
    let (_, pw, deviation) = prior_factors(inst);
    if deviation > FACTORIZATION_TOL {
        return Err(Error::NonFactorizedPrior { deviation });
    }
    let env = inst.env();
    let (m, n) = (env.m(), env.n());
    let nd = env.dataset_count()?;
    let nw = inst.w_joint_size();
    let worst = (0..nd)
        .into_par_iter()
        .map(|code| {
            let data = decode_digits(code, env.z_size(), m * n);
            let post = inst.posterior_weights(&data);
            let mut worst: f64 = 0.0;
            for u in 0..inst.u_size {
                let block = &post[u * nw..(u + 1) * nw];
                let mass: f64 = block.iter().sum();
                if mass <= 0.0 {
                    continue;
                }
                let factors: Vec<Vec<f64>> =
                    (0..m).map(|i| base_learner(inst, &pw[i], u, &data[i * n..(i + 1) * n])).collect();
                let tv: f64 = (0..nw)
                    .map(|wc| {
                        let ws = decode_digits(wc, inst.w_size, m);
                        let prod: f64 = ws.iter().enumerate().map(|(i, &w)| factors[i][w]).product();
                        (block[wc] / mass - prod).abs()
                    })
                    .sum::<f64>()
                    * 0.5;
                worst = worst.max(tv);
            }
            worst
        })
        .collect::<Vec<f64>>();
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// The enumerated joint law of `(U, W_{1:m}, D, M)` under the meta Gibbs
/// algorithm, with the per-dataset posteriors it was built from.
#[derive(Debug, Clone)]
pub struct MetaJoint {
    inst: MetaInstance,
    joint: JointDist,
    /// posterior weights per dataset code
    posteriors: Vec<Vec<f64>>,
    /// `P(M = t, D = d)` as `[t][d]`
    task_data: Vec<Vec<f64>>,
}

/// Axis names of a [`MetaJoint`].
pub const AXIS_U: &str = "U";
pub const AXIS_W: &str = "W";
pub const AXIS_D: &str = "D";
pub const AXIS_M: &str = "M";

impl MetaJoint {
    pub fn build(inst: &MetaInstance, cap: u128) -> Result<Self> {
        let env = inst.env();
        let (m, n) = (env.m(), env.n());
        let nd = env.dataset_count()?;
        let nt = env.assignment_count()?;
        let nh = inst.hypothesis_count();
        let required = (nh as u128) * (nd as u128) * (nt as u128);
        if required > cap {
            return Err(Error::StateSpaceTooLarge { required, cap });
        }
        let posteriors: Vec<Vec<f64>> = (0..nd)
            .into_par_iter()
            .map(|code| inst.posterior_weights(&decode_digits(code, env.z_size(), m * n)))
            .collect();
        let task_data: Vec<Vec<f64>> = (0..nt)
            .map(|t| {
                let tasks = decode_digits(t, env.tasks().len(), m);
                (0..nd).map(|d| env.sample_prob(&tasks, &decode_digits(d, env.z_size(), m * n))).collect()
            })
            .collect();
        let nw = inst.w_joint_size();
        let mut table = vec![0.0; nh * nd * nt];
        for h in 0..nh {
            for d in 0..nd {
                let ph = posteriors[d][h];
                if ph == 0.0 {
                    continue;
                }
                for t in 0..nt {
                    table[(h * nd + d) * nt + t] = ph * task_data[t][d];
                }
            }
        }
        // absorb rounding in the product of already-normalized factors
        let total = pairwise_sum(&table);
        table.iter_mut().for_each(|v| *v /= total);
        let joint = JointDist::new(
            vec![
                Axis::indexed(AXIS_U, inst.u_size),
                Axis::indexed(AXIS_W, nw),
                Axis::indexed(AXIS_D, nd),
                Axis::indexed(AXIS_M, nt),
            ],
            table,
        )?;
        Ok(Self { inst: inst.clone(), joint, posteriors, task_data })
    }

    pub fn instance(&self) -> &MetaInstance {
        &self.inst
    }

    pub fn joint(&self) -> &JointDist {
        &self.joint
    }

    pub fn posterior(&self, dataset_code: usize) -> &[f64] {
        &self.posteriors[dataset_code]
    }

    /// Folded dataset law `P(D = d)`.
    pub fn dataset_law(&self) -> Vec<f64> {
        let nd = self.posteriors.len();
        (0..nd).map(|d| self.task_data.iter().map(|row| row[d]).sum()).collect()
    }

    /// `P(h)` under the joint.
    pub fn hypothesis_marginal(&self) -> Vec<f64> {
        let law = self.dataset_law();
        let nh = self.inst.hypothesis_count();
        (0..nh)
            .map(|h| {
                let terms: Vec<f64> = law.iter().enumerate().map(|(d, p)| p * self.posteriors[d][h]).collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    fn data(&self, d: usize) -> Vec<usize> {
        let env = self.inst.env();
        decode_digits(d, env.z_size(), env.m() * env.n())
    }

    fn hyp_risk(&self, h: usize, data: &[usize]) -> f64 {
        let (u, ws) = self.inst.decode_hypothesis(h);
        let n = self.inst.env().n();
        ws.iter()
            .enumerate()
            .map(|(i, &w)| individual_empirical_risk(&self.inst, u, w, &data[i * n..(i + 1) * n]))
            .sum::<f64>()
            / ws.len() as f64
    }

    /// `(1/m) Σ_i L_P(u, w_i, P_T)` averaged over `T ~ P_τ`.
    fn hyp_population(&self, h: usize) -> f64 {
        let (u, ws) = self.inst.decode_hypothesis(h);
        let prior = self.inst.env().task_prior().probs();
        ws.iter()
            .map(|&w| prior.iter().enumerate().map(|(t, p)| p * self.inst.task_population_loss(u, w, t)).sum::<f64>())
            .sum::<f64>()
            / ws.len() as f64
    }
}

/// `E[L_E(U, W_{1:m}, D)]` under the joint.
pub fn empirical_meta_risk(j: &MetaJoint) -> f64 {
    let law = j.dataset_law();
    let terms: Vec<f64> = (0..law.len())
        .into_par_iter()
        .map(|d| {
            if law[d] == 0.0 {
                return 0.0;
            }
            let data = j.data(d);
            let post = &j.posteriors[d];
            let inner: Vec<f64> =
                post.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(h, p)| p * j.hyp_risk(h, &data)).collect();
            law[d] * pairwise_sum(&inner)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Population meta risk: the trained hypothesis evaluated on an
/// independent task drawn from the environment,
/// `E_{P_{U,W} ⊗ P_T}[(1/m) Σ_i L_P(U, W_i, P_T)]`.
pub fn population_meta_risk(j: &MetaJoint) -> f64 {
    let ph = j.hypothesis_marginal();
    let terms: Vec<f64> =
        ph.iter().enumerate().map(|(h, p)| if *p > 0.0 { p * j.hyp_population(h) } else { 0.0 }).collect();
    pairwise_sum(&terms)
}

/// Population risk conditional on the training task identities: each `W_i`
/// is evaluated on fresh data from its own task `M_i`.
pub fn population_meta_risk_per_task(j: &MetaJoint) -> f64 {
    let inst = &j.inst;
    let env = inst.env();
    let m = env.m();
    let terms: Vec<f64> = j
        .task_data
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let tasks = decode_digits(t, env.tasks().len(), m);
            let inner: Vec<f64> = row
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(d, p)| {
                    let post = &j.posteriors[d];
                    let s: f64 = post
                        .iter()
                        .enumerate()
                        .filter(|(_, q)| **q > 0.0)
                        .map(|(h, q)| {
                            let (u, ws) = inst.decode_hypothesis(h);
                            q * ws.iter().zip(&tasks).map(|(&w, &tk)| inst.task_population_loss(u, w, tk)).sum::<f64>()
                                / m as f64
                        })
                        .sum();
                    p * s
                })
                .collect();
            pairwise_sum(&inner)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Population risk with the base learner retrained on a fresh test task:
/// `E_{P_U} E_T E_{D_T} E_{W_T | U, D_T}[L_P(U, W_T, P_T)]`.
/// Needs a product prior (the base learner is only defined then).
pub fn population_meta_risk_retrained(j: &MetaJoint) -> Result<f64> {
    let inst = &j.inst;
    let (_, pw, deviation) = prior_factors(inst);
    if deviation > FACTORIZATION_TOL {
        return Err(Error::NonFactorizedPrior { deviation });
    }
    let env = inst.env();
    let ph = j.hypothesis_marginal();
    let nw = inst.w_joint_size();
    let pu: Vec<f64> = (0..inst.u_size).map(|u| ph[u * nw..(u + 1) * nw].iter().sum()).collect();
    let nd1 = crate::env::FiniteEnvironment::with_sizes(env, 1, env.n())?.dataset_count()?;
    let mut terms = Vec::new();
    for (u, &p_u) in pu.iter().enumerate() {
        if p_u == 0.0 {
            continue;
        }
        for (t, &pt) in env.task_prior().probs().iter().enumerate() {
            if pt == 0.0 {
                continue;
            }
            for code in 0..nd1 {
                let data = decode_digits(code, env.z_size(), env.n());
                let pd = env.task_data_prob(t, &data);
                if pd == 0.0 {
                    continue;
                }
                // a test task uses the first task's marginal prior
                let post = base_learner(inst, &pw[0], u, &data);
                let inner: f64 = post.iter().enumerate().map(|(w, q)| q * inst.task_population_loss(u, w, t)).sum();
                terms.push(p_u * pt * pd * inner);
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// `ISKL(U, W; D)` and its mutual/lautum parts (environment folded in).
pub fn meta_information(j: &MetaJoint) -> Result<crate::info::InfoTriple> {
    info_triple(&j.joint, &[AXIS_U, AXIS_W], &[AXIS_D], &[])
}

/// Generalization error computed from the risks.
pub fn gen_error_direct(inst: &MetaInstance) -> Result<f64> {
    let j = MetaJoint::build(inst, DEFAULT_STATE_CAP)?;
    Ok(population_meta_risk(&j) - empirical_meta_risk(&j))
}

/// Generalization error as `ISKL(U, W_{1:m}; D) / γ`.
pub fn gen_error_skl(inst: &MetaInstance) -> Result<f64> {
    if inst.gamma == 0.0 {
        return Err(Error::ZeroGamma);
    }
    let j = MetaJoint::build(inst, DEFAULT_STATE_CAP)?;
    Ok(meta_information(&j)?.skl / inst.gamma)
}

/// Terms of `ISKL(U,W;D) = ISKL(U;D) + I(W;D|U) + D(P_{W|U} ‖ P_{W|U,D} | P_U P_D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub iskl_u: f64,
    pub mi_w_given_u: f64,
    pub lautum_remainder: f64,
    pub total: f64,
    pub residual: f64,
}

pub fn skl_chain_decomposition_of(j: &MetaJoint) -> Result<Decomposition> {
    let total = meta_information(j)?.skl;
    let iskl_u = info_triple(&j.joint, &[AXIS_U], &[AXIS_D], &[])?.skl;
    let mi_w_given_u = cond_info_groups(&j.joint, &[AXIS_W], &[AXIS_D], &[AXIS_U], InfoKind::Mutual)?;
    let lautum_remainder = product_conditional_divergence(&j.joint, &[AXIS_W], &[AXIS_U], &[AXIS_D])?;
    let residual = total - (iskl_u + mi_w_given_u + lautum_remainder);
    Ok(Decomposition { iskl_u, mi_w_given_u, lautum_remainder, total, residual })
}

pub fn skl_chain_decomposition(inst: &MetaInstance) -> Result<Decomposition> {
    skl_chain_decomposition_of(&MetaJoint::build(inst, DEFAULT_STATE_CAP)?)
}

/// Everything the identity check reports for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub gamma: f64,
    pub empirical_risk: f64,
    pub population_risk: f64,
    pub gen_direct: f64,
    pub gen_skl: f64,
    pub residual: f64,
    pub iskl: f64,
    pub mi: f64,
    pub lautum: f64,
    /// Identity conditional on the task identities.
    pub per_task: PerTaskReport,
    /// Population risk with the base learner retrained on a fresh task,
    /// and its distance from the product-measure population risk. `None`
    /// for non-product priors.
    pub retrained_population_risk: Option<f64>,
    pub retrained_gap: Option<f64>,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerTaskReport {
    pub population_risk: f64,
    pub gen_direct: f64,
    pub iskl: f64,
    pub gen_skl: f64,
    pub residual: f64,
}

pub fn theorem1_report(inst: &MetaInstance, cap: u128) -> Result<Theorem1Report> {
    if inst.gamma == 0.0 {
        return Err(Error::ZeroGamma);
    }
    let j = MetaJoint::build(inst, cap)?;
    let emp = empirical_meta_risk(&j);
    let pop = population_meta_risk(&j);
    let info = meta_information(&j)?;
    let gen_direct = pop - emp;
    let gen_skl = info.skl / inst.gamma;
    let pop_t = population_meta_risk_per_task(&j);
    let iskl_t = cond_info_groups(&j.joint, &[AXIS_U, AXIS_W], &[AXIS_D], &[AXIS_M], InfoKind::Skl)?;
    let per_task = PerTaskReport {
        population_risk: pop_t,
        gen_direct: pop_t - emp,
        iskl: iskl_t,
        gen_skl: iskl_t / inst.gamma,
        residual: (pop_t - emp) - iskl_t / inst.gamma,
    };
    let retrained = population_meta_risk_retrained(&j).ok();
    Ok(Theorem1Report {
        gamma: inst.gamma,
        empirical_risk: emp,
        population_risk: pop,
        gen_direct,
        gen_skl,
        residual: gen_direct - gen_skl,
        iskl: info.skl,
        mi: info.mutual,
        lautum: info.lautum,
        per_task,
        retrained_population_risk: retrained,
        retrained_gap: retrained.map(|r| r - pop),
        decomposition: skl_chain_decomposition_of(&j)?,
    })
}
