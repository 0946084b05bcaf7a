//! Super-sample / super-task construction.
//!
//! `Z` is `n × 4m`. The columns form `2m` groups `(i, k)`, and each group
//! has two columns labelled `l ∈ {0, 1}`. The sample `Z^{i,k}_{j,l}` sits
//! at row `j` and column `4i + 2k + l`. The sample mask `S` is `n × 2m`,
//! with `S^{i,k}_j` stored at `S[j][2i + k]`. The task mask `Ŝ` has length
//! `m`.
//!
//! Training task `i` is group `(i, Ŝ_i)`. Held-out task `i` is group
//! `(i, 1 − Ŝ_i)`. Within a group, `S` picks column `l = S^{i,k}_j` for
//! each row `j`. The complement `−S` picks the other column.

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{FiniteEnvironment, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::gibbs::gibbs_weights;
use crate::info::{info_triple, Axis, DiscreteDist, InfoTriple, JointDist};
use crate::numeric::{checked_pow, decode_digits, pairwise_sum};

/// A finite super-task problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperInstance {
    env: FiniteEnvironment,
    u_size: usize,
    w_size: usize,
    loss: Vec<f64>,
    gamma: f64,
    /// over `(u, w^Ŝ)`, coded `u·|W|^m + wcode`
    prior_train: Vec<f64>,
    /// over `w^{−Ŝ}`
    prior_test: Vec<f64>,
    loss_bounds: Option<(f64, f64)>,
}

impl SuperInstance {
    pub fn new(
        env: FiniteEnvironment,
        loss: Vec<Vec<Vec<f64>>>,
        gamma: f64,
        prior_train: Vec<f64>,
        prior_test: Vec<f64>,
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
            if row.len() != w_size || row.iter().any(|c| c.len() != z) {
                return Err(Error::ShapeMismatch("loss table must be |U| × |W| × |Z|".into()));
            }
            row.iter().for_each(|c| flat.extend_from_slice(c));
        }
        if let Some(&bad) = flat.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!("loss must be finite and non-negative, found {bad}")));
        }
        if let Some((lo, hi)) = loss_bounds {
            if let Some(&found) = flat.iter().find(|v| **v < lo || **v > hi) {
                return Err(Error::LossRangeViolation { lo, hi, found });
            }
        }
        let nw = w_size.pow(env.m() as u32);
        if prior_train.len() != u_size * nw {
            return Err(Error::PriorSupportMismatch(format!(
                "training prior has {} entries, expected {}",
                prior_train.len(),
                u_size * nw
            )));
        }
        if prior_test.len() != nw {
            return Err(Error::PriorSupportMismatch(format!(
                "test prior has {} entries, expected {nw}",
                prior_test.len()
            )));
        }
        DiscreteDist::from_probs(prior_train.clone())?;
        DiscreteDist::from_probs(prior_test.clone())?;
        Ok(Self { env, u_size, w_size, loss: flat, gamma, prior_train, prior_test, loss_bounds })
    }

    pub fn env(&self) -> &FiniteEnvironment {
        &self.env
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> usize {
        self.env.m()
    }

    pub fn n(&self) -> usize {
        self.env.n()
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn w_joint_size(&self) -> usize {
        self.w_size.pow(self.m() as u32)
    }

    pub fn loss(&self, u: usize, w: usize, z: usize) -> f64 {
        self.loss[(u * self.w_size + w) * self.env.z_size() + z]
    }

    /// Declared loss range, or the observed one.
    pub fn loss_range(&self) -> (f64, f64) {
        self.loss_bounds.unwrap_or_else(|| {
            let lo = self.loss.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = self.loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        Ok(Self { gamma, ..self.clone() })
    }

    /// Same instance with every loss multiplied by `factor` and no declared
    /// range.
    pub fn scaled_loss(&self, factor: f64) -> Self {
        Self { loss: self.loss.iter().map(|v| v * factor).collect(), loss_bounds: None, ..self.clone() }
    }

    /// `L_E(u, w^{1:m}, data)` for an `m × n` selection.
    pub fn joint_risk(&self, u: usize, ws: &[usize], data: &[Vec<usize>]) -> f64 {
        let per: f64 = ws
            .iter()
            .zip(data)
            .map(|(&w, row)| row.iter().map(|&z| self.loss(u, w, z)).sum::<f64>() / row.len() as f64)
            .sum();
        per / ws.len() as f64
    }
}

/// The data matrix `Z`, `n × 4m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperSample {
    pub z: Vec<Vec<usize>>,
}

/// Membership masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masks {
    pub s_hat: Vec<usize>,
    /// `n × 2m`
    pub s: Vec<Vec<usize>>,
}

/// The four `m × n` selections induced by a pair of masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selections {
    /// `Z^Ŝ_S`: training tasks, training samples.
    pub train_s: Vec<Vec<usize>>,
    /// `Z^Ŝ_{−S}`
    pub train_not_s: Vec<Vec<usize>>,
    /// `Z^{−Ŝ}_S`
    pub test_s: Vec<Vec<usize>>,
    /// `Z^{−Ŝ}_{−S}`
    pub test_not_s: Vec<Vec<usize>>,
}

pub fn select_training(z: &SuperSample, masks: &Masks) -> Result<Selections> {
    let n = z.z.len();
    let m = masks.s_hat.len();
    if n == 0 || m == 0 {
        return Err(Error::ShapeMismatch("empty super-sample or mask".into()));
    }
    if z.z.iter().any(|r| r.len() != 4 * m) {
        return Err(Error::ShapeMismatch(format!("Z rows must have {} columns", 4 * m)));
    }
    if masks.s.len() != n || masks.s.iter().any(|r| r.len() != 2 * m) {
        return Err(Error::ShapeMismatch(format!("S must be {n} × {}", 2 * m)));
    }
    if masks.s_hat.iter().chain(masks.s.iter().flatten()).any(|&b| b > 1) {
        return Err(Error::InvalidParameter("mask entries must be 0 or 1".into()));
    }
    let pick = |i: usize, k: usize, flip: usize| -> Vec<usize> {
        (0..n).map(|j| z.z[j][4 * i + 2 * k + (masks.s[j][2 * i + k] ^ flip)]).collect()
    };
    let mut sel = Selections { train_s: vec![], train_not_s: vec![], test_s: vec![], test_not_s: vec![] };
    for (i, &sh) in masks.s_hat.iter().enumerate() {
        sel.train_s.push(pick(i, sh, 0));
        sel.train_not_s.push(pick(i, sh, 1));
        sel.test_s.push(pick(i, 1 - sh, 0));
        sel.test_not_s.push(pick(i, 1 - sh, 1));
    }
    Ok(sel)
}

fn train_weights(inst: &SuperInstance, sel: &Selections) -> Vec<f64> {
    let nw = inst.w_joint_size();
    let energy: Vec<f64> = (0..inst.u_size * nw)
        .map(|h| inst.joint_risk(h / nw, &decode_digits(h % nw, inst.w_size, inst.m()), &sel.train_s))
        .collect();
    gibbs_weights(&inst.prior_train, &energy, inst.gamma).0
}

fn test_weights(inst: &SuperInstance, sel: &Selections, u: usize) -> Vec<f64> {
    let nw = inst.w_joint_size();
    let energy: Vec<f64> =
        (0..nw).map(|wc| inst.joint_risk(u, &decode_digits(wc, inst.w_size, inst.m()), &sel.test_s)).collect();
    gibbs_weights(&inst.prior_test, &energy, inst.gamma).0
}

fn to_dist(w: Vec<f64>) -> Result<DiscreteDist> {
    let s: f64 = w.iter().sum();
    DiscreteDist::from_probs(w.iter().map(|v| v / s).collect())
}

fn check_sample(inst: &SuperInstance, z: &SuperSample, masks: &Masks) -> Result<Selections> {
    if masks.s_hat.len() != inst.m() || z.z.len() != inst.n() {
        return Err(Error::ShapeMismatch(format!("instance has m = {}, n = {}", inst.m(), inst.n())));
    }
    if z.z.iter().flatten().any(|&v| v >= inst.env.z_size()) {
        return Err(Error::InvalidParameter("sample outside the sample space".into()));
    }
    select_training(z, masks)
}

/// Posterior over `(u, w^Ŝ)` trained on `Z^Ŝ_S`.
pub fn train_posterior(inst: &SuperInstance, z: &SuperSample, masks: &Masks) -> Result<DiscreteDist> {
    let sel = check_sample(inst, z, masks)?;
    to_dist(train_weights(inst, &sel))
}

/// Posterior over `w^{−Ŝ}` for a given `u`, trained on `Z^{−Ŝ}_S`.
pub fn test_posterior(inst: &SuperInstance, z: &SuperSample, masks: &Masks, u: usize) -> Result<DiscreteDist> {
    if u >= inst.u_size {
        return Err(Error::InvalidParameter(format!("meta parameter {u} out of range")));
    }
    let sel = check_sample(inst, z, masks)?;
    to_dist(test_weights(inst, &sel, u))
}

/// Expected losses. `tilde_cross` and `pop_cross` evaluate the *training*
/// task weights `W^Ŝ` on the held-out tasks' samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourLosses {
    pub hat: f64,
    pub bar: f64,
    pub tilde: f64,
    pub pop: f64,
    pub tilde_cross: f64,
    pub pop_cross: f64,
}

impl FourLosses {
    fn from_array(a: [f64; 6]) -> Self {
        Self { hat: a[0], bar: a[1], tilde: a[2], pop: a[3], tilde_cross: a[4], pop_cross: a[5] }
    }
}

/// Losses conditional on one `(Z, S, Ŝ)` state.
pub fn state_losses(inst: &SuperInstance, z: &SuperSample, masks: &Masks) -> Result<FourLosses> {
    let sel = check_sample(inst, z, masks)?;
    let post = train_weights(inst, &sel);
    Ok(FourLosses::from_array(state_terms(inst, &sel, &post, &mut |_, _| {})))
}

/// Computes the six per-state losses; `visit(u, test_weights)` sees the
/// test posterior for every `u`.
fn state_terms(inst: &SuperInstance, sel: &Selections, post: &[f64], visit: &mut dyn FnMut(usize, &[f64])) -> [f64; 6] {
    let nw = inst.w_joint_size();
    let m = inst.m();
    let mut acc = [0.0; 6];
    for u in 0..inst.u_size {
        let block = &post[u * nw..(u + 1) * nw];
        let pu: f64 = block.iter().sum();
        for (wc, &p) in block.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let ws = decode_digits(wc, inst.w_size, m);
            acc[0] += p * inst.joint_risk(u, &ws, &sel.train_s);
            acc[1] += p * inst.joint_risk(u, &ws, &sel.train_not_s);
            acc[4] += p * inst.joint_risk(u, &ws, &sel.test_s);
            acc[5] += p * inst.joint_risk(u, &ws, &sel.test_not_s);
        }
        let q = test_weights(inst, sel, u);
        visit(u, &q);
        if pu == 0.0 {
            continue;
        }
        for (wc, &qv) in q.iter().enumerate() {
            let ws = decode_digits(wc, inst.w_size, m);
            acc[2] += pu * qv * inst.joint_risk(u, &ws, &sel.test_s);
            acc[3] += pu * qv * inst.joint_risk(u, &ws, &sel.test_not_s);
        }
    }
    acc
}

/// Sizes of the enumerated state space.
#[derive(Debug, Clone, Copy)]
struct Sizes {
    nz: usize,
    ns: usize,
    nshat: usize,
    nh: usize,
    nwt: usize,
}

fn sizes(inst: &SuperInstance, cap: u128, with_table: bool) -> Result<Sizes> {
    let (m, n) = (inst.m(), inst.n());
    let nz = checked_pow(inst.env.z_size(), 4 * m * n);
    let ns = checked_pow(2, 2 * m * n);
    let nshat = checked_pow(2, m);
    let nwt = inst.w_joint_size() as u128;
    let nh = inst.u_size as u128 * nwt;
    let states = nz.zip(ns).zip(nshat).and_then(|((a, b), c)| a.checked_mul(b)?.checked_mul(c));
    let required = if with_table { states.and_then(|s| s.checked_mul(nh)?.checked_mul(nwt)) } else { states };
    let required = required.unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::StateSpaceTooLarge { required, cap });
    }
    Ok(Sizes {
        nz: nz.unwrap() as usize,
        ns: ns.unwrap() as usize,
        nshat: nshat.unwrap() as usize,
        nh: nh as usize,
        nwt: nwt as usize,
    })
}

/// Probability of a super-sample: every group draws its task from the
/// prior, then `2n` i.i.d. samples.
pub fn super_sample_prob(inst: &SuperInstance, z: &SuperSample) -> f64 {
    let m = inst.m();
    let prior = inst.env.task_prior().probs();
    (0..2 * m)
        .map(|g| {
            prior
                .iter()
                .enumerate()
                .map(|(t, pt)| {
                    let p = inst.env.tasks()[t].probs();
                    pt * z.z.iter().map(|row| p[row[2 * g]] * p[row[2 * g + 1]]).product::<f64>()
                })
                .sum::<f64>()
        })
        .product()
}

fn decode_state(inst: &SuperInstance, zc: usize, sc: usize, hc: usize) -> (SuperSample, Masks) {
    let (m, n) = (inst.m(), inst.n());
    let zd = decode_digits(zc, inst.env.z_size(), 4 * m * n);
    let sd = decode_digits(sc, 2, 2 * m * n);
    let z = SuperSample { z: zd.chunks(4 * m).map(<[usize]>::to_vec).collect() };
    let masks = Masks { s_hat: decode_digits(hc, 2, m), s: sd.chunks(2 * m).map(<[usize]>::to_vec).collect() };
    (z, masks)
}

/// Axis names of the super-task joint.
pub const AXIS_Z: &str = "Z";
pub const AXIS_S: &str = "S";
pub const AXIS_SHAT: &str = "Shat";
pub const AXIS_U: &str = "U";
pub const AXIS_W: &str = "W";
pub const AXIS_WT: &str = "WT";

/// Enumerated law of `(Z, S, Ŝ, U, W^Ŝ, W^{−Ŝ})` and the expected losses.
#[derive(Debug, Clone)]
pub struct SuperJoint {
    pub losses: FourLosses,
    pub joint: Option<JointDist>,
}

impl SuperJoint {
    /// Enumerates every state; the joint table is only materialized when
    /// `with_table` is set.
    pub fn build(inst: &SuperInstance, cap: u128, with_table: bool) -> Result<Self> {
        let sz = sizes(inst, cap, with_table)?;
        let (nu, nw) = (inst.u_size, inst.w_joint_size());
        let mask_p = 1.0 / (sz.ns * sz.nshat) as f64;
        let chunk = sz.ns * sz.nshat * sz.nh * sz.nwt;
        let per_z: Vec<([f64; 6], Vec<f64>)> = (0..sz.nz)
            .into_par_iter()
            .map(|zc| {
                let (z, _) = decode_state(inst, zc, 0, 0);
                let pz = super_sample_prob(inst, &z);
                let mut table = if with_table { vec![0.0; chunk] } else { Vec::new() };
                let mut acc = [Vec::with_capacity(sz.ns * sz.nshat), vec![], vec![], vec![], vec![], vec![]];
                if pz == 0.0 {
                    return ([0.0; 6], table);
                }
                for sc in 0..sz.ns {
                    for hc in 0..sz.nshat {
                        let (_, masks) = decode_state(inst, zc, sc, hc);
                        let sel = select_training(&z, &masks).expect("enumerated shapes are consistent");
                        let post = train_weights(inst, &sel);
                        let base = (sc * sz.nshat + hc) * sz.nh * sz.nwt;
                        let mut visit = |u: usize, q: &[f64]| {
                            if !with_table {
                                return;
                            }
                            for w in 0..nw {
                                let p = post[u * nw + w];
                                for (wt, &qv) in q.iter().enumerate() {
                                    table[base + ((u * nw + w) * sz.nwt) + wt] = pz * mask_p * p * qv;
                                }
                            }
                        };
                        let terms = state_terms(inst, &sel, &post, &mut visit);
                        for (a, t) in acc.iter_mut().zip(terms) {
                            a.push(t);
                        }
                    }
                }
                let mut out = [0.0; 6];
                for (o, a) in out.iter_mut().zip(&acc) {
                    *o = pz * mask_p * pairwise_sum(a);
                }
                (out, table)
            })
            .collect();
        let mut totals = [0.0; 6];
        for (k, t) in totals.iter_mut().enumerate() {
            let col: Vec<f64> = per_z.iter().map(|(a, _)| a[k]).collect();
            *t = pairwise_sum(&col);
        }
        let joint = if with_table {
            let mut table: Vec<f64> = Vec::with_capacity(sz.nz * chunk);
            per_z.into_iter().for_each(|(_, t)| table.extend(t));
            let total = pairwise_sum(&table);
            table.iter_mut().for_each(|v| *v /= total);
            Some(JointDist::new(
                vec![
                    Axis::indexed(AXIS_Z, sz.nz),
                    Axis::indexed(AXIS_S, sz.ns),
                    Axis::indexed(AXIS_SHAT, sz.nshat),
                    Axis::indexed(AXIS_U, nu),
                    Axis::indexed(AXIS_W, nw),
                    Axis::indexed(AXIS_WT, sz.nwt),
                ],
                table,
            )?)
        } else {
            None
        };
        Ok(Self { losses: FourLosses::from_array(totals), joint })
    }
}

/// Expected losses by exhaustive enumeration.
pub fn four_losses(inst: &SuperInstance) -> Result<FourLosses> {
    Ok(SuperJoint::build(inst, DEFAULT_STATE_CAP, false)?.losses)
}

/// The four conditional information terms and the identity residuals.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Terms {
    pub gamma: f64,
    pub losses: FourLosses,
    /// `ISKL(U, W^Ŝ; S, Ŝ | Z)`
    pub iskl_1: InfoTriple,
    /// `ISKL(U, W^Ŝ; S | Ŝ, Z)`
    pub iskl_2: InfoTriple,
    /// `ISKL(U, W^Ŝ; Ŝ | S, Z)`
    pub iskl_3: InfoTriple,
    /// `ISKL(W^{−Ŝ}; S | U, Ŝ, Z)`
    pub iskl_4: InfoTriple,
    /// `ISKL_1 − [(γ/4)(L̂ + L̄ + L̃ + L_P) − γL̂]`
    pub residual_1: f64,
    /// `(L_P + L̄ + L̃ + L̂) − γL̂ − (4/γ)·ISKL_1`
    pub residual_1_alt: f64,
    pub residual_2: f64,
    pub residual_3: f64,
    pub residual_4: f64,
    /// Same identities with the cross-task losses in place of `L̃`, `L_P`.
    pub residual_1_cross: f64,
    pub residual_3_cross: f64,
    /// `L_P − L̂`
    pub gen_super: f64,
    /// `(2/γ)(ISKL_4 + ISKL_3)`
    pub gen_theorem2: f64,
    pub gen_residual: f64,
}

impl Theorem2Terms {
    /// Largest absolute residual among items 1–4 and the final expression.
    pub fn max_residual(&self) -> f64 {
        [self.residual_1, self.residual_2, self.residual_3, self.residual_4, self.gen_residual]
            .iter()
            .fold(0.0, |a, b| a.max(b.abs()))
    }
}

pub fn theorem2_terms(inst: &SuperInstance, cap: u128) -> Result<Theorem2Terms> {
    if inst.gamma == 0.0 {
        return Err(Error::ZeroGamma);
    }
    let sj = SuperJoint::build(inst, cap, true)?;
    let j = sj.joint.as_ref().expect("table requested");
    let l = sj.losses;
    let g = inst.gamma;
    let iskl_1 = info_triple(j, &[AXIS_U, AXIS_W], &[AXIS_S, AXIS_SHAT], &[AXIS_Z])?;
    let iskl_2 = info_triple(j, &[AXIS_U, AXIS_W], &[AXIS_S], &[AXIS_SHAT, AXIS_Z])?;
    let iskl_3 = info_triple(j, &[AXIS_U, AXIS_W], &[AXIS_SHAT], &[AXIS_S, AXIS_Z])?;
    let iskl_4 = info_triple(j, &[AXIS_WT], &[AXIS_S], &[AXIS_U, AXIS_SHAT, AXIS_Z])?;
    let gen_super = l.pop - l.hat;
    let gen_theorem2 = 2.0 / g * (iskl_4.skl + iskl_3.skl);
    Ok(Theorem2Terms {
        gamma: g,
        losses: l,
        residual_1: iskl_1.skl - (g / 4.0 * (l.hat + l.bar + l.tilde + l.pop) - g * l.hat),
        residual_1_alt: (l.pop + l.bar + l.tilde + l.hat) - g * l.hat - 4.0 / g * iskl_1.skl,
        residual_2: iskl_2.skl - g / 2.0 * (l.bar - l.hat),
        residual_3: iskl_3.skl - g / 2.0 * (l.tilde - l.hat),
        residual_4: iskl_4.skl - g / 2.0 * (l.pop - l.tilde),
        residual_1_cross: iskl_1.skl - (g / 4.0 * (l.hat + l.bar + l.tilde_cross + l.pop_cross) - g * l.hat),
        residual_3_cross: iskl_3.skl - g / 2.0 * (l.tilde_cross - l.hat),
        gen_super,
        gen_theorem2,
        gen_residual: gen_super - gen_theorem2,
        iskl_1,
        iskl_2,
        iskl_3,
        iskl_4,
    })
}

/// Slack of the two mutual-information bounds on the loss gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HellstromSlacks {
    pub task_gap: f64,
    pub task_bound: f64,
    pub task_slack: f64,
    pub sample_gap: f64,
    pub sample_bound: f64,
    pub sample_slack: f64,
    /// Task-level gap with `L̃` replaced by the training weights evaluated
    /// on the held-out tasks.
    pub task_gap_cross: f64,
    pub task_slack_cross: f64,
}

/// `|L̃ − L̂| ≤ sqrt(2 I(U,W^Ŝ; Ŝ | Z, S)/m)` and
/// `|L_P − L̃| ≤ sqrt(2 I(W^{−Ŝ}; S | U, Z, Ŝ)/n)` for losses in `[0, 1]`.
pub fn hellstrom_intermediate_bounds(inst: &SuperInstance, cap: u128) -> Result<HellstromSlacks> {
    let (lo, hi) = inst.loss_range();
    for v in &inst.loss {
        if *v < 0.0 || *v > 1.0 {
            return Err(Error::LossRangeViolation { lo: 0.0, hi: 1.0, found: *v });
        }
    }
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::LossRangeViolation { lo: 0.0, hi: 1.0, found: if lo < 0.0 { lo } else { hi } });
    }
    let sj = SuperJoint::build(inst, cap, true)?;
    let j = sj.joint.as_ref().expect("table requested");
    let l = sj.losses;
    let i3 = info_triple(j, &[AXIS_U, AXIS_W], &[AXIS_SHAT], &[AXIS_S, AXIS_Z])?.mutual;
    let i4 = info_triple(j, &[AXIS_WT], &[AXIS_S], &[AXIS_U, AXIS_SHAT, AXIS_Z])?.mutual;
    let task_gap = (l.tilde - l.hat).abs();
    let task_bound = (2.0 * i3.max(0.0) / inst.m() as f64).sqrt();
    let task_gap_cross = (l.tilde_cross - l.hat).abs();
    let sample_gap = (l.pop - l.tilde).abs();
    let sample_bound = (2.0 * i4.max(0.0) / inst.n() as f64).sqrt();
    Ok(HellstromSlacks {
        task_gap,
        task_bound,
        task_slack: task_bound - task_gap,
        sample_gap,
        sample_bound,
        sample_slack: sample_bound - sample_gap,
        task_gap_cross,
        task_slack_cross: task_bound - task_gap_cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{disagreement_loss, random_tiny_super, tiny_super};

    #[test]
    fn selection_by_hand() {
        // m = 1, n = 2, distinct symbols: row j, column c holds 10j + c
        let z = SuperSample { z: vec![vec![0, 1, 2, 3], vec![10, 11, 12, 13]] };
        let zero = Masks { s_hat: vec![0], s: vec![vec![0, 0]; 2] };
        let sel = select_training(&z, &zero).unwrap();
        assert_eq!(sel.train_s, vec![vec![0, 10]]);
        assert_eq!(sel.train_not_s, vec![vec![1, 11]]);
        assert_eq!(sel.test_s, vec![vec![2, 12]]);
        assert_eq!(sel.test_not_s, vec![vec![3, 13]]);

        let masks = Masks { s_hat: vec![1], s: vec![vec![1, 0], vec![0, 1]] };
        let sel = select_training(&z, &masks).unwrap();
        // training group k=1: S^{1,1} = (0, 1) → columns 2, 3
        assert_eq!(sel.train_s, vec![vec![2, 13]]);
        assert_eq!(sel.train_not_s, vec![vec![3, 12]]);
        // held-out group k=0: S^{1,0} = (1, 0) → columns 1, 0
        assert_eq!(sel.test_s, vec![vec![1, 10]]);
        assert_eq!(sel.test_not_s, vec![vec![0, 11]]);

        // flipping Ŝ swaps the training and held-out selections
        let flipped = Masks { s_hat: vec![0], ..masks.clone() };
        let f = select_training(&z, &flipped).unwrap();
        assert_eq!(f.train_s, sel.test_s);
        assert_eq!(f.test_not_s, sel.train_not_s);
    }

    #[test]
    fn selection_shape_errors() {
        let z = SuperSample { z: vec![vec![0, 1, 2]] };
        let masks = Masks { s_hat: vec![0], s: vec![vec![0, 0]] };
        assert!(matches!(select_training(&z, &masks), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn posteriors() {
        let inst = tiny_super(2, 1.5);
        let z = SuperSample { z: vec![vec![0, 1, 1, 1], vec![1, 0, 0, 1]] };
        let masks = Masks { s_hat: vec![1], s: vec![vec![1, 0], vec![0, 0]] };
        let zero = inst.with_gamma(0.0).unwrap();
        let p = train_posterior(&zero, &z, &masks).unwrap();
        assert!(p.probs().iter().all(|v| (v - 0.25).abs() < 1e-15));
        let q = test_posterior(&zero, &z, &masks, 1).unwrap();
        assert!(q.probs().iter().all(|v| (v - 0.5).abs() < 1e-15));

        // direct evaluation on the flattened space
        let sel = select_training(&z, &masks).unwrap();
        let p = train_posterior(&inst, &z, &masks).unwrap();
        let loss = disagreement_loss();
        let e: Vec<f64> = (0..4)
            .map(|h| {
                let (u, w) = (h / 2, h % 2);
                sel.train_s[0].iter().map(|&zz| loss[u][w][zz]).sum::<f64>() / 2.0
            })
            .collect();
        let norm: f64 = e.iter().map(|v| (-1.5 * v).exp()).sum();
        for h in 0..4 {
            assert!((p.probs()[h] - (-1.5 * e[h]).exp() / norm).abs() < 1e-14);
        }
        let et: Vec<f64> = (0..2).map(|w| sel.test_s[0].iter().map(|&zz| loss[0][w][zz]).sum::<f64>() / 2.0).collect();
        let nt: f64 = et.iter().map(|v| (-1.5 * v).exp()).sum();
        let q = test_posterior(&inst, &z, &masks, 0).unwrap();
        for w in 0..2 {
            assert!((q.probs()[w] - (-1.5 * et[w]).exp() / nt).abs() < 1e-14);
        }
    }

    /// Fully unrolled sum for m = n = 1: Z has 4 cells, S two bits, Ŝ one.
    fn brute_force(inst: &SuperInstance) -> [f64; 4] {
        let loss = |u, w, z| inst.loss(u, w, z);
        let g = inst.gamma();
        let zs = inst.env().z_size();
        let tp = inst.env().task_prior().probs();
        let task = |t: usize, z: usize| inst.env().tasks()[t].probs()[z];
        let mut out = [0.0; 4];
        for z0 in 0..zs {
            for z1 in 0..zs {
                for z2 in 0..zs {
                    for z3 in 0..zs {
                        let col = [z0, z1, z2, z3];
                        let grp = |a: usize, b: usize| -> f64 {
                            (0..tp.len()).map(|t| tp[t] * task(t, a) * task(t, b)).sum()
                        };
                        let pz = grp(z0, z1) * grp(z2, z3);
                        for s0 in 0..2 {
                            for s1 in 0..2 {
                                let s = [s0, s1];
                                for sh in 0..2 {
                                    let p_state = pz * 0.125;
                                    let tr = col[2 * sh + s[sh]];
                                    let tr_n = col[2 * sh + 1 - s[sh]];
                                    let te = col[2 * (1 - sh) + s[1 - sh]];
                                    let te_n = col[2 * (1 - sh) + 1 - s[1 - sh]];
                                    let wts: Vec<f64> = (0..4)
                                        .map(|h| inst.prior_train[h] * (-g * loss(h / 2, h % 2, tr)).exp())
                                        .collect();
                                    let zt: f64 = wts.iter().sum();
                                    for h in 0..4 {
                                        let (u, w) = (h / 2, h % 2);
                                        let p = wts[h] / zt;
                                        out[0] += p_state * p * loss(u, w, tr);
                                        out[1] += p_state * p * loss(u, w, tr_n);
                                        let tw: Vec<f64> =
                                            (0..2).map(|v| inst.prior_test[v] * (-g * loss(u, v, te)).exp()).collect();
                                        let tz: f64 = tw.iter().sum();
                                        for v in 0..2 {
                                            out[2] += p_state * p * tw[v] / tz * loss(u, v, te);
                                            out[3] += p_state * p * tw[v] / tz * loss(u, v, te_n);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn losses_match_unrolled_oracle() {
        for inst in [tiny_super(1, 1.0), random_tiny_super(3, 0, 1), random_tiny_super(3, 1, 1)] {
            let l = four_losses(&inst).unwrap();
            let b = brute_force(&inst);
            for (got, want) in [l.hat, l.bar, l.tilde, l.pop].iter().zip(b) {
                assert!((got - want).abs() < 1e-14, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn constant_loss_and_zero_gamma() {
        let base = tiny_super(1, 1.0);
        let env = base.env().clone();
        let c =
            SuperInstance::new(env, vec![vec![vec![0.3; 2]; 2]; 2], 2.0, vec![0.25; 4], vec![0.5; 2], None).unwrap();
        let t = theorem2_terms(&c, DEFAULT_STATE_CAP).unwrap();
        for v in [t.losses.hat, t.losses.bar, t.losses.tilde, t.losses.pop] {
            assert!((v - 0.3).abs() < 1e-14);
        }
        for i in [t.iskl_1, t.iskl_2, t.iskl_3, t.iskl_4] {
            assert!(i.skl.abs() < 1e-14);
        }
        let h = hellstrom_intermediate_bounds(&c, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(h.task_slack, h.task_bound);
        assert!(h.task_gap < 1e-14 && h.sample_gap < 1e-14);

        let zero = base.with_gamma(0.0).unwrap();
        let l = four_losses(&zero).unwrap();
        assert!((l.hat - l.bar).abs() < 1e-14);
        assert!((l.tilde - l.pop).abs() < 1e-14);
        assert!(matches!(theorem2_terms(&zero, DEFAULT_STATE_CAP), Err(Error::ZeroGamma)));
    }

    #[test]
    fn sample_identities_hold() {
        for inst in [tiny_super(1, 1.0), tiny_super(2, 2.0), random_tiny_super(5, 2, 2)] {
            let t = theorem2_terms(&inst, DEFAULT_STATE_CAP).unwrap();
            assert!(t.residual_2.abs() < 1e-9, "item 2: {}", t.residual_2);
            assert!(t.residual_4.abs() < 1e-9, "item 4: {}", t.residual_4);
            assert!(t.residual_3_cross.abs() < 1e-9, "item 3 (cross): {}", t.residual_3_cross);
            assert!(t.residual_1_cross.abs() < 1e-9, "item 1 (cross): {}", t.residual_1_cross);
        }
    }

    #[test]
    fn loss_range_gate() {
        let scaled = tiny_super(1, 1.0).scaled_loss(2.0);
        assert!(matches!(
            hellstrom_intermediate_bounds(&scaled, DEFAULT_STATE_CAP),
            Err(Error::LossRangeViolation { .. })
        ));
    }

    #[test]
    fn relabeling_symmetry() {
        let inst = random_tiny_super(9, 4, 2);
        let m = inst.m();
        for zc in [0usize, 37, 101, 200] {
            for sc in 0..16 {
                for hc in 0..2 {
                    let (z, masks) = decode_state(&inst, zc, sc, hc);
                    let base = state_losses(&inst, &z, &masks).unwrap();
                    // swap the l-columns within every group and complement S
                    let zl = SuperSample { z: z.z.iter().map(|r| (0..4 * m).map(|c| r[c ^ 1]).collect()).collect() };
                    let ml = Masks {
                        s_hat: masks.s_hat.clone(),
                        s: masks.s.iter().map(|r| r.iter().map(|b| 1 - b).collect()).collect(),
                    };
                    assert_eq!(state_losses(&inst, &zl, &ml).unwrap(), base);
                    assert!((super_sample_prob(&inst, &zl) - super_sample_prob(&inst, &z)).abs() < 1e-15);
                    // swap the k-groups within every pair and complement Ŝ
                    let zk = SuperSample { z: z.z.iter().map(|r| (0..4 * m).map(|c| r[c ^ 2]).collect()).collect() };
                    let mk = Masks {
                        s_hat: masks.s_hat.iter().map(|b| 1 - b).collect(),
                        s: masks.s.iter().map(|r| (0..2 * m).map(|c| r[c ^ 1]).collect()).collect(),
                    };
                    assert_eq!(state_losses(&inst, &zk, &mk).unwrap(), base);
                    assert!((super_sample_prob(&inst, &zk) - super_sample_prob(&inst, &z)).abs() < 1e-15);
                }
            }
        }
    }
}
