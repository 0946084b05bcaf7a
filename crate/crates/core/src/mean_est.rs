//! Gaussian mean estimation with the regularized squared loss
//! `ℓ(w, u, z) = α‖z − w‖² + (1 − α)‖u − w‖²` and a flat prior.
//!
//! Parameters are stacked as `(W_1, ..., W_m, U)`, each a `d`-block, so
//! coordinate `c` of block `b` lives at index `b·d + c`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::QuadraticEnergy;
use crate::info::{gaussian_channel_info, GaussianChannel};
use crate::numeric::mean_and_stderr;
use crate::rng::{substream, Role};

/// Per-sample law around the task mean; both have covariance `σ_Z² I_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleLaw {
    Gaussian,
    /// `μ + σ_Z·r` with independent uniform signs `r_c ∈ {−1, +1}`.
    ShiftedRademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanEstConfig {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub sigma_z: f64,
    pub sigma_tau: f64,
    pub sample_law: SampleLaw,
}

impl MeanEstConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.d == 0 {
            return Err(Error::InvalidParameter("m, n and d must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(Error::NegativeGamma(self.gamma));
        }
        if self.gamma == 0.0 {
            return Err(Error::ZeroGamma);
        }
        if self.sigma_z.is_nan() || self.sigma_z <= 0.0 || self.sigma_tau.is_nan() || self.sigma_tau < 0.0 {
            return Err(Error::InvalidParameter("need sigma_z > 0 and sigma_tau >= 0".into()));
        }
        Ok(())
    }

    fn require_interior(&self) -> Result<()> {
        self.validate()?;
        if self.alpha <= 0.0 || self.alpha >= 1.0 {
            return Err(Error::DegenerateAlpha(self.alpha));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        (self.m + 1) * self.d
    }
}

/// `ISKL(U, W_{1:m}; D) = 2γα((m−1)α + 1) d σ_Z² / (mn)`.
pub fn isk_closed_form(cfg: &MeanEstConfig) -> Result<f64> {
    cfg.validate()?;
    let (m, n, d) = (cfg.m as f64, cfg.n as f64, cfg.d as f64);
    let s2 = cfg.sigma_z * cfg.sigma_z;
    Ok(2.0 * cfg.gamma * cfg.alpha * ((m - 1.0) * cfg.alpha + 1.0) * d * s2 / (m * n))
}

/// `2α² d σ_Z² / n + 2α(1 − α) d σ_Z² / (mn)`.
pub fn gen_closed_form(cfg: &MeanEstConfig) -> Result<f64> {
    cfg.validate()?;
    let (m, n, d) = (cfg.m as f64, cfg.n as f64, cfg.d as f64);
    let s2 = cfg.sigma_z * cfg.sigma_z;
    let a = cfg.alpha;
    Ok(2.0 * a * a * d * s2 / n + 2.0 * a * (1.0 - a) * d * s2 / (m * n))
}

/// `(2γ/m)·[I on W diagonal blocks, (α−1)I on W–U blocks, m(1−α)I on U]`.
pub fn precision_matrix(cfg: &MeanEstConfig) -> DMatrix<f64> {
    let (m, d) = (cfg.m, cfg.d);
    let s = 2.0 * cfg.gamma / m as f64;
    let mut p = DMatrix::zeros(cfg.dim(), cfg.dim());
    for c in 0..d {
        let u = m * d + c;
        for i in 0..m {
            let w = i * d + c;
            p[(w, w)] = s;
            p[(w, u)] = s * (cfg.alpha - 1.0);
            p[(u, w)] = s * (cfg.alpha - 1.0);
        }
        p[(u, u)] = s * m as f64 * (1.0 - cfg.alpha);
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorParams {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
}

/// `datasets[i][j]` is sample `j` of task `i`, a `d`-vector.
pub type Datasets = Vec<Vec<Vec<f64>>>;

fn check_datasets(cfg: &MeanEstConfig, data: &Datasets) -> Result<()> {
    if data.len() != cfg.m || data.iter().any(|t| t.len() != cfg.n || t.iter().any(|z| z.len() != cfg.d)) {
        return Err(Error::ShapeMismatch(format!(
            "expected {} tasks × {} samples × {} coordinates",
            cfg.m, cfg.n, cfg.d
        )));
    }
    Ok(())
}

fn task_means(cfg: &MeanEstConfig, data: &Datasets) -> (Vec<Vec<f64>>, Vec<f64>) {
    let zbar_i: Vec<Vec<f64>> =
        data.iter().map(|t| (0..cfg.d).map(|c| t.iter().map(|z| z[c]).sum::<f64>() / cfg.n as f64).collect()).collect();
    let zbar: Vec<f64> = (0..cfg.d).map(|c| zbar_i.iter().map(|z| z[c]).sum::<f64>() / cfg.m as f64).collect();
    (zbar_i, zbar)
}

fn posterior_mean(cfg: &MeanEstConfig, zbar_i: &[Vec<f64>], zbar: &[f64]) -> DVector<f64> {
    let d = cfg.d;
    let mut mean = DVector::zeros(cfg.dim());
    for c in 0..d {
        for i in 0..cfg.m {
            mean[i * d + c] = cfg.alpha * zbar_i[i][c] + (1.0 - cfg.alpha) * zbar[c];
        }
        mean[cfg.m * d + c] = zbar[c];
    }
    mean
}

/// Posterior mean `μ_{W_i} = α Z̄_i + (1 − α) Z̄`, `μ_U = Z̄`, and precision.
pub fn posterior_params(cfg: &MeanEstConfig, data: &Datasets) -> Result<PosteriorParams> {
    cfg.require_interior()?;
    check_datasets(cfg, data)?;
    let (zbar_i, zbar) = task_means(cfg, data);
    Ok(PosteriorParams { mean: posterior_mean(cfg, &zbar_i, &zbar), precision: precision_matrix(cfg) })
}

/// The joint empirical risk as a quadratic form in `(w_{1:m}, u)`.
pub fn quadratic_energy(cfg: &MeanEstConfig, data: &Datasets) -> Result<QuadraticEnergy> {
    cfg.validate()?;
    check_datasets(cfg, data)?;
    let (m, d, a) = (cfg.m, cfg.d, cfg.alpha);
    let (zbar_i, _) = task_means(cfg, data);
    let q = precision_matrix(cfg) / cfg.gamma;
    let mut b = DVector::zeros(cfg.dim());
    for i in 0..m {
        for c in 0..d {
            b[i * d + c] = 2.0 * a / m as f64 * zbar_i[i][c];
        }
    }
    let sq: f64 = data.iter().flatten().flatten().map(|v| v * v).sum();
    let c = a * sq / (m * cfg.n) as f64;
    Ok(QuadraticEnergy { q, b, c })
}

/// How the posterior expectations are evaluated per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    /// Posterior and fresh-sample expectations in closed form.
    RaoBlackwell,
    /// One posterior draw and one fresh sample per task.
    FullySampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

fn draw_datasets(cfg: &MeanEstConfig, seed: u64, trial: u64) -> (Vec<Vec<f64>>, Datasets) {
    let mut task_rng = substream(seed, trial, Role::TrainTasks);
    let mut data_rng = substream(seed, trial, Role::TrainData);
    let mus: Vec<Vec<f64>> = (0..cfg.m)
        .map(|_| (0..cfg.d).map(|_| cfg.sigma_tau * task_rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let data = mus.iter().map(|mu| (0..cfg.n).map(|_| sample_around(cfg, mu, &mut data_rng)).collect()).collect();
    (mus, data)
}

fn sample_around(cfg: &MeanEstConfig, mu: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    mu.iter()
        .map(|&m| match cfg.sample_law {
            SampleLaw::Gaussian => m + cfg.sigma_z * rng.sample::<f64, _>(StandardNormal),
            SampleLaw::ShiftedRademacher => m + if rng.random::<bool>() { cfg.sigma_z } else { -cfg.sigma_z },
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One trial's `population − empirical` gap. The population risk evaluates
/// the trained parameters on fresh samples from the same task means.
fn trial_gap(cfg: &MeanEstConfig, seed: u64, trial: u64, mode: McMode, cov_chol: &DMatrix<f64>) -> f64 {
    let (mus, data) = draw_datasets(cfg, seed, trial);
    let (zbar_i, zbar) = task_means(cfg, &data);
    let mean = posterior_mean(cfg, &zbar_i, &zbar);
    let (m, d, a) = (cfg.m, cfg.d, cfg.alpha);
    let block = |v: &DVector<f64>, b: usize| -> Vec<f64> { v.rows(b * d, d).iter().copied().collect() };
    match mode {
        McMode::RaoBlackwell => {
            // the (1 − α)‖u − w‖² term and the posterior trace cancel
            let s2 = cfg.sigma_z * cfg.sigma_z;
            let gaps: Vec<f64> = (0..m)
                .map(|i| {
                    let mw = block(&mean, i);
                    let emp: f64 = data[i].iter().map(|z| sq_dist(z, &mw)).sum::<f64>() / cfg.n as f64;
                    a * (sq_dist(&mus[i], &mw) + d as f64 * s2 - emp)
                })
                .collect();
            gaps.iter().sum::<f64>() / m as f64
        }
        McMode::FullySampled => {
            let mut post_rng = substream(seed, trial, Role::Posterior);
            let mut test_rng = substream(seed, trial, Role::TestData);
            let eps = DVector::from_fn(cfg.dim(), |_, _| post_rng.sample::<f64, _>(StandardNormal));
            let draw = &mean + cov_chol * eps;
            let u = block(&draw, m);
            let gaps: Vec<f64> = (0..m)
                .map(|i| {
                    let w = block(&draw, i);
                    let reg = (1.0 - a) * sq_dist(&u, &w);
                    let fresh = sample_around(cfg, &mus[i], &mut test_rng);
                    let pop = a * sq_dist(&fresh, &w) + reg;
                    let emp = data[i].iter().map(|z| a * sq_dist(z, &w) + reg).sum::<f64>() / cfg.n as f64;
                    pop - emp
                })
                .collect();
            gaps.iter().sum::<f64>() / m as f64
        }
    }
}

/// Seeded Monte Carlo estimate of the generalization gap.
pub fn gen_monte_carlo(cfg: &MeanEstConfig, trials: u64, master_seed: u64, mode: McMode) -> Result<McEstimate> {
    cfg.require_interior()?;
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 trials, got {trials}")));
    }
    let cov = precision_matrix(cfg).cholesky().ok_or(Error::DegenerateAlpha(cfg.alpha))?.inverse();
    let cov_chol = cov.cholesky().ok_or(Error::DegenerateAlpha(cfg.alpha))?.l();
    let values: Vec<f64> =
        (0..trials).into_par_iter().map(|t| trial_gap(cfg, master_seed, t, mode, &cov_chol)).collect();
    let (estimate, stderr) = mean_and_stderr(&values);
    Ok(McEstimate { estimate, stderr, trials })
}

/// Linear map from the stacked samples (task-major, then sample, then
/// coordinate) to the noise-free part of `(W_{1:m}, U)`.
pub fn design_matrix(cfg: &MeanEstConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let (m, n, d, a) = (cfg.m, cfg.n, cfg.d, cfg.alpha);
    let (nf, mnf) = (n as f64, (m * n) as f64);
    let mut mat = DMatrix::zeros(cfg.dim(), m * n * d);
    for k in 0..m {
        for j in 0..n {
            for c in 0..d {
                let col = (k * n + j) * d + c;
                for i in 0..m {
                    let own = if i == k { a / nf } else { 0.0 };
                    mat[(i * d + c, col)] = own + (1.0 - a) / mnf;
                }
                mat[(m * d + c, col)] = 1.0 / mnf;
            }
        }
    }
    Ok(mat)
}

#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    pub a: DMatrix<f64>,
    pub aat: DMatrix<f64>,
    /// Covariance of the additive noise (the posterior covariance).
    pub sigma_n: DMatrix<f64>,
    /// `σ_Z² tr(Σ_N⁻¹ A Aᵀ)`
    pub trace_value: f64,
}

/// Writes the posterior as a Gaussian channel and evaluates its trace term.
pub fn channel_decomposition(cfg: &MeanEstConfig) -> Result<ChannelDecomposition> {
    cfg.require_interior()?;
    let a = design_matrix(cfg)?;
    let aat = &a * a.transpose();
    let sigma_n = precision_matrix(cfg).cholesky().ok_or(Error::DegenerateAlpha(cfg.alpha))?.inverse();
    let sigma_n = (&sigma_n + sigma_n.transpose()) * 0.5;
    let input = DMatrix::identity(a.ncols(), a.ncols()) * (cfg.sigma_z * cfg.sigma_z);
    let ch = GaussianChannel::new(a.clone(), input, sigma_n.clone(), false)?;
    let trace_value = gaussian_channel_info(&ch)?.iskl;
    Ok(ChannelDecomposition { a, aat, sigma_n, trace_value })
}

/// The printed entries of `AAᵀ`: W-diagonal, W off-diagonal, and the
/// common value of every entry involving `U`.
pub fn aat_entries(cfg: &MeanEstConfig) -> (f64, f64, f64) {
    let (m, n, a) = (cfg.m as f64, cfg.n as f64, cfg.alpha);
    let diag = ((m * a + (1.0 - a)).powi(2) + (m - 1.0) * (1.0 - a).powi(2)) / (m * m * n);
    let off = (2.0 * m * a * (1.0 - a) + m * (1.0 - a).powi(2)) / (m * m * n);
    (diag, off, 1.0 / (m * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::gaussian_gibbs;

    fn cfg(m: usize, n: usize, d: usize, alpha: f64) -> MeanEstConfig {
        MeanEstConfig { m, n, d, alpha, gamma: 1.0, sigma_z: 1.0, sigma_tau: 1.0, sample_law: SampleLaw::Gaussian }
    }

    #[test]
    fn closed_form_examples() {
        let c = cfg(2, 4, 1, 0.5);
        assert!((isk_closed_form(&c).unwrap() - 0.1875).abs() < 1e-15);
        assert!((gen_closed_form(&c).unwrap() - 0.1875).abs() < 1e-15);
        let zero = cfg(3, 5, 2, 0.0);
        assert_eq!(isk_closed_form(&zero).unwrap(), 0.0);
        assert_eq!(gen_closed_form(&zero).unwrap(), 0.0);
        let one = MeanEstConfig { gamma: 2.5, sigma_z: 1.3, ..cfg(3, 5, 2, 1.0) };
        let s2 = 1.3f64 * 1.3;
        assert!((isk_closed_form(&one).unwrap() - 2.0 * 2.5 * 2.0 * s2 / 5.0).abs() < 1e-12);
        assert!((gen_closed_form(&one).unwrap() - 2.0 * 2.0 * s2 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn constant_samples_collapse_the_mean() {
        let c = cfg(3, 2, 2, 0.4);
        let data = vec![vec![vec![0.7, -1.2]; 2]; 3];
        let p = posterior_params(&c, &data).unwrap();
        for i in 0..4 {
            assert!((p.mean[2 * i] - 0.7).abs() < 1e-15 && (p.mean[2 * i + 1] + 1.2).abs() < 1e-15);
        }
    }

    #[test]
    fn single_task_structure() {
        let c = cfg(1, 3, 1, 0.5);
        let data = vec![vec![vec![1.0], vec![2.0], vec![6.0]]];
        let p = posterior_params(&c, &data).unwrap();
        assert!((p.mean[0] - 3.0).abs() < 1e-15 && (p.mean[1] - 3.0).abs() < 1e-15);
        let want = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]);
        assert!((&p.precision - want).amax() < 1e-15);
    }

    #[test]
    fn tasks_are_conditionally_independent() {
        let c = MeanEstConfig { d: 2, ..cfg(3, 2, 2, 0.3) };
        let p = precision_matrix(&c);
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    assert_eq!(p.view((i * 2, k * 2), (2, 2)).amax(), 0.0);
                }
            }
        }
    }

    #[test]
    fn posterior_matches_generic_gaussian_gibbs() {
        let c = MeanEstConfig { gamma: 1.7, ..cfg(2, 3, 2, 0.35) };
        let data: Datasets = vec![
            vec![vec![0.1, 2.0], vec![-0.4, 1.1], vec![0.9, 0.3]],
            vec![vec![1.5, -0.2], vec![2.2, 0.0], vec![0.7, -1.4]],
        ];
        let p = posterior_params(&c, &data).unwrap();
        let g = gaussian_gibbs(&quadratic_energy(&c, &data).unwrap(), c.gamma).unwrap();
        assert!((g.mean() - &p.mean).amax() < 1e-12);
        let prec = g.cov().clone().try_inverse().unwrap();
        assert!((prec - &p.precision).amax() < 1e-9);
    }

    #[test]
    fn endpoints_are_degenerate_for_sampling_paths() {
        for a in [0.0, 1.0] {
            let c = cfg(2, 2, 1, a);
            assert!(matches!(gen_monte_carlo(&c, 100, 0, McMode::RaoBlackwell), Err(Error::DegenerateAlpha(_))));
            assert!(matches!(channel_decomposition(&c), Err(Error::DegenerateAlpha(_))));
            assert!(gen_closed_form(&c).is_ok());
        }
    }

    #[test]
    fn aat_matches_printed_entries() {
        for (m, n, a) in [(1, 4, 0.5), (3, 2, 0.25), (2, 3, 1.0), (4, 1, 0.0)] {
            let c = cfg(m, n, 1, a);
            let mat = design_matrix(&c).unwrap();
            let aat = &mat * mat.transpose();
            let (diag, off, u) = aat_entries(&c);
            for i in 0..m {
                assert!((aat[(i, i)] - diag).abs() < 1e-14);
                assert!((aat[(i, m)] - u).abs() < 1e-14);
                for k in 0..m {
                    if k != i {
                        assert!((aat[(i, k)] - off).abs() < 1e-14);
                    }
                }
            }
            assert!((aat[(m, m)] - u).abs() < 1e-14);
        }
        // m = 1: the W-diagonal is 1/n
        assert!((aat_entries(&cfg(1, 5, 1, 0.3)).0 - 0.2).abs() < 1e-15);
        // α = 1: W-diagonal 1/n, off-diagonal 0
        let (diag, off, _) = aat_entries(&cfg(3, 4, 1, 1.0));
        assert!((diag - 0.25).abs() < 1e-15 && off == 0.0);
    }

    #[test]
    fn trace_matches_closed_form() {
        for m in 1..=3 {
            for n in 1..=3 {
                let c = cfg(m, n, 1, 0.5);
                let t = channel_decomposition(&c).unwrap().trace_value;
                assert!((t - isk_closed_form(&c).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn monte_carlo_is_reproducible_and_close() {
        let c = cfg(2, 4, 1, 0.5);
        let a = gen_monte_carlo(&c, 4000, 7, McMode::RaoBlackwell).unwrap();
        let b = gen_monte_carlo(&c, 4000, 7, McMode::RaoBlackwell).unwrap();
        assert_eq!(a, b);
        assert!((a.estimate - 0.1875).abs() < 4.0 * a.stderr);
        let f = gen_monte_carlo(&c, 4000, 7, McMode::FullySampled).unwrap();
        assert!((f.estimate - 0.1875).abs() < 4.0 * f.stderr);
        assert!(gen_monte_carlo(&c, 10, 7, McMode::RaoBlackwell).is_err());
    }
}
