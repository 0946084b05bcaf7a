//! Gibbs posteriors `π(y) e^{-γ f(y, x)} / V_f(x, γ)` on finite hypothesis
//! spaces, and the closed form for quadratic energies under a flat prior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::info::{DiscreteDist, GaussianDist};
use crate::numeric::log_sum_exp;

/// Energy table `f(y, x)`, stored per context: `energy[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpec {
    hypotheses: Vec<String>,
    energy: Vec<Vec<f64>>,
}

impl EnergySpec {
    pub fn new(hypotheses: Vec<String>, energy: Vec<Vec<f64>>) -> Result<Self> {
        for (x, row) in energy.iter().enumerate() {
            if row.len() != hypotheses.len() {
                return Err(Error::ShapeMismatch(format!(
                    "context {x} has {} energies for {} hypotheses",
                    row.len(),
                    hypotheses.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite energy {v} in context {x}")));
            }
        }
        Ok(Self { hypotheses, energy })
    }

    /// A single-context spec.
    pub fn single(hypotheses: Vec<String>, energy: Vec<f64>) -> Result<Self> {
        Self::new(hypotheses, vec![energy])
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn contexts(&self) -> usize {
        self.energy.len()
    }

    pub fn energy(&self, x: usize) -> &[f64] {
        &self.energy[x]
    }
}

/// The posterior for every context, with its log partition function.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsPosterior {
    pub gamma: f64,
    pub prior: DiscreteDist,
    pub per_context: Vec<DiscreteDist>,
    pub log_partition: Vec<f64>,
}

/// Normalized Gibbs weights on raw slices; returns `(weights, ln V)`.
///
/// Zero-prior hypotheses get weight exactly 0.
pub fn gibbs_weights(prior: &[f64], energy: &[f64], gamma: f64) -> (Vec<f64>, f64) {
    let logits: Vec<f64> =
        prior.iter().zip(energy).map(|(&p, &f)| if p > 0.0 { p.ln() - gamma * f } else { f64::NEG_INFINITY }).collect();
    let lz = log_sum_exp(&logits);
    let w = logits.iter().map(|l| (l - lz).exp()).collect();
    (w, lz)
}

fn check_inputs(spec: &EnergySpec, prior: &DiscreteDist, gamma: f64, x: usize) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::NegativeGamma(gamma));
    }
    if prior.outcomes() != spec.hypotheses() {
        return Err(Error::PriorSupportMismatch(format!(
            "prior has {} outcomes, hypothesis space has {}",
            prior.len(),
            spec.hypotheses().len()
        )));
    }
    if x >= spec.contexts() {
        return Err(Error::InvalidParameter(format!("context {x} out of range")));
    }
    Ok(())
}

/// Posterior `∝ π(y) e^{-γ f(y, x)}` for one context.
pub fn gibbs_posterior(spec: &EnergySpec, prior: &DiscreteDist, gamma: f64, x: usize) -> Result<DiscreteDist> {
    check_inputs(spec, prior, gamma, x)?;
    let (w, _) = gibbs_weights(prior.probs(), spec.energy(x), gamma);
    // weights already sum to 1 up to rounding; absorb it before validation
    let s: f64 = w.iter().sum();
    DiscreteDist::new(spec.hypotheses().to_vec(), w.iter().map(|v| v / s).collect())
}

/// `ln Σ_y π(y) e^{-γ f(y, x)}`.
pub fn log_partition(spec: &EnergySpec, prior: &DiscreteDist, gamma: f64, x: usize) -> Result<f64> {
    check_inputs(spec, prior, gamma, x)?;
    Ok(gibbs_weights(prior.probs(), spec.energy(x), gamma).1)
}

/// Posterior for every context at once.
pub fn gibbs_all(spec: &EnergySpec, prior: &DiscreteDist, gamma: f64) -> Result<GibbsPosterior> {
    let mut per_context = Vec::with_capacity(spec.contexts());
    let mut log_partition = Vec::with_capacity(spec.contexts());
    for x in 0..spec.contexts() {
        per_context.push(gibbs_posterior(spec, prior, gamma, x)?);
        log_partition.push(gibbs_weights(prior.probs(), spec.energy(x), gamma).1);
    }
    Ok(GibbsPosterior { gamma, prior: prior.clone(), per_context, log_partition })
}

/// `f(w) = ½ wᵀQw − bᵀw + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnergy {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticEnergy {
    pub fn eval(&self, w: &DVector<f64>) -> f64 {
        0.5 * w.dot(&(&self.q * w)) - self.b.dot(w) + self.c
    }
}

/// Relative eigenvalue threshold below which a precision direction counts
/// as unconstrained.
const NULL_TOL: f64 = 1e-10;

/// Gibbs posterior of a quadratic energy under a flat prior: precision
/// `γQ`, mean `Q⁻¹b`.
pub fn gaussian_gibbs(energy: &QuadraticEnergy, gamma: f64) -> Result<GaussianDist> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::NegativeGamma(gamma));
    }
    let d = energy.b.len();
    if energy.q.shape() != (d, d) {
        return Err(Error::ShapeMismatch(format!("Q must be {d}x{d}")));
    }
    let precision = &energy.q * gamma;
    let eig = precision.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let null_space: Vec<Vec<f64>> = (0..d)
        .filter(|&i| eig.eigenvalues[i] <= NULL_TOL * scale || gamma == 0.0)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    if !null_space.is_empty() {
        return Err(Error::SingularPrecision { null_space });
    }
    let chol = energy.q.clone().cholesky().ok_or_else(|| Error::SingularPrecision { null_space: Vec::new() })?;
    let mean = chol.solve(&energy.b);
    let cov = chol.inverse() / gamma;
    // symmetrize the rounding of the inverse
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianDist::new(mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn gamma_zero_returns_prior() {
        let prior = DiscreteDist::from_probs(vec![0.2, 0.3, 0.5]).unwrap();
        let spec = EnergySpec::single(labels(3), vec![3.0, 0.1, 7.0]).unwrap();
        let post = gibbs_posterior(&spec, &prior, 0.0, 0).unwrap();
        for (a, b) in post.probs().iter().zip(prior.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(log_partition(&spec, &prior, 0.0, 0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_point_example() {
        let prior = DiscreteDist::uniform(2).unwrap();
        let spec = EnergySpec::single(labels(2), vec![0.0, 1.0]).unwrap();
        let g = 2f64.ln();
        let post = gibbs_posterior(&spec, &prior, g, 0).unwrap();
        assert!((post.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((post.probs()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((log_partition(&spec, &prior, g, 0).unwrap() - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_energy_and_shift() {
        let prior = DiscreteDist::from_probs(vec![0.1, 0.6, 0.3]).unwrap();
        let flat = EnergySpec::single(labels(3), vec![4.0; 3]).unwrap();
        let post = gibbs_posterior(&flat, &prior, 3.0, 0).unwrap();
        assert!(post.total_variation(&prior).unwrap() < 1e-15);

        let f = vec![0.3, 1.2, 0.7];
        let c = 2.5;
        let base = EnergySpec::single(labels(3), f.clone()).unwrap();
        let shifted = EnergySpec::single(labels(3), f.iter().map(|v| v + c).collect()).unwrap();
        let g = 1.7;
        let p0 = gibbs_posterior(&base, &prior, g, 0).unwrap();
        let p1 = gibbs_posterior(&shifted, &prior, g, 0).unwrap();
        assert!(p0.total_variation(&p1).unwrap() < 1e-12);
        let l0 = log_partition(&base, &prior, g, 0).unwrap();
        let l1 = log_partition(&shifted, &prior, g, 0).unwrap();
        assert!((l1 - (l0 - g * c)).abs() < 1e-12);
    }

    #[test]
    fn large_gamma_concentrates_on_minimizers() {
        let prior = DiscreteDist::from_probs(vec![0.1, 0.6, 0.3]).unwrap();
        let spec = EnergySpec::single(labels(3), vec![0.2, 0.5, 0.2]).unwrap();
        let post = gibbs_posterior(&spec, &prior, 1e6, 0).unwrap();
        // limit is the prior restricted to the minimizers
        let limit = DiscreteDist::from_probs(vec![0.25, 0.0, 0.75]).unwrap();
        assert!(post.total_variation(&limit).unwrap() < 1e-6);
        // uniform prior: uniform over minimizers
        let post = gibbs_posterior(&spec, &DiscreteDist::uniform(3).unwrap(), 1e6, 0).unwrap();
        let limit = DiscreteDist::from_probs(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(post.total_variation(&limit).unwrap() < 1e-6);
    }

    #[test]
    fn errors() {
        let prior = DiscreteDist::uniform(2).unwrap();
        let spec = EnergySpec::single(labels(2), vec![0.0, 1.0]).unwrap();
        assert!(matches!(gibbs_posterior(&spec, &prior, -1.0, 0), Err(Error::NegativeGamma(_))));
        let wrong = DiscreteDist::uniform(3).unwrap();
        assert!(matches!(gibbs_posterior(&spec, &wrong, 1.0, 0), Err(Error::PriorSupportMismatch(_))));
        assert!(EnergySpec::single(labels(2), vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn log_partition_decreases_in_gamma() {
        let prior = DiscreteDist::from_probs(vec![0.1, 0.6, 0.3]).unwrap();
        let spec = EnergySpec::single(labels(3), vec![0.2, 0.5, 1.4]).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let v = log_partition(&spec, &prior, k as f64 * 0.5, 0).unwrap();
            assert!(v <= last + 1e-15);
            last = v;
        }
    }

    #[test]
    fn scalar_quadratic() {
        let mu = 0.7;
        let e = QuadraticEnergy { q: DMatrix::from_element(1, 1, 2.0), b: DVector::from_element(1, 2.0 * mu), c: 0.0 };
        let g = gaussian_gibbs(&e, 1.0).unwrap();
        assert!((g.mean()[0] - mu).abs() < 1e-15);
        assert!((g.cov()[(0, 0)] - 0.5).abs() < 1e-15);
        let g2 = gaussian_gibbs(&e, 2.0).unwrap();
        assert!((g2.cov()[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((g2.mean()[0] - mu).abs() < 1e-15);
    }

    #[test]
    fn singular_quadratic_reports_null_space() {
        let e = QuadraticEnergy {
            q: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            b: DVector::from_vec(vec![1.0, 1.0]),
            c: 0.0,
        };
        match gaussian_gibbs(&e, 1.0) {
            Err(Error::SingularPrecision { null_space }) => {
                assert_eq!(null_space.len(), 1);
                let v = &null_space[0];
                assert!((v[0] + v[1]).abs() < 1e-12);
            }
            other => panic!("expected SingularPrecision, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_mean_is_stationary_point() {
        let q = DMatrix::from_row_slice(3, 3, &[3.0, 0.5, 0.2, 0.5, 2.0, -0.3, 0.2, -0.3, 1.5]);
        let b = DVector::from_vec(vec![0.4, -1.0, 2.0]);
        let e = QuadraticEnergy { q, b, c: 0.3 };
        let g = gaussian_gibbs(&e, 1.3).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut up = g.mean().clone();
            let mut dn = g.mean().clone();
            up[i] += h;
            dn[i] -= h;
            let grad = (e.eval(&up) - e.eval(&dn)) / (2.0 * h);
            assert!(grad.abs() < 1e-6, "coordinate {i}: gradient {grad}");
        }
    }
}
