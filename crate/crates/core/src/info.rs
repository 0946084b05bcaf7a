//! Divergences and (conditional) information measures on finite tables, plus
//! the Gaussian closed forms. Everything is in nats.
//!
//! Absolute-continuity failures are hard errors. A lautum term that would be
//! infinite is never clamped, so identity checks cannot pass on broken
//! supports.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Tolerance on the total mass of a constructed distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Conditioning slices lighter than this are skipped.
pub const SLICE_MASS_FLOOR: f64 = 1e-15;

/// Maximum number of axes a [`JointDist`] may carry.
pub const MAX_AXES: usize = 8;

fn validate_probs(probs: &[f64]) -> Result<()> {
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum = pairwise_sum(probs);
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::NotNormalized { sum, tol: PROB_SUM_TOL });
    }
    Ok(())
}

fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A probability vector over an ordered list of outcome labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete")]
pub struct DiscreteDist {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiscrete {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<RawDiscrete> for DiscreteDist {
    type Error = Error;
    fn try_from(raw: RawDiscrete) -> Result<Self> {
        DiscreteDist::new(raw.outcomes, raw.probs)
    }
}

impl DiscreteDist {
    pub fn new(outcomes: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("empty outcome space".into()));
        }
        let mut seen = HashSet::new();
        for o in &outcomes {
            if !seen.insert(o.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate outcome `{o}`")));
            }
        }
        validate_probs(&probs)?;
        Ok(Self { outcomes, probs })
    }

    /// Outcomes labelled `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(index_labels(probs.len()), probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    /// Bernoulli law on outcomes `"0"`, `"1"` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::from_probs(vec![1.0 - p, p])
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, outcome: &str) -> Option<f64> {
        self.outcomes.iter().position(|o| o == outcome).map(|i| self.probs[i])
    }

    /// Total-variation distance to another law on the same outcome space.
    pub fn total_variation(&self, other: &DiscreteDist) -> Result<f64> {
        same_domain(self, other)?;
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

fn same_domain(p: &DiscreteDist, q: &DiscreteDist) -> Result<()> {
    if p.outcomes != q.outcomes {
        return Err(Error::DomainMismatch(format!("{} vs {} outcomes (labels must match in order)", p.len(), q.len())));
    }
    Ok(())
}

/// `D(p‖q)` on raw probability slices.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::SupportMismatch { detail: format!("q[{i}] = 0 while p[{i}] = {pi:e}"), slice: None });
        }
        terms.push(pi * (pi / qi).ln());
    }
    Ok(pairwise_sum(&terms))
}

/// Kullback–Leibler divergence `D(p‖q)` in nats.
pub fn kl(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    same_domain(p, q)?;
    kl_slices(&p.probs, &q.probs)
}

/// Symmetrized (Jeffreys) divergence `D(p‖q) + D(q‖p)`.
pub fn skl(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    Ok(kl(p, q)? + kl(q, p)?)
}

/// One named variable of a joint table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub labels: Vec<String>,
}

impl Axis {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Self {
        Self { name: name.into(), labels }
    }

    /// Axis with outcome labels `"0"..size`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        Self::new(name, index_labels(size))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A joint probability table over named finite axes, stored row-major
/// (last axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct JointDist {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJoint {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

impl TryFrom<RawJoint> for JointDist {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        JointDist::new(raw.axes, raw.table)
    }
}

/// A joint table regrouped into `(conditioning, x, y)` blocks:
/// `p[(z * nx + x) * ny + y]`.
#[derive(Debug, Clone)]
pub(crate) struct Grouped {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub p: Vec<f64>,
}

impl JointDist {
    pub fn new(axes: Vec<Axis>, table: Vec<f64>) -> Result<Self> {
        if axes.len() < 2 || axes.len() > MAX_AXES {
            return Err(Error::InvalidDistribution(format!(
                "a joint table needs 2..={MAX_AXES} axes, got {}",
                axes.len()
            )));
        }
        let mut names = HashSet::new();
        for a in &axes {
            if a.is_empty() {
                return Err(Error::InvalidDistribution(format!("axis `{}` is empty", a.name)));
            }
            if !names.insert(a.name.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate axis `{}`", a.name)));
            }
        }
        let cells: usize = axes.iter().map(Axis::len).product();
        if cells != table.len() {
            return Err(Error::ShapeMismatch(format!("axes describe {cells} cells but the table has {}", table.len())));
        }
        validate_probs(&table)?;
        Ok(Self { axes, table })
    }

    /// Joint of two independent laws.
    pub fn product(x_name: &str, px: &DiscreteDist, y_name: &str, py: &DiscreteDist) -> Result<Self> {
        let table = px.probs.iter().flat_map(|a| py.probs.iter().map(move |b| a * b)).collect();
        Self::new(vec![Axis::new(x_name, px.outcomes.clone()), Axis::new(y_name, py.outcomes.clone())], table)
    }

    /// Builds `P_X(x) P_{Y|X}(y|x)` from a marginal and a row-stochastic channel.
    pub fn from_channel(x_name: &str, px: &DiscreteDist, y_name: &str, channel: &[Vec<f64>]) -> Result<Self> {
        if channel.len() != px.len() {
            return Err(Error::ShapeMismatch("channel needs one row per input".into()));
        }
        let ny = channel[0].len();
        let mut table = Vec::with_capacity(px.len() * ny);
        for (row, &p) in channel.iter().zip(&px.probs) {
            if row.len() != ny {
                return Err(Error::ShapeMismatch("ragged channel".into()));
            }
            table.extend(row.iter().map(|c| p * c));
        }
        Self::new(vec![Axis::new(x_name, px.outcomes.clone()), Axis::indexed(y_name, ny)], table)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes.iter().position(|a| a.name == name).ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.axis_index(n)).collect()
    }

    /// Regroups the table into `(z, x, y)` blocks, summing out unnamed axes.
    /// An empty `z` gives a single conditioning slice.
    pub(crate) fn grouped(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<Grouped> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidParameter("both variable groups must be non-empty".into()));
        }
        let (xi, yi, zi) = (self.resolve(x)?, self.resolve(y)?, self.resolve(z)?);
        let mut used = HashSet::new();
        for &a in xi.iter().chain(&yi).chain(&zi) {
            if !used.insert(a) {
                return Err(Error::InvalidParameter(format!(
                    "axis `{}` appears in more than one group",
                    self.axes[a].name
                )));
            }
        }
        let shape = self.shape();
        // per-axis (group, stride within group)
        let mut role = vec![(3u8, 0usize); shape.len()];
        let mut assign = |idx: &[usize], g: u8| -> usize {
            let mut stride = 1;
            for &a in idx.iter().rev() {
                role[a] = (g, stride);
                stride *= shape[a];
            }
            stride
        };
        let nx = assign(&xi, 0);
        let ny = assign(&yi, 1);
        let nz = assign(&zi, 2);
        let mut p = vec![0.0; nx * ny * nz];
        let mut digit = vec![0usize; shape.len()];
        let (mut gx, mut gy, mut gz) = (0usize, 0usize, 0usize);
        for &v in &self.table {
            p[(gz * nx + gx) * ny + gy] += v;
            // odometer increment, keeping the group offsets in sync
            for a in (0..shape.len()).rev() {
                let (g, s) = role[a];
                digit[a] += 1;
                let bump = |o: &mut usize, up: bool| {
                    if up {
                        *o += s
                    } else {
                        *o -= s * (shape[a] - 1)
                    }
                };
                let up = digit[a] < shape[a];
                match g {
                    0 => bump(&mut gx, up),
                    1 => bump(&mut gy, up),
                    2 => bump(&mut gz, up),
                    _ => {}
                }
                if up {
                    break;
                }
                digit[a] = 0;
            }
        }
        Ok(Grouped { nx, ny, nz, p })
    }

    /// Marginal over the named axes, in the given order.
    pub fn marginal(&self, names: &[&str]) -> Result<DiscreteDist> {
        let idx = self.resolve(names)?;
        let shape = self.shape();
        let mut out = vec![0.0; idx.iter().map(|&a| shape[a]).product()];
        let mut digit = vec![0usize; shape.len()];
        for &v in &self.table {
            let k = idx.iter().fold(0, |k, &a| k * shape[a] + digit[a]);
            out[k] += v;
            for a in (0..shape.len()).rev() {
                digit[a] += 1;
                if digit[a] < shape[a] {
                    break;
                }
                digit[a] = 0;
            }
        }
        let labels = if idx.len() == 1 { self.axes[idx[0]].labels.clone() } else { index_labels(out.len()) };
        // absorb accumulated rounding only; the mass is already 1
        let sum = pairwise_sum(&out);
        DiscreteDist::new(labels, out.iter().map(|v| v / sum).collect())
    }
}

/// Which information functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoKind {
    /// `D(P_XY ‖ P_X ⊗ P_Y)`
    Mutual,
    /// `D(P_X ⊗ P_Y ‖ P_XY)`
    Lautum,
    /// mutual + lautum
    Skl,
}

fn slice_measures(g: &Grouped, want_lautum: bool) -> (f64, Option<Result<f64>>) {
    let (nx, ny) = (g.nx, g.ny);
    let mut mutual_terms = Vec::with_capacity(g.nz);
    let mut lautum_terms = Vec::with_capacity(g.nz);
    let mut lautum_err = None;
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for z in 0..g.nz {
        let block = &g.p[z * nx * ny..(z + 1) * nx * ny];
        let pz = pairwise_sum(block);
        if pz < SLICE_MASS_FLOOR {
            continue;
        }
        px.iter_mut().for_each(|v| *v = 0.0);
        py.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            for y in 0..ny {
                let v = block[x * ny + y] / pz;
                px[x] += v;
                py[y] += v;
            }
        }
        let mut mi = Vec::with_capacity(nx * ny);
        let mut la = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                let pxy = block[x * ny + y] / pz;
                let prod = px[x] * py[y];
                if pxy > 0.0 {
                    mi.push(pxy * (pxy / prod).ln());
                }
                if want_lautum && prod > 0.0 {
                    if pxy == 0.0 {
                        if lautum_err.is_none() {
                            lautum_err = Some(Error::SupportMismatch {
                                detail: format!("joint cell (x={x}, y={y}) is 0 where the product is {prod:e}"),
                                slice: (g.nz > 1).then_some(z),
                            });
                        }
                    } else {
                        la.push(prod * (prod / pxy).ln());
                    }
                }
            }
        }
        mutual_terms.push(pz * pairwise_sum(&mi));
        lautum_terms.push(pz * pairwise_sum(&la));
    }
    let mutual = pairwise_sum(&mutual_terms);
    let lautum = want_lautum.then(|| match lautum_err {
        Some(e) => Err(e),
        None => Ok(pairwise_sum(&lautum_terms)),
    });
    (mutual, lautum)
}

/// Conditional information `E_{P_Z}[measure(P_{XY|Z=z}, P_{X|Z=z} ⊗ P_{Y|Z=z})]`
/// between variable groups. Each group lists one or more axis names; an
/// empty `z` gives the unconditional measure.
pub fn cond_info_groups(j: &JointDist, x: &[&str], y: &[&str], z: &[&str], kind: InfoKind) -> Result<f64> {
    let g = j.grouped(x, y, z)?;
    let want_lautum = kind != InfoKind::Mutual;
    let (mutual, lautum) = slice_measures(&g, want_lautum);
    match kind {
        InfoKind::Mutual => Ok(mutual),
        InfoKind::Lautum => lautum.expect("requested"),
        InfoKind::Skl => {
            let lautum = lautum.expect("requested")?;
            Ok(mutual + lautum)
        }
    }
}

/// Both parts at once; used where a caller reports I, L and ISKL together.
pub fn info_triple(j: &JointDist, x: &[&str], y: &[&str], z: &[&str]) -> Result<InfoTriple> {
    let g = j.grouped(x, y, z)?;
    let (mutual, lautum) = slice_measures(&g, true);
    let lautum = lautum.expect("requested")?;
    Ok(InfoTriple { mutual, lautum, skl: mutual + lautum })
}

/// Mutual, lautum and symmetrized-KL information of one variable pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoTriple {
    pub mutual: f64,
    pub lautum: f64,
    pub skl: f64,
}

/// `I(X;Y) = D(P_XY ‖ P_X ⊗ P_Y)`.
pub fn mutual_info(j: &JointDist, x: &str, y: &str) -> Result<f64> {
    cond_info_groups(j, &[x], &[y], &[], InfoKind::Mutual)
}

/// `L(X;Y) = D(P_X ⊗ P_Y ‖ P_XY)`.
pub fn lautum_info(j: &JointDist, x: &str, y: &str) -> Result<f64> {
    cond_info_groups(j, &[x], &[y], &[], InfoKind::Lautum)
}

/// Symmetrized KL information `I + L`.
pub fn skl_info(j: &JointDist, x: &str, y: &str) -> Result<f64> {
    let t = info_triple(j, &[x], &[y], &[])?;
    Ok(t.skl)
}

/// Conditional measure with single-axis groups.
pub fn cond_info(j: &JointDist, x: &str, y: &str, z: &str, kind: InfoKind) -> Result<f64> {
    cond_info_groups(j, &[x], &[y], &[z], kind)
}

/// `D(P_{X|Z} ‖ P_{X|Z,Y} | P_Z P_Y) = Σ_{z,y} p(z) p(y) D(P_{X|z} ‖ P_{X|z,y})`.
///
/// This is the term that separates `L(X,Z;Y)` from `L(Z;Y)`.
pub fn product_conditional_divergence(j: &JointDist, x: &[&str], z: &[&str], y: &[&str]) -> Result<f64> {
    // regroup as (z, x, y) blocks
    let g = j.grouped(x, y, z)?;
    let (nx, ny) = (g.nx, g.ny);
    let mut py = vec![0.0; ny];
    for row in g.p.chunks(ny) {
        for (acc, v) in py.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let mut terms = Vec::new();
    for z in 0..g.nz {
        let block = &g.p[z * nx * ny..(z + 1) * nx * ny];
        let pz = pairwise_sum(block);
        if pz < SLICE_MASS_FLOOR {
            continue;
        }
        let px_z: Vec<f64> = (0..nx).map(|x| (0..ny).map(|y| block[x * ny + y]).sum::<f64>() / pz).collect();
        for y in 0..ny {
            if py[y] < SLICE_MASS_FLOOR {
                continue;
            }
            let pzy: f64 = (0..nx).map(|x| block[x * ny + y]).sum();
            if pzy <= 0.0 {
                // P_{X|z,y} undefined where (z, y) has no joint mass but the
                // product measure P_Z P_Y does
                return Err(Error::SupportMismatch {
                    detail: format!("conditional P(x | z, y={y}) undefined: (z, y) has zero mass"),
                    slice: Some(z),
                });
            }
            let px_zy: Vec<f64> = (0..nx).map(|x| block[x * ny + y] / pzy).collect();
            let d = kl_slices(&px_z, &px_zy).map_err(|e| match e {
                Error::SupportMismatch { detail, .. } => Error::SupportMismatch { detail, slice: Some(z) },
                other => other,
            })?;
            terms.push(pz * py[y] * d);
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Mean vector and covariance matrix of a multivariate normal law.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDist {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Symmetry and PSD tolerance for covariance inputs.
pub const COV_TOL: f64 = 1e-12;

impl GaussianDist {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "mean has dimension {d} but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        check_symmetric(&cov)?;
        let min_eig = cov.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -COV_TOL {
            return Err(Error::SingularCovariance(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { mean, cov })
    }

    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let asym = (m - m.transpose()).amax();
    if asym > COV_TOL * m.amax().max(1.0) {
        return Err(Error::InvalidParameter(format!("matrix is not symmetric (max asymmetry {asym:e})")));
    }
    Ok(())
}

fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    m.clone().cholesky().ok_or_else(|| Error::SingularCovariance(format!("{what} is not positive definite")))
}

fn log_det(ch: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> f64 {
    2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// `D(p‖q)` between multivariate normals (closed form).
pub fn gaussian_kl(p: &GaussianDist, q: &GaussianDist) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!("dimensions {} and {}", p.dim(), q.dim())));
    }
    let cq = cholesky(&q.cov, "reference covariance")?;
    let cp = cholesky(&p.cov, "covariance of the first argument")?;
    let k = p.dim() as f64;
    let trace = cq.solve(&p.cov).trace();
    let diff = &q.mean - &p.mean;
    let maha = diff.dot(&cq.solve(&diff));
    Ok(0.5 * (trace + maha - k + log_det(&cq) - log_det(&cp)))
}

/// Linear Gaussian channel `Y = A X + N` with `N ~ N(0, Σ_N)`.
#[derive(Debug, Clone)]
pub struct GaussianChannel {
    a: DMatrix<f64>,
    input_cov: DMatrix<f64>,
    noise_cov: DMatrix<f64>,
    input_gaussian: bool,
}

impl GaussianChannel {
    pub fn new(
        a: DMatrix<f64>,
        input_cov: DMatrix<f64>,
        noise_cov: DMatrix<f64>,
        input_gaussian: bool,
    ) -> Result<Self> {
        let (dy, dx) = a.shape();
        if input_cov.shape() != (dx, dx) {
            return Err(Error::ShapeMismatch(format!("input covariance must be {dx}x{dx}")));
        }
        if noise_cov.shape() != (dy, dy) {
            return Err(Error::ShapeMismatch(format!("noise covariance must be {dy}x{dy}")));
        }
        check_symmetric(&input_cov)?;
        check_symmetric(&noise_cov)?;
        cholesky(&noise_cov, "noise covariance")?;
        Ok(Self { a, input_cov, noise_cov, input_gaussian })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }

    /// Ratio of extreme eigenvalues of the noise covariance.
    pub fn noise_condition_number(&self) -> f64 {
        let e = self.noise_cov.clone().symmetric_eigen().eigenvalues;
        e.max() / e.min()
    }
}

/// Information quantities of a [`GaussianChannel`]. The trace term
/// `tr(Σ_N⁻¹ A Σ Aᵀ)` equals `ISKL` for any zero-mean input with covariance
/// `Σ`; `I` and `L` separately need a Gaussian input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelInfo {
    pub iskl: f64,
    pub mutual: Option<f64>,
    pub lautum: Option<f64>,
    /// `D(P_Y ‖ P_N)` when the input is Gaussian.
    pub output_divergence: Option<f64>,
}

pub fn gaussian_channel_info(ch: &GaussianChannel) -> Result<ChannelInfo> {
    let cn = cholesky(&ch.noise_cov, "noise covariance")?;
    let signal = &ch.a * &ch.input_cov * ch.a.transpose();
    let iskl = cn.solve(&signal).trace();
    if !ch.input_gaussian {
        return Ok(ChannelInfo { iskl, mutual: None, lautum: None, output_divergence: None });
    }
    let dy = ch.a.nrows();
    let zero = DVector::zeros(dy);
    let py = GaussianDist::new(zero.clone(), &signal + &ch.noise_cov)?;
    let pn = GaussianDist::new(zero, ch.noise_cov.clone())?;
    let d = gaussian_kl(&py, &pn)?;
    Ok(ChannelInfo { iskl, mutual: Some(0.5 * iskl - d), lautum: Some(0.5 * iskl + d), output_divergence: Some(d) })
}
