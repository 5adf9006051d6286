//! Gaussian mixture models fitted by expectation-maximization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;
use rand::Rng;

use super::kmeans::{kmeans, KMeansInit};
use super::{overlap_assign, Assigner, MembershipMatrix, Partitioning};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::seed;

const MAX_ITER: usize = 300;
const REL_TOL: f64 = 1e-6;
const COLLAPSE_LOG_DET: f64 = -690.775_527_898_213_7; // ln(1e-300)
const COLLAPSE_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CovarianceMode {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Covariance {
    Full(Matrix),
    Diagonal(Vec<f64>),
}

impl Covariance {
    fn add_jitter(&mut self, eps: f64) {
        match self {
            Covariance::Full(m) => {
                for i in 0..m.rows() {
                    m[(i, i)] += eps;
                }
            }
            Covariance::Diagonal(v) => v.iter_mut().for_each(|x| *x += eps),
        }
    }
}

/// Precomputed form of one component's density.
enum Density {
    Full(Cholesky),
    Diagonal(Vec<f64>),
}

impl Density {
    fn new(cov: &Covariance) -> Option<(Self, f64)> {
        match cov {
            Covariance::Full(m) => {
                let c = Cholesky::factor(m).ok()?;
                let ld = c.log_det();
                Some((Density::Full(c), ld))
            }
            Covariance::Diagonal(v) => {
                if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    return None;
                }
                Some((Density::Diagonal(v.clone()), v.iter().map(|x| x.ln()).sum()))
            }
        }
    }

    /// `(x-μ)ᵀ Σ⁻¹ (x-μ)`
    fn mahalanobis(&self, x: &[f64], mean: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(x.iter().zip(mean).map(|(a, b)| a - b));
        match self {
            Density::Full(c) => {
                c.forward_in_place(scratch);
                scratch.iter().map(|v| v * v).sum()
            }
            Density::Diagonal(var) => scratch.iter().zip(var).map(|(z, v)| z * z / v).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    /// One row per component.
    pub means: Matrix,
    pub covariances: Vec<Covariance>,
}

impl GaussianMixture {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    fn densities(&self) -> Result<Vec<(Density, f64)>> {
        self.covariances
            .iter()
            .enumerate()
            .map(|(j, c)| {
                Density::new(c).ok_or_else(|| {
                    Error::input(format!("mixture component {j} has a singular covariance"))
                })
            })
            .collect()
    }

    /// Per-row log of `πⱼ N(x | μⱼ, Σⱼ)` for every component.
    fn log_joint(&self, densities: &[(Density, f64)], points: &Matrix) -> Matrix {
        let d = self.dim() as f64;
        let k = self.k();
        let mut out = Matrix::zeros(points.rows(), k);
        let mut scratch = Vec::with_capacity(self.dim());
        for (i, x) in points.row_iter().enumerate() {
            let row = out.row_mut(i);
            for j in 0..k {
                let (dens, log_det) = &densities[j];
                let m = dens.mahalanobis(x, self.means.row(j), &mut scratch);
                row[j] = self.weights[j].ln() - 0.5 * (m + log_det + d * (2.0 * PI).ln());
            }
        }
        out
    }
}

/// Normalizes each row of log-joint values into probabilities in place and
/// returns the total log-likelihood.
fn normalize_rows(log_joint: &mut Matrix) -> f64 {
    let mut total = 0.0;
    for i in 0..log_joint.rows() {
        let row = log_joint.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let lse = max + s.ln();
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
        total += lse;
    }
    total
}

/// Posterior component probabilities `Pr(C = l | x)` for every row of `q`.
pub fn gmm_membership(model: &GaussianMixture, q: &Matrix) -> Result<MembershipMatrix> {
    if q.cols() != model.dim() {
        return Err(Error::shape(format!(
            "queries have dimension {} but the mixture has {}",
            q.cols(),
            model.dim()
        )));
    }
    let dens = model.densities()?;
    let mut lj = model.log_joint(&dens, q);
    normalize_rows(&mut lj);
    Ok(MembershipMatrix::from_trusted(lj))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    pub mixture: GaussianMixture,
    /// Responsibilities of the training rows under `mixture`.
    pub responsibilities: MembershipMatrix,
    /// Data log-likelihood at every E-step.
    pub log_likelihood_history: Vec<f64>,
    pub partitioning: Partitioning,
}

fn weighted_covariance(points: &Matrix, resp: &[f64], mean: &[f64], nk: f64, mode: CovarianceMode) -> Covariance {
    let d = points.cols();
    match mode {
        CovarianceMode::Full => {
            let mut c = Matrix::zeros(d, d);
            let mut diff = vec![0.0; d];
            for (x, r) in points.row_iter().zip(resp) {
                if *r == 0.0 {
                    continue;
                }
                for ((o, a), b) in diff.iter_mut().zip(x).zip(mean) {
                    *o = a - b;
                }
                for a in 0..d {
                    let s = r * diff[a];
                    for (b, db) in diff[..=a].iter().enumerate() {
                        c[(a, b)] += s * db;
                    }
                }
            }
            for a in 0..d {
                for b in 0..=a {
                    let v = c[(a, b)] / nk;
                    c[(a, b)] = v;
                    c[(b, a)] = v;
                }
            }
            Covariance::Full(c)
        }
        CovarianceMode::Diagonal => {
            let mut v = vec![0.0; d];
            for (x, r) in points.row_iter().zip(resp) {
                for ((o, a), b) in v.iter_mut().zip(x).zip(mean) {
                    *o += r * (a - b) * (a - b);
                }
            }
            Covariance::Diagonal(v.into_iter().map(|s| s / nk).collect())
        }
    }
}

/// Fits a `k`-component mixture by EM, starting from a seeded K-means
/// solution, until the relative log-likelihood gain drops below `1e-6` (or
/// 300 iterations). A component whose covariance collapses is re-seeded at
/// a random data point with `1e-6` added to its diagonal.
///
/// The training responsibilities are turned into overlapping clusters with
/// [`overlap_assign`].
pub fn gmm_fit(points: &Matrix, k: usize, mode: CovarianceMode, overlap: f64, seed: u64) -> Result<GmmFit> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::parameter(format!("mixture needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = seed::rng(seed::subseed(seed, 1));

    // initialize from hard K-means labels
    let km = kmeans(points, k, KMeansInit::RandomPoints, seed)?;
    let mut resp = Matrix::zeros(n, k);
    for (i, &l) in km.labels.iter().enumerate() {
        resp[(i, l)] = 1.0;
    }
    let mut mixture = m_step(points, &resp, mode);

    let mut history = Vec::new();
    let mut iter = 0;
    loop {
        repair_collapsed(&mut mixture, points, &mut rng);
        let dens = mixture.densities()?;
        let mut lj = mixture.log_joint(&dens, points);
        let ll = normalize_rows(&mut lj);
        resp = lj;
        let converged = history
            .last()
            .is_some_and(|prev: &f64| (ll - prev) < REL_TOL * prev.abs());
        history.push(ll);
        if converged || iter >= MAX_ITER {
            break;
        }
        mixture = m_step(points, &resp, mode);
        iter += 1;
    }

    let responsibilities = MembershipMatrix::from_trusted(resp);
    let clusters = overlap_assign(&responsibilities, overlap)?;
    let partitioning = Partitioning {
        clusters,
        assigner: Assigner::Mixture { mixture: mixture.clone() },
    };
    Ok(GmmFit { mixture, responsibilities, log_likelihood_history: history, partitioning })
}

fn m_step(points: &Matrix, resp: &Matrix, mode: CovarianceMode) -> GaussianMixture {
    let (n, k, d) = (points.rows(), resp.cols(), points.cols());
    let mut weights = Vec::with_capacity(k);
    let mut means = Matrix::zeros(k, d);
    let mut covariances = Vec::with_capacity(k);
    let mut col = vec![0.0; n];
    for j in 0..k {
        for (c, i) in col.iter_mut().zip(0..n) {
            *c = resp[(i, j)];
        }
        let nk: f64 = col.iter().sum();
        weights.push(nk / n as f64);
        if nk > 0.0 {
            for (x, r) in points.row_iter().zip(&col) {
                for (m, v) in means.row_mut(j).iter_mut().zip(x) {
                    *m += r * v;
                }
            }
            means.row_mut(j).iter_mut().for_each(|m| *m /= nk);
            covariances.push(weighted_covariance(points, &col, means.row(j), nk, mode));
        } else {
            covariances.push(match mode {
                CovarianceMode::Full => Covariance::Full(Matrix::zeros(d, d)),
                CovarianceMode::Diagonal => Covariance::Diagonal(vec![0.0; d]),
            });
        }
    }
    GaussianMixture { weights, means, covariances }
}

fn is_collapsed(mixture: &GaussianMixture, j: usize) -> bool {
    mixture.weights[j] <= 0.0
        || Density::new(&mixture.covariances[j]).map_or(true, |(_, ld)| ld < COLLAPSE_LOG_DET)
}

fn repair_collapsed<R: Rng>(mixture: &mut GaussianMixture, points: &Matrix, rng: &mut R) {
    let n = points.rows();
    let k = mixture.k();
    for j in 0..k {
        if !is_collapsed(mixture, j) {
            continue;
        }
        let i = rng.random_range(0..n);
        mixture.means.row_mut(j).copy_from_slice(points.row(i));
        mixture.covariances[j].add_jitter(COLLAPSE_JITTER);
        if is_collapsed(mixture, j) {
            // fall back to the overall per-column variance
            let d = points.cols();
            let mut var = vec![0.0; d];
            for c in 0..d {
                let mean = points.row_iter().map(|r| r[c]).sum::<f64>() / n as f64;
                var[c] = points.row_iter().map(|r| (r[c] - mean) * (r[c] - mean)).sum::<f64>() / n as f64
                    + COLLAPSE_JITTER;
            }
            mixture.covariances[j] = match mixture.covariances[j] {
                Covariance::Full(_) => {
                    let mut m = Matrix::zeros(d, d);
                    for (c, v) in var.iter().enumerate() {
                        m[(c, c)] = *v;
                    }
                    Covariance::Full(m)
                }
                Covariance::Diagonal(_) => Covariance::Diagonal(var),
            };
        }
        if mixture.weights[j] <= 0.0 {
            mixture.weights[j] = 1.0 / n as f64;
        }
        let s: f64 = mixture.weights.iter().sum();
        mixture.weights.iter_mut().for_each(|w| *w /= s);
    }
}
