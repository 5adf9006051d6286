//! Ordinary Kriging on a single dataset.
//!
//! The model is `y(x) = μ + ε(x) + γ(x)` with an unknown constant trend `μ`,
//! a zero-mean Gaussian process `ε` with covariance `σ²ε R(θ)` and white
//! noise `γ` of variance `σ²γ` (the nugget). With `K = σ²ε R + σ²γ I` and
//! `c` the covariances between a query and the training points:
//!
//! ```text
//! μ̂    = 1ᵀK⁻¹y / 1ᵀK⁻¹1
//! m(x)  = μ̂ + cᵀK⁻¹(y - μ̂1)
//! s²(x) = σ²γ + σ²ε - cᵀK⁻¹c + (1 - cᵀK⁻¹1)² / 1ᵀK⁻¹1
//! ```
//!
//! Hyper-parameters are chosen by maximizing the Gaussian log marginal
//! likelihood with `μ̂` plugged in. During the search `σ²ε` is profiled out in
//! closed form, which requires the nugget to be expressed as a ratio
//! `λ = σ²γ / σ²ε`; see [`Nugget`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{gram_lower, KernelKind, KernelParams};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::optim::{self, Bounds, Settings};
use crate::seed;

/// Inputs `X` (n×d) and targets `y` (length n).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::input("dataset must have at least one row"));
        }
        if x.cols() == 0 {
            return Err(Error::input("dataset must have at least one input column"));
        }
        if x.rows() != y.len() {
            return Err(Error::shape(format!(
                "{} input rows but {} targets",
                x.rows(),
                y.len()
            )));
        }
        if let Some(i) = x.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite input at row {}, column {}",
                i / x.cols(),
                i % x.cols()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite target at row {i}")));
        }
        Ok(Dataset { x, y })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], y: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, y)
    }

    #[inline]
    pub fn x(&self) -> &Matrix {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.x.cols()
    }

    /// Rows `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn into_parts(self) -> (Matrix, Vec<f64>) {
        (self.x, self.y)
    }
}

/// How the nugget is chosen during fitting.
///
/// Values are ratios to the process variance, `λ = σ²γ / σ²ε`; the fitted
/// [`KernelParams`] store the absolute `σ²γ = λ σ̂²ε`. On standardized
/// targets (`σ̂²ε ≈ 1`) the two readings coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Nugget {
    /// Use exactly this ratio. Zero gives an exact interpolator.
    Fixed(f64),
    /// Optimize the ratio jointly with `θ` on a log scale within `[min, max]`.
    Optimized { min: f64, max: f64 },
    /// Start at [`AUTO_NUGGET_START`] and multiply by 10 whenever the
    /// factorization fails, up to [`AUTO_NUGGET_MAX`].
    Auto,
}

pub const AUTO_NUGGET_START: f64 = 1e-10;
pub const AUTO_NUGGET_MAX: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FitConfig {
    pub kernel: KernelKind,
    /// Search box for every `ln θᵢ`.
    pub log_theta_bounds: (f64, f64),
    /// Random starting points for the local search, on top of one
    /// data-driven start.
    pub restarts: usize,
    pub nugget: Nugget,
    /// Share a single `θ` across all input dimensions.
    pub isotropic: bool,
    /// Objective evaluations allowed per local search.
    pub max_evals: usize,
    /// Relative spread of the likelihood over the simplex at which a local
    /// search stops.
    pub f_tol: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            kernel: KernelKind::Gaussian,
            log_theta_bounds: (-10.0, 10.0),
            restarts: 5,
            nugget: Nugget::Auto,
            isotropic: false,
            max_evals: 400,
            f_tol: 1e-7,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.log_theta_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::parameter(format!("invalid log-theta bounds ({lo}, {hi})")));
        }
        match self.nugget {
            Nugget::Fixed(v) if !(v.is_finite() && v >= 0.0) => {
                Err(Error::parameter(format!("fixed nugget {v} must be finite and >= 0")))
            }
            Nugget::Optimized { min, max } if !(min > 0.0 && max.is_finite() && min < max) => {
                Err(Error::parameter(format!(
                    "optimized nugget range [{min}, {max}] must satisfy 0 < min < max"
                )))
            }
            _ if self.max_evals == 0 => Err(Error::parameter("max_evals must be positive")),
            _ => Ok(()),
        }
    }
}

/// Posterior mean and variance per query point.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Prediction {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// A fitted Ordinary Kriging model. Immutable; `predict` takes `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigingModel {
    data: Dataset,
    params: KernelParams,
    chol: Cholesky,
    /// K⁻¹(y - μ̂1)
    alpha: Vec<f64>,
    /// K⁻¹1
    beta: Vec<f64>,
    /// 1ᵀK⁻¹1
    one_beta: f64,
    mu_hat: f64,
    log_likelihood: f64,
}

impl KrigingModel {
    /// Conditions a model on `data` with fixed hyper-parameters; no search.
    pub fn from_params(data: Dataset, params: KernelParams) -> Result<Self> {
        params.validate()?;
        check_dims(&params, data.d())?;
        let k = gram_lower(params.kind, &params.theta, data.x(), params.sigma2_eps, params.sigma2_gamma);
        let chol = Cholesky::factor(&k).map_err(|_| Error::Conditioning {
            n: data.n(),
            theta: params.theta.clone(),
            nugget: params.sigma2_gamma,
        })?;
        let n = data.n();
        let ones = vec![1.0; n];
        let u = chol.forward(&ones);
        let w = chol.forward(data.y());
        let one_beta = dot(&u, &u);
        let mu_hat = dot(&u, &w) / one_beta;
        let mut z: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi - mu_hat * ui).collect();
        let quad = dot(&z, &z);
        let log_likelihood = -0.5 * quad - 0.5 * chol.log_det() - 0.5 * n as f64 * (2.0 * PI).ln();
        chol.backward_in_place(&mut z);
        let alpha = z;
        let mut beta = u;
        chol.backward_in_place(&mut beta);
        Ok(KrigingModel { data, params, chol, alpha, beta, one_beta, mu_hat, log_likelihood })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn d(&self) -> usize {
        self.data.d()
    }

    /// Posterior mean and variance at every row of `q`.
    pub fn predict(&self, q: &Matrix) -> Result<Prediction> {
        if q.cols() != self.d() {
            return Err(Error::shape(format!(
                "queries have {} columns but the model was trained on {}",
                q.cols(),
                self.d()
            )));
        }
        let mut mean = Vec::with_capacity(q.rows());
        let mut variance = Vec::with_capacity(q.rows());
        let mut c = vec![0.0; self.n()];
        for xq in q.row_iter() {
            let (m, v) = self.predict_into(xq, &mut c);
            mean.push(m);
            variance.push(v);
        }
        Ok(Prediction { mean, variance })
    }

    /// Single-point prediction, `(mean, variance)`.
    pub fn predict_point(&self, xq: &[f64]) -> Result<(f64, f64)> {
        if xq.len() != self.d() {
            return Err(Error::shape(format!(
                "query has dimension {} but the model was trained on {}",
                xq.len(),
                self.d()
            )));
        }
        let mut c = vec![0.0; self.n()];
        Ok(self.predict_into(xq, &mut c))
    }

    fn predict_into(&self, xq: &[f64], c: &mut [f64]) -> (f64, f64) {
        for (ci, xi) in c.iter_mut().zip(self.data.x().row_iter()) {
            *ci = self.params.cov(xq, xi);
        }
        let mean = self.mu_hat + dot(c, &self.alpha);
        let c_beta = dot(c, &self.beta);
        self.chol.forward_in_place(c);
        let c_kinv_c = dot(c, c);
        let trend = (1.0 - c_beta) * (1.0 - c_beta) / self.one_beta;
        let var = self.params.sigma2_gamma + self.params.sigma2_eps - c_kinv_c + trend;
        (mean, var.max(0.0))
    }
}

fn check_dims(params: &KernelParams, d: usize) -> Result<()> {
    if params.dim() != d {
        return Err(Error::shape(format!(
            "kernel has {} length scales but the data has {d} columns",
            params.dim()
        )));
    }
    Ok(())
}

/// Log marginal likelihood of `data` under `p`, with the trend profiled out:
///
/// `-½ (y-μ̂1)ᵀK⁻¹(y-μ̂1) - ½ log det K - (n/2) log 2π`.
pub fn log_marginal_likelihood(data: &Dataset, p: &KernelParams) -> Result<f64> {
    Ok(KrigingModel::from_params(data.clone(), p.clone())?.log_likelihood)
}

/// Result of one concentrated-likelihood evaluation.
struct Profile {
    value: f64,
    sigma2: f64,
    lambda: f64,
}

fn sigma2_floor(y: &[f64]) -> f64 {
    let ms = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
    1e-12 * ms.max(1.0)
}

/// Likelihood with `σ²ε` maximized out for fixed `θ` and nugget ratio `λ`.
fn profile(kind: KernelKind, x: &Matrix, y: &[f64], theta: &[f64], lambda: f64) -> Option<Profile> {
    let n = y.len();
    let r = gram_lower(kind, theta, x, 1.0, lambda);
    let chol = Cholesky::factor(&r).ok()?;
    let u = chol.forward(&vec![1.0; n]);
    let w = chol.forward(y);
    let uu = dot(&u, &u);
    let mu = dot(&u, &w) / uu;
    let quad: f64 = w.iter().zip(&u).map(|(wi, ui)| (wi - mu * ui) * (wi - mu * ui)).sum();
    let sigma2 = (quad / n as f64).max(sigma2_floor(y));
    let nf = n as f64;
    let value = -0.5 * nf * (sigma2.ln() + 1.0 + (2.0 * PI).ln()) - 0.5 * chol.log_det();
    value.is_finite().then_some(Profile { value, sigma2, lambda })
}

fn auto_ladder() -> impl Iterator<Item = f64> {
    let mut next = Some(AUTO_NUGGET_START);
    core::iter::from_fn(move || {
        let cur = next?;
        let up = cur * 10.0;
        next = (up <= AUTO_NUGGET_MAX * (1.0 + 1e-9)).then_some(up);
        Some(cur)
    })
}

/// The search space: `ln θ` (one or d coordinates), optionally followed by
/// `ln λ`.
struct Search<'a> {
    kind: KernelKind,
    x: &'a Matrix,
    y: &'a [f64],
    d: usize,
    isotropic: bool,
    nugget: Nugget,
}

impl Search<'_> {
    fn theta_dims(&self) -> usize {
        if self.isotropic {
            1
        } else {
            self.d
        }
    }

    fn theta(&self, z: &[f64]) -> Vec<f64> {
        if self.isotropic {
            vec![z[0].exp(); self.d]
        } else {
            z[..self.d].iter().map(|v| v.exp()).collect()
        }
    }

    fn evaluate(&self, z: &[f64]) -> Option<Profile> {
        let theta = self.theta(z);
        match self.nugget {
            Nugget::Fixed(l) => profile(self.kind, self.x, self.y, &theta, l),
            Nugget::Optimized { .. } => {
                profile(self.kind, self.x, self.y, &theta, z[self.theta_dims()].exp())
            }
            Nugget::Auto => {
                auto_ladder().find_map(|l| profile(self.kind, self.x, self.y, &theta, l))
            }
        }
    }
}

/// Fits hyper-parameters by multi-start maximization of the log marginal
/// likelihood and conditions the model on `data`.
///
/// Deterministic for a given `config.seed`.
pub fn fit(data: &Dataset, config: &FitConfig) -> Result<KrigingModel> {
    config.validate()?;
    if data.n() < 2 {
        return Err(Error::input(format!("fitting needs at least 2 points, got {}", data.n())));
    }
    let d = data.d();
    let search = Search {
        kind: config.kernel,
        x: data.x(),
        y: data.y(),
        d,
        isotropic: config.isotropic,
        nugget: config.nugget,
    };
    let (lo, hi) = config.log_theta_bounds;
    let mut bounds = Bounds { lower: vec![lo; search.theta_dims()], upper: vec![hi; search.theta_dims()] };
    if let Nugget::Optimized { min, max } = config.nugget {
        bounds.lower.push(min.ln());
        bounds.upper.push(max.ln());
    }

    let mut starts = vec![initial_guess(&search, &bounds)];
    let mut rng = seed::rng(config.seed);
    for _ in 0..config.restarts {
        starts.push(
            bounds.lower.iter().zip(&bounds.upper).map(|(l, h)| rng.random_range(*l..=*h)).collect(),
        );
    }

    let settings = Settings { max_evals: config.max_evals, f_tol: config.f_tol, initial_step: 0.1 };
    let objective = |z: &[f64]| search.evaluate(z).map_or(f64::NEG_INFINITY, |p| p.value);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let opt = optim::maximize(objective, start, &bounds, &settings);
        if opt.value.is_finite() && best.as_ref().map_or(true, |(_, v)| opt.value > *v) {
            best = Some((opt.x, opt.value));
        }
    }
    let Some((mut z, value)) = best else {
        return Err(Error::Conditioning {
            n: data.n(),
            theta: search.theta(&starts[0]),
            nugget: match config.nugget {
                Nugget::Fixed(l) => l,
                _ => AUTO_NUGGET_MAX,
            },
        });
    };
    // restart from the incumbent with a tight simplex to settle on the peak
    let polish = Settings { initial_step: 0.005, ..settings };
    let opt = optim::maximize(objective, &z, &bounds, &polish);
    if opt.value > value {
        z = opt.x;
    }

    finalize(data, &search, &z)
}

/// Builds the model at the optimum, escalating the nugget further in auto
/// mode if the scaled matrix happens to fail where the unit-scale one passed.
fn finalize(data: &Dataset, search: &Search<'_>, z: &[f64]) -> Result<KrigingModel> {
    let theta = search.theta(z);
    let prof = search.evaluate(z).ok_or_else(|| Error::Conditioning {
        n: data.n(),
        theta: theta.clone(),
        nugget: AUTO_NUGGET_MAX,
    })?;
    let mut last_err = None;
    let ladder: Vec<f64> = match search.nugget {
        Nugget::Auto => auto_ladder().filter(|l| *l >= prof.lambda).collect(),
        _ => vec![prof.lambda],
    };
    for lambda in ladder {
        let params = KernelParams {
            kind: search.kind,
            theta: theta.clone(),
            sigma2_eps: prof.sigma2,
            sigma2_gamma: lambda * prof.sigma2,
        };
        match KrigingModel::from_params(data.clone(), params) {
            Ok(m) => return Ok(m),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("nugget ladder is never empty"))
}

/// `θᵢ = 1 / (2 d varᵢ)` per input column, so that a typical pair of points
/// is correlated at roughly `e⁻¹`.
fn initial_guess(search: &Search<'_>, bounds: &Bounds) -> Vec<f64> {
    let x = search.x;
    let n = x.rows() as f64;
    let d = search.d;
    let mut log_theta: Vec<f64> = (0..d)
        .map(|j| {
            let mean = x.row_iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.row_iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
            if var > 0.0 {
                (1.0 / (2.0 * d as f64 * var)).ln()
            } else {
                0.0
            }
        })
        .collect();
    if search.isotropic {
        let avg = log_theta.iter().sum::<f64>() / d as f64;
        log_theta = vec![avg];
    }
    if let Nugget::Optimized { min, max } = search.nugget {
        log_theta.push(1e-6f64.max(min).min(max).ln());
    }
    for ((v, lo), hi) in log_theta.iter_mut().zip(&bounds.lower).zip(&bounds.upper) {
        *v = v.max(*lo).min(*hi);
    }
    log_theta
}
