//! Stationary covariance functions.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Correlation family. Every cluster in a composite model shares the family;
/// only the hyper-parameters differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelKind {
    /// Squared exponential, `Π exp(-θᵢ (xᵢ - x'ᵢ)²)`.
    #[default]
    Gaussian,
}

impl KernelKind {
    /// Unit-variance correlation between two points.
    #[inline]
    pub fn correlation(self, theta: &[f64], x: &[f64], x2: &[f64]) -> f64 {
        match self {
            KernelKind::Gaussian => {
                let mut s = 0.0;
                for ((t, a), b) in theta.iter().zip(x).zip(x2) {
                    let d = a - b;
                    s += t * d * d;
                }
                (-s).exp()
            }
        }
    }
}

/// Hyper-parameters of a stationary kernel.
///
/// `theta` holds one positive weight per input dimension (inverse squared
/// length scale), `sigma2_eps` is the process variance and `sigma2_gamma` the
/// nugget (homoscedastic noise variance).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    #[cfg_attr(feature = "serde", serde(default))]
    pub kind: KernelKind,
    pub theta: Vec<f64>,
    pub sigma2_eps: f64,
    pub sigma2_gamma: f64,
}

impl KernelParams {
    pub fn new(theta: Vec<f64>, sigma2_eps: f64, sigma2_gamma: f64) -> Result<Self> {
        let p = KernelParams { kind: KernelKind::Gaussian, theta, sigma2_eps, sigma2_gamma };
        p.validate()?;
        Ok(p)
    }

    /// Same `theta` value in every one of `d` dimensions.
    pub fn isotropic(d: usize, theta: f64, sigma2_eps: f64, sigma2_gamma: f64) -> Result<Self> {
        Self::new(alloc::vec![theta; d], sigma2_eps, sigma2_gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::parameter("theta must have at least one entry"));
        }
        if let Some((i, t)) =
            self.theta.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::parameter(format!("theta[{i}] = {t} must be finite and > 0")));
        }
        if !(self.sigma2_eps.is_finite() && self.sigma2_eps > 0.0) {
            return Err(Error::parameter(format!(
                "process variance {} must be finite and > 0",
                self.sigma2_eps
            )));
        }
        if !(self.sigma2_gamma.is_finite() && self.sigma2_gamma >= 0.0) {
            return Err(Error::parameter(format!(
                "nugget {} must be finite and >= 0",
                self.sigma2_gamma
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    #[inline]
    pub(crate) fn cov(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.sigma2_eps * self.kind.correlation(&self.theta, x, x2)
    }
}

fn check_dim(p: &KernelParams, len: usize, what: &str) -> Result<()> {
    if len != p.dim() {
        return Err(Error::shape(format!(
            "{what} has dimension {len} but the kernel expects {}",
            p.dim()
        )));
    }
    Ok(())
}

/// Covariance `k(x, x')` between two points.
pub fn kernel_eval(p: &KernelParams, x: &[f64], x2: &[f64]) -> Result<f64> {
    check_dim(p, x.len(), "first point")?;
    check_dim(p, x2.len(), "second point")?;
    Ok(p.cov(x, x2))
}

/// Cross-covariance matrix between the rows of `a` and the rows of `b`.
pub fn kernel_matrix(p: &KernelParams, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_dim(p, a.cols(), "left point set")?;
    check_dim(p, b.cols(), "right point set")?;
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let ai = a.row(i);
        for (o, bj) in out.row_mut(i).iter_mut().zip(b.row_iter()) {
            *o = p.cov(ai, bj);
        }
    }
    Ok(out)
}

/// `scale * R(θ) + diag * I` over one point set. Only the lower triangle is
/// filled, which is all the Cholesky factorization reads.
pub(crate) fn gram_lower(
    kind: KernelKind,
    theta: &[f64],
    x: &Matrix,
    scale: f64,
    diag: f64,
) -> Matrix {
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = x.row(i);
        let row = k.row_mut(i);
        for (j, out) in row[..i].iter_mut().enumerate() {
            *out = scale * kind.correlation(theta, xi, x.row(j));
        }
        row[i] = scale + diag;
    }
    k
}
