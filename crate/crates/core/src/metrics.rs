//! Regression quality measures and k-fold splitting.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Scores of one model on one test set.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub r2: f64,
    pub smse: f64,
    pub msll: f64,
    pub fit_time_s: f64,
    pub predict_time_s: f64,
}

fn check_pair(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::shape(format!(
            "{} targets but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(Error::input("at least two test points are needed"));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sum of squared deviations from the mean; errors when it is zero.
fn total_sum_of_squares(y: &[f64]) -> Result<f64> {
    let m = mean(y);
    let ss: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if ss == 0.0 {
        return Err(Error::UndefinedMetric(format!("test targets are constant ({m})")));
    }
    Ok(ss)
}

fn sum_squared_error(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Coefficient of determination `1 - SSE / SST`.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sst = total_sum_of_squares(y_true)?;
    Ok(1.0 - sum_squared_error(y_true, y_pred) / sst)
}

/// Mean squared error over the (population) variance of `y_true`, so that
/// `smse = 1 - r2` on the same data.
pub fn smse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sst = total_sum_of_squares(y_true)?;
    Ok(sum_squared_error(y_true, y_pred) / sst)
}

/// Which per-point log loss [`msll_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MsllForm {
    /// Gaussian negative log density, `½ ln(2πv) + (y - m)² / (2v)`.
    #[default]
    Standard,
    /// `½ ln(πv + (y - m)² / v)`, kept for comparison with published numbers
    /// that used this expression.
    Printed,
}

impl MsllForm {
    fn loss(self, y: f64, m: f64, v: f64) -> f64 {
        let e2 = (y - m) * (y - m);
        match self {
            MsllForm::Standard => 0.5 * (2.0 * PI * v).ln() + e2 / (2.0 * v),
            MsllForm::Printed => 0.5 * (PI * v + e2 / v).ln(),
        }
    }
}

/// Mean standardized log loss: the mean Gaussian log loss of the predictions
/// minus that of a predictor that always answers `N(train_mean, train_var)`.
/// Negative is better than trivial.
pub fn msll(y_true: &[f64], pred_mean: &[f64], pred_var: &[f64], train_mean: f64, train_var: f64) -> Result<f64> {
    msll_with(MsllForm::Standard, y_true, pred_mean, pred_var, train_mean, train_var)
}

pub fn msll_with(
    form: MsllForm,
    y_true: &[f64],
    pred_mean: &[f64],
    pred_var: &[f64],
    train_mean: f64,
    train_var: f64,
) -> Result<f64> {
    let n = y_true.len();
    if pred_mean.len() != n || pred_var.len() != n {
        return Err(Error::shape(format!(
            "{n} targets, {} means and {} variances",
            pred_mean.len(),
            pred_var.len()
        )));
    }
    if n == 0 {
        return Err(Error::input("no test points"));
    }
    if !(train_var > 0.0) {
        return Err(Error::input(format!("trivial predictor variance {train_var} must be positive")));
    }
    if let Some(i) = pred_var.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::input(format!("predictive variance {} at point {i} must be positive", pred_var[i])));
    }
    let total: f64 = (0..n)
        .map(|i| {
            form.loss(y_true[i], pred_mean[i], pred_var[i]) - form.loss(y_true[i], train_mean, train_var)
        })
        .sum();
    Ok(total / n as f64)
}

/// Fold label for each of `n` rows: a seeded shuffle cut into `folds`
/// contiguous chunks whose sizes differ by at most one.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || folds > n {
        return Err(Error::parameter(format!("need 2 <= folds <= n, got folds = {folds}, n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut fold_of = alloc::vec![0; n];
    let (base, extra) = (n / folds, n % folds);
    let mut at = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        for &i in &order[at..at + size] {
            fold_of[i] = f;
        }
        at += size;
    }
    Ok(fold_of)
}
