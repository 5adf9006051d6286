use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;
use rand::seq::index;

use super::MembershipMatrix;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::seed;

const MAX_ITER: usize = 300;
const TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyCMeans {
    /// Memberships evaluated at `centroids`.
    pub memberships: MembershipMatrix,
    pub centroids: Matrix,
    pub fuzzifier: f64,
    /// Objective `Σᵢ Σⱼ wᵢⱼᵐ ‖xᵢ - μⱼ‖²` after every iteration.
    pub objective_history: Vec<f64>,
}

/// Memberships of every row of `points` for fixed centroids:
///
/// `wᵢⱼ = 1 / Σ_c (‖xᵢ - μⱼ‖ / ‖xᵢ - μ_c‖)^(2/(m-1))`.
///
/// A point that coincides with a centroid belongs to it entirely (shared
/// evenly if several centroids coincide).
pub fn fcm_membership(centroids: &Matrix, fuzzifier: f64, points: &Matrix) -> Result<MembershipMatrix> {
    if centroids.cols() != points.cols() {
        return Err(Error::shape(format!(
            "centroids have dimension {} but points have {}",
            centroids.cols(),
            points.cols()
        )));
    }
    if !(fuzzifier > 1.0 && fuzzifier.is_finite()) {
        return Err(Error::parameter(format!("fuzzifier {fuzzifier} must be > 1")));
    }
    let k = centroids.rows();
    let exponent = 1.0 / (fuzzifier - 1.0);
    let mut w = Matrix::zeros(points.rows(), k);
    let mut d2 = vec![0.0; k];
    for (i, x) in points.row_iter().enumerate() {
        for (dj, c) in d2.iter_mut().zip(centroids.row_iter()) {
            *dj = squared_distance(x, c);
        }
        let zeros = d2.iter().filter(|v| **v == 0.0).count();
        let row = w.row_mut(i);
        if zeros > 0 {
            for (o, dj) in row.iter_mut().zip(&d2) {
                *o = if *dj == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
            }
            continue;
        }
        for j in 0..k {
            let s: f64 = d2.iter().map(|dc| (d2[j] / dc).powf(exponent)).sum();
            row[j] = 1.0 / s;
        }
    }
    Ok(MembershipMatrix::from_trusted(w))
}

fn objective(points: &Matrix, w: &MembershipMatrix, centroids: &Matrix, m: f64) -> f64 {
    let mut total = 0.0;
    for (i, x) in points.row_iter().enumerate() {
        for (j, c) in centroids.row_iter().enumerate() {
            total += w.row(i)[j].powf(m) * squared_distance(x, c);
        }
    }
    total
}

/// Fuzzy C-means: alternate membership and weighted-centroid updates until
/// no membership moves by more than `1e-5` (or 300 iterations).
pub fn fcm_memberships(points: &Matrix, k: usize, fuzzifier: f64, seed: u64) -> Result<FuzzyCMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::parameter(format!("fuzzy C-means needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = seed::rng(seed);
    let mut centroids = points.select_rows(&index::sample(&mut rng, n, k).into_vec());
    let mut w = fcm_membership(&centroids, fuzzifier, points)?;
    let mut history = Vec::new();

    for _ in 0..MAX_ITER {
        let d = points.cols();
        let mut sums = Matrix::zeros(k, d);
        let mut norm = vec![0.0; k];
        for (i, x) in points.row_iter().enumerate() {
            for j in 0..k {
                let wm = w.row(i)[j].powf(fuzzifier);
                norm[j] += wm;
                for (s, v) in sums.row_mut(j).iter_mut().zip(x) {
                    *s += wm * v;
                }
            }
        }
        for j in 0..k {
            if norm[j] > 0.0 {
                for (c, s) in centroids.row_mut(j).iter_mut().zip(sums.row(j)) {
                    *c = s / norm[j];
                }
            }
        }
        let next = fcm_membership(&centroids, fuzzifier, points)?;
        let delta = next
            .matrix()
            .as_slice()
            .iter()
            .zip(w.matrix().as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        history.push(objective(points, &w, &centroids, fuzzifier));
        if delta < TOL {
            break;
        }
    }
    Ok(FuzzyCMeans { memberships: w, centroids, fuzzifier, objective_history: history })
}
