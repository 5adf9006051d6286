use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index;
use rand::Rng;

use super::{Assigner, Partitioning};
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::seed;

const MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KMeansInit {
    /// k distinct rows drawn uniformly.
    #[default]
    RandomPoints,
    PlusPlus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Matrix,
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares after initialization and after every
    /// Lloyd iteration.
    pub objective_history: Vec<f64>,
}

fn nearest(centroids: &Matrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.row_iter().enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn objective(points: &Matrix, centroids: &Matrix, labels: &[usize]) -> f64 {
    points.row_iter().zip(labels).map(|(x, &l)| squared_distance(x, centroids.row(l))).sum()
}

fn initial_centroids(points: &Matrix, k: usize, init: KMeansInit, seed: u64) -> Matrix {
    let n = points.rows();
    let mut rng = seed::rng(seed);
    let chosen: Vec<usize> = match init {
        KMeansInit::RandomPoints => index::sample(&mut rng, n, k).into_vec(),
        KMeansInit::PlusPlus => {
            let mut chosen = vec![rng.random_range(0..n)];
            let mut d2: Vec<f64> =
                points.row_iter().map(|x| squared_distance(x, points.row(chosen[0]))).collect();
            while chosen.len() < k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut t = rng.random_range(0.0..total);
                    let mut pick = n - 1;
                    for (i, v) in d2.iter().enumerate() {
                        if t < *v {
                            pick = i;
                            break;
                        }
                        t -= v;
                    }
                    pick
                } else {
                    // all remaining points coincide with a centroid
                    (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
                };
                chosen.push(next);
                for (i, x) in points.row_iter().enumerate() {
                    d2[i] = d2[i].min(squared_distance(x, points.row(next)));
                }
            }
            chosen
        }
    };
    points.select_rows(&chosen)
}

/// Lloyd's algorithm. Labels tie to the lowest centroid index; an empty
/// cluster takes the point farthest from its own centroid among clusters
/// that can spare one.
pub fn kmeans(points: &Matrix, k: usize, init: KMeansInit, seed: u64) -> Result<KMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::parameter(format!("k-means needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let d = points.cols();
    let mut centroids = initial_centroids(points, k, init, seed);
    let mut labels: Vec<usize> = points.row_iter().map(|x| nearest(&centroids, x).0).collect();
    let mut history = vec![objective(points, &centroids, &labels)];

    for iter in 0..MAX_ITER {
        repair_empty(points, &mut centroids, &mut labels, k);
        // update step
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (x, &l) in points.row_iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums.row_mut(l).iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            let c = counts[j] as f64;
            for (dst, s) in centroids.row_mut(j).iter_mut().zip(sums.row(j)) {
                *dst = s / c;
            }
        }
        // assignment step, keeping the current label on exact ties
        let mut changed = false;
        for (i, x) in points.row_iter().enumerate() {
            let (j, dj) = nearest(&centroids, x);
            let cur = squared_distance(x, centroids.row(labels[i]));
            if j != labels[i] && dj < cur {
                labels[i] = j;
                changed = true;
            }
        }
        history.push(objective(points, &centroids, &labels));
        if !changed && iter > 0 {
            break;
        }
    }
    repair_empty(points, &mut centroids, &mut labels, k);
    Ok(KMeans { centroids, labels, objective_history: history })
}

fn repair_empty(points: &Matrix, centroids: &mut Matrix, labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, x) in points.row_iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let dist = squared_distance(x, centroids.row(labels[i]));
            if far.map_or(true, |(_, best)| dist > best) {
                far = Some((i, dist));
            }
        }
        // k <= n guarantees some cluster holds two points
        let (i, _) = far.expect("a cluster with at least two points exists");
        labels[i] = empty;
        centroids.row_mut(empty).copy_from_slice(points.row(i));
    }
}

/// Disjoint K-means clusters over the rows of `points`.
pub fn kmeans_partition(points: &Matrix, k: usize, init: KMeansInit, seed: u64) -> Result<Partitioning> {
    let km = kmeans(points, k, init, seed)?;
    let mut clusters = vec![Vec::new(); k];
    for (i, &l) in km.labels.iter().enumerate() {
        clusters[l].push(i);
    }
    Ok(Partitioning { clusters, assigner: Assigner::Centroids { centroids: km.centroids } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Matrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..100 {
            let t = i as f64 * 0.618;
            let (cx, cy, lbl) = if i < 50 { (-10.0, 0.0, 0) } else { (10.0, 5.0, 1) };
            rows.push([cx + (t * 7.0).sin(), cy + (t * 3.0).cos()]);
            truth.push(lbl);
        }
        (Matrix::from_rows(&rows).unwrap(), truth)
    }

    #[test]
    fn single_cluster() {
        let (x, _) = blobs();
        let p = kmeans_partition(&x, 1, KMeansInit::RandomPoints, 3).unwrap();
        assert_eq!(p.clusters, vec![(0..100).collect::<Vec<_>>()]);
    }

    #[test]
    fn recovers_separated_blobs() {
        let (x, truth) = blobs();
        for init in [KMeansInit::RandomPoints, KMeansInit::PlusPlus] {
            let km = kmeans(&x, 2, init, 1).unwrap();
            // oracle: each point is nearer its own blob mean than the other
            let mean = |l: usize| {
                let idx: Vec<usize> = (0..100).filter(|&i| truth[i] == l).collect();
                let sel = x.select_rows(&idx);
                [
                    sel.row_iter().map(|r| r[0]).sum::<f64>() / 50.0,
                    sel.row_iter().map(|r| r[1]).sum::<f64>() / 50.0,
                ]
            };
            let (m0, m1) = (mean(0), mean(1));
            for i in 0..100 {
                let own = if truth[i] == 0 { m0 } else { m1 };
                let other = if truth[i] == 0 { m1 } else { m0 };
                assert!(squared_distance(x.row(i), &own) < squared_distance(x.row(i), &other));
            }
            let first = km.labels[0];
            for i in 0..100 {
                assert_eq!(km.labels[i] == first, truth[i] == 0);
            }
        }
    }

    #[test]
    fn k_equals_n_is_exact() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]]).unwrap();
        let km = kmeans(&x, 4, KMeansInit::RandomPoints, 9).unwrap();
        assert_eq!(*km.objective_history.last().unwrap(), 0.0);
        let mut l = km.labels.clone();
        l.sort_unstable();
        assert_eq!(l, vec![0, 1, 2, 3]);
    }

    #[test]
    fn duplicate_points_still_fill_clusters() {
        let x = Matrix::from_rows(&[[1.0], [1.0], [1.0], [2.0]]).unwrap();
        let p = kmeans_partition(&x, 3, KMeansInit::RandomPoints, 0).unwrap();
        assert!(p.covers(4));
        assert!(p.is_disjoint());
    }

    #[test]
    fn k_larger_than_n() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(kmeans(&x, 3, KMeansInit::RandomPoints, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn objective_non_increasing_and_deterministic() {
        let rows: Vec<[f64; 3]> = (0..200)
            .map(|i| {
                let t = i as f64;
                [(t * 0.37).sin() * 4.0, (t * 1.3).cos() * 2.0, (t * 0.11).sin()]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let a = kmeans(&x, 6, KMeansInit::PlusPlus, 5).unwrap();
        for w in a.objective_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", a.objective_history);
        }
        let b = kmeans(&x, 6, KMeansInit::PlusPlus, 5).unwrap();
        assert_eq!(a, b);
    }
}
