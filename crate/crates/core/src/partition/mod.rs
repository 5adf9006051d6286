//! Splitting a dataset into (possibly overlapping) clusters.
//!
//! Hard partitioners ([`kmeans_partition`], [`tree_partition`]) produce
//! disjoint clusters. Soft ones ([`fcm_memberships`], [`gmm_fit`]) produce a
//! membership matrix that [`overlap_assign`] turns into overlapping clusters:
//! with overlap factor `o`, each cluster receives the `round(n·o/k)` rows with
//! the highest membership. `o = 1` means no overlap, `o = 2` with `k = 2`
//! puts every row in both clusters. An overlap of "10%" is `o = 1.1`.

mod fcm;
mod gmm;
mod kmeans;
mod tree;

pub use fcm::{fcm_membership, fcm_memberships, FuzzyCMeans};
pub use gmm::{gmm_fit, gmm_membership, Covariance, CovarianceMode, GaussianMixture, GmmFit};
pub use kmeans::{kmeans, kmeans_partition, KMeans, KMeansInit};
pub use tree::{tree_partition, tree_route, Node, RegressionTree};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// The prediction-time artifact that goes with a partitioning.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Assigner {
    /// K-means centroids, one row per cluster.
    Centroids { centroids: Matrix },
    /// Fuzzy C-means centroids and fuzzifier.
    Fuzzy { centroids: Matrix, fuzzifier: f64 },
    Mixture { mixture: GaussianMixture },
    Tree { tree: RegressionTree },
    /// A single cluster (plain Kriging or subset of data).
    Single,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partitioning {
    /// Row indices per cluster, each sorted ascending.
    pub clusters: Vec<Vec<usize>>,
    pub assigner: Assigner,
}

impl Partitioning {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// Every row in `0..n` is in at least one cluster and no cluster is empty.
    pub fn covers(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.is_empty() {
                return false;
            }
            for &i in c {
                if i >= n {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// No row appears in two clusters.
    pub fn is_disjoint(&self) -> bool {
        let total: usize = self.clusters.iter().map(Vec::len).sum();
        let mut all: Vec<usize> = self.clusters.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len() == total
    }
}

/// Row-stochastic n×k matrix of membership weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    w: Matrix,
}

impl MembershipMatrix {
    /// Validates that every entry is in `[0, 1]` and every row sums to 1
    /// within `1e-8`.
    pub fn new(w: Matrix) -> Result<Self> {
        if w.cols() == 0 {
            return Err(Error::input("membership matrix needs at least one cluster"));
        }
        for (i, row) in w.row_iter().enumerate() {
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::input(format!("membership row {i} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-8 {
                return Err(Error::input(format!("membership row {i} sums to {s}")));
            }
        }
        Ok(MembershipMatrix { w })
    }

    pub(crate) fn from_trusted(w: Matrix) -> Self {
        MembershipMatrix { w }
    }

    /// One-hot memberships from hard labels.
    pub fn one_hot(labels: &[usize], k: usize) -> Result<Self> {
        let mut w = Matrix::zeros(labels.len(), k);
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::input(format!("label {l} at row {i} is not below k = {k}")));
            }
            w[(i, l)] = 1.0;
        }
        Ok(MembershipMatrix { w })
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.w.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    /// Index of the largest weight per row, lowest index on ties.
    pub fn argmax(&self) -> Vec<usize> {
        self.w.row_iter().map(argmax).collect()
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = j;
        }
    }
    best
}

/// Number of rows each soft cluster receives: `min(n, round_half_up(n·o/k))`.
pub fn overlap_cluster_size(n: usize, k: usize, overlap: f64) -> usize {
    // small slack so that e.g. 2.4999999999 from float error still rounds up
    let raw = n as f64 * overlap / k as f64;
    let rounded = (raw + 0.5 + 1e-9).floor() as usize;
    rounded.min(n)
}

/// Turns soft memberships into overlapping clusters.
///
/// Each cluster `j` takes the `overlap_cluster_size` rows with the largest
/// positive `wᵢⱼ` (ties to the lower row index). Rows left out of every
/// cluster are added to their argmax cluster.
pub fn overlap_assign(w: &MembershipMatrix, overlap: f64) -> Result<Vec<Vec<usize>>> {
    if !(1.0..=2.0).contains(&overlap) {
        return Err(Error::parameter(format!("overlap factor {overlap} must lie in [1, 2]")));
    }
    let (n, k) = (w.n(), w.k());
    let size = overlap_cluster_size(n, k, overlap);
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut covered = vec![false; n];
    for j in 0..k {
        let mut candidates: Vec<usize> = (0..n).filter(|&i| w.row(i)[j] > 0.0).collect();
        candidates.sort_by(|&a, &b| {
            w.row(b)[j]
                .partial_cmp(&w.row(a)[j])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        candidates.truncate(size);
        for &i in &candidates {
            covered[i] = true;
        }
        clusters.push(candidates);
    }
    for (i, c) in covered.iter().enumerate() {
        if !c {
            clusters[argmax(w.row(i))].push(i);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn soft(n: usize, k: usize) -> MembershipMatrix {
        let mut w = Matrix::zeros(n, k);
        for i in 0..n {
            let raw: Vec<f64> = (0..k).map(|j| 1.0 + ((i * 31 + j * 17) % 13) as f64).collect();
            let s: f64 = raw.iter().sum();
            for j in 0..k {
                w[(i, j)] = raw[j] / s;
            }
        }
        MembershipMatrix::new(w).unwrap()
    }

    #[test]
    fn size_rule() {
        assert_eq!(overlap_cluster_size(10, 2, 1.2), 6);
        assert_eq!(overlap_cluster_size(10, 2, 2.0), 10);
        assert_eq!(overlap_cluster_size(10, 4, 1.0), 3); // 2.5 rounds up
        assert_eq!(overlap_cluster_size(7, 1, 1.5), 7);
    }

    #[test]
    fn no_overlap_reproduces_hard_labels() {
        let labels = [0, 1, 1, 0, 2, 2, 1, 0, 2];
        let w = MembershipMatrix::one_hot(&labels, 3).unwrap();
        let clusters = overlap_assign(&w, 1.0).unwrap();
        assert_eq!(clusters, vec![vec![0, 3, 7], vec![1, 2, 6], vec![4, 5, 8]]);

        // unbalanced one-hot: the excess goes back to its argmax cluster
        let labels = [0, 0, 0, 0, 1, 2];
        let w = MembershipMatrix::one_hot(&labels, 3).unwrap();
        let clusters = overlap_assign(&w, 1.0).unwrap();
        assert_eq!(clusters, vec![vec![0, 1, 2, 3], vec![4], vec![5]]);
    }

    #[test]
    fn full_overlap_two_clusters() {
        let w = soft(9, 2);
        let clusters = overlap_assign(&w, 2.0).unwrap();
        assert_eq!(clusters[0], (0..9).collect::<Vec<_>>());
        assert_eq!(clusters[1], (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn exact_sizes_by_enumeration() {
        let w = soft(10, 2);
        let clusters = overlap_assign(&w, 1.2).unwrap();
        // enumerate: the top 6 rows of each column
        for j in 0..2 {
            let mut rows: Vec<usize> = (0..10).collect();
            rows.sort_by(|&a, &b| w.row(b)[j].partial_cmp(&w.row(a)[j]).unwrap().then(a.cmp(&b)));
            let mut top = rows[..6].to_vec();
            top.sort_unstable();
            let base: Vec<usize> = clusters[j].iter().copied().filter(|i| top.contains(i)).collect();
            assert_eq!(base, top);
        }
        let p = Partitioning { clusters, assigner: Assigner::Single };
        assert!(p.covers(10));
    }

    #[test]
    fn overlap_out_of_range() {
        let w = soft(4, 2);
        assert!(overlap_assign(&w, 0.9).is_err());
        assert!(overlap_assign(&w, 2.1).is_err());
    }

    #[test]
    fn membership_validation() {
        let bad = Matrix::from_rows(&[[0.5, 0.6]]).unwrap();
        assert!(MembershipMatrix::new(bad).is_err());
        let ok = Matrix::from_rows(&[[0.25, 0.75]]).unwrap();
        assert!(MembershipMatrix::new(ok).is_ok());
    }

    proptest! {
        #[test]
        fn overlap_always_covers(n in 2usize..40, k in 1usize..6, o in 1.0..=2.0f64, seed in 0u64..1000) {
            let k = k.min(n);
            let mut w = Matrix::zeros(n, k);
            for i in 0..n {
                let raw: Vec<f64> = (0..k).map(|j| 0.01 + (((i as u64 + 3) * (j as u64 + 7) * (seed + 1)) % 97) as f64).collect();
                let s: f64 = raw.iter().sum();
                for j in 0..k {
                    w[(i, j)] = raw[j] / s;
                }
            }
            let w = MembershipMatrix::new(w).unwrap();
            let clusters = overlap_assign(&w, o).unwrap();
            let p = Partitioning { clusters, assigner: Assigner::Single };
            prop_assert!(p.covers(n));
            let size = overlap_cluster_size(n, k, o);
            for c in &p.clusters {
                prop_assert!(c.len() >= size);
            }
        }
    }
}
