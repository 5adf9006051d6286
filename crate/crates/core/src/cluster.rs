//! Cluster Kriging: one Ordinary Kriging model per cluster, predictions
//! combined per query.
//!
//! | flavor | partitioner | combiner |
//! |---|---|---|
//! | OWCK | K-means | optimal (inverse-variance) weights |
//! | OWFCK | fuzzy C-means + overlap | optimal weights |
//! | GMMCK | Gaussian mixture + overlap | membership mixture |
//! | MTCK | regression tree | the leaf's model only |
//! | SoD | random subset | single model |
//! | Full | all rows | single model |
//!
//! Fitting is split into [`ck_partition`], [`fit_cluster`] and
//! [`ClusterKrigingModel::from_parts`] so callers can fit clusters in
//! parallel; cluster `l` always draws its randomness from
//! `subseed(seed, l)`, which keeps results independent of scheduling.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::gp::{fit, Dataset, FitConfig, KrigingModel, Prediction};
use crate::linalg::Matrix;
use crate::partition::{
    fcm_memberships, gmm_fit, gmm_membership, kmeans_partition, overlap_assign, tree_route, Assigner,
    CovarianceMode, KMeansInit, MembershipMatrix, Partitioning,
};
use crate::seed::{self, subseed};

/// Variances at or below this count as zero in [`optimal_weights`].
pub const ZERO_VARIANCE: f64 = 1e-12;

/// Seed stream used for partitioning, kept apart from the per-cluster ones.
const PARTITION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Flavor {
    Owck,
    Owfck,
    Gmmck,
    Mtck,
    Sod,
    Full,
}

impl Flavor {
    pub const ALL: [Flavor; 6] = [Flavor::Owck, Flavor::Owfck, Flavor::Gmmck, Flavor::Mtck, Flavor::Sod, Flavor::Full];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Owck => "owck",
            Flavor::Owfck => "owfck",
            Flavor::Gmmck => "gmmck",
            Flavor::Mtck => "mtck",
            Flavor::Sod => "sod",
            Flavor::Full => "full",
        }
    }

    pub fn combiner(self) -> Combiner {
        match self {
            Flavor::Owck | Flavor::Owfck => Combiner::OptimalWeight,
            Flavor::Gmmck => Combiner::Membership,
            Flavor::Mtck | Flavor::Sod | Flavor::Full => Combiner::SingleModel,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Flavor::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::parameter(format!("unknown flavor '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    OptimalWeight,
    Membership,
    SingleModel,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CkConfig {
    pub flavor: Flavor,
    /// Number of clusters, or the maximum number of leaves for MTCK.
    pub clusters: usize,
    /// Rows in the subset for SoD; capped at `n`.
    pub subset_size: usize,
    /// Soft-cluster overlap factor in `[1, 2]`.
    pub overlap: f64,
    pub fuzzifier: f64,
    /// `None` picks full covariances up to 10 dimensions, diagonal above.
    pub covariance: Option<CovarianceMode>,
    /// `None` uses `max(2, n / (2k))`.
    pub min_leaf_size: Option<usize>,
    pub kmeans_init: KMeansInit,
    /// Hyper-parameter search settings; its `seed` is replaced per cluster.
    pub fit: FitConfig,
    pub seed: u64,
}

impl Default for CkConfig {
    fn default() -> Self {
        CkConfig {
            flavor: Flavor::Owck,
            clusters: 4,
            subset_size: 512,
            overlap: 1.1,
            fuzzifier: 2.0,
            covariance: None,
            min_leaf_size: None,
            kmeans_init: KMeansInit::RandomPoints,
            fit: FitConfig::default(),
            seed: 0,
        }
    }
}

impl CkConfig {
    pub fn new(flavor: Flavor, clusters: usize) -> Self {
        CkConfig { flavor, clusters, ..CkConfig::default() }
    }

    pub fn covariance_mode(&self, d: usize) -> CovarianceMode {
        self.covariance
            .unwrap_or(if d <= 10 { CovarianceMode::Full } else { CovarianceMode::Diagonal })
    }

    pub fn min_leaf(&self, n: usize) -> usize {
        self.min_leaf_size.unwrap_or_else(|| (n / (2 * self.clusters.max(1))).max(2))
    }

    /// Fit settings for cluster `l`.
    pub fn cluster_fit_config(&self, l: usize) -> FitConfig {
        FitConfig { seed: subseed(self.seed, l as u64), ..self.fit.clone() }
    }
}

/// Splits the training rows according to the flavor. Every cluster must end
/// up with at least two rows.
pub fn ck_partition(data: &Dataset, config: &CkConfig) -> Result<Partitioning> {
    let n = data.n();
    let pseed = subseed(config.seed, PARTITION_STREAM);
    let x = data.x();
    let p = match config.flavor {
        Flavor::Owck => kmeans_partition(x, config.clusters, config.kmeans_init, pseed)?,
        Flavor::Owfck => {
            let f = fcm_memberships(x, config.clusters, config.fuzzifier, pseed)?;
            Partitioning {
                clusters: overlap_assign(&f.memberships, config.overlap)?,
                assigner: Assigner::Fuzzy { centroids: f.centroids, fuzzifier: f.fuzzifier },
            }
        }
        Flavor::Gmmck => {
            gmm_fit(x, config.clusters, config.covariance_mode(data.d()), config.overlap, pseed)?.partitioning
        }
        Flavor::Mtck => {
            crate::partition::tree_partition(x, data.y(), config.clusters, config.min_leaf(n))?
        }
        Flavor::Sod => {
            if config.subset_size < 2 {
                return Err(Error::parameter(format!(
                    "subset size {} must be at least 2",
                    config.subset_size
                )));
            }
            let size = config.subset_size.min(n);
            let mut rows = index::sample(&mut seed::rng(pseed), n, size).into_vec();
            rows.sort_unstable();
            Partitioning { clusters: vec![rows], assigner: Assigner::Single }
        }
        Flavor::Full => Partitioning { clusters: vec![(0..n).collect()], assigner: Assigner::Single },
    };
    if let Some((l, c)) = p.clusters.iter().enumerate().find(|(_, c)| c.len() < 2) {
        return Err(Error::parameter(format!(
            "cluster {l} has {} row(s); every cluster needs at least 2",
            c.len()
        )));
    }
    Ok(p)
}

/// Fits the model of cluster `l` on exactly its rows.
pub fn fit_cluster(data: &Dataset, partitioning: &Partitioning, l: usize, config: &CkConfig) -> Result<KrigingModel> {
    let rows = partitioning
        .clusters
        .get(l)
        .ok_or_else(|| Error::parameter(format!("no cluster {l} in a {}-cluster partitioning", partitioning.k())))?;
    fit(&data.subset(rows), &config.cluster_fit_config(l))
}

/// Partitions, then fits every cluster in turn.
pub fn ck_fit(data: &Dataset, config: &CkConfig) -> Result<ClusterKrigingModel> {
    let partitioning = ck_partition(data, config)?;
    let models = (0..partitioning.k())
        .map(|l| fit_cluster(data, &partitioning, l, config))
        .collect::<Result<Vec<_>>>()?;
    ClusterKrigingModel::from_parts(config.flavor, partitioning, models)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPrediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Per-query combination weights, one row per query.
    pub weights: Matrix,
    /// Number of single-model posterior evaluations performed.
    pub model_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterKrigingModel {
    flavor: Flavor,
    partitioning: Partitioning,
    models: Vec<KrigingModel>,
}

impl ClusterKrigingModel {
    /// Assembles a model from separately fitted clusters. `models[l]` must
    /// have been trained on `partitioning.clusters[l]`.
    pub fn from_parts(flavor: Flavor, partitioning: Partitioning, models: Vec<KrigingModel>) -> Result<Self> {
        if models.len() != partitioning.k() || models.is_empty() {
            return Err(Error::shape(format!(
                "{} models for {} clusters",
                models.len(),
                partitioning.k()
            )));
        }
        for (l, (m, c)) in models.iter().zip(&partitioning.clusters).enumerate() {
            if m.n() != c.len() {
                return Err(Error::shape(format!(
                    "model {l} has {} rows but cluster {l} has {}",
                    m.n(),
                    c.len()
                )));
            }
        }
        let d = models[0].d();
        if models.iter().any(|m| m.d() != d) {
            return Err(Error::shape("cluster models disagree on dimension"));
        }
        let assigner_ok = matches!(
            (flavor, &partitioning.assigner),
            (Flavor::Owck, Assigner::Centroids { .. })
                | (Flavor::Owfck, Assigner::Fuzzy { .. })
                | (Flavor::Gmmck, Assigner::Mixture { .. })
                | (Flavor::Mtck, Assigner::Tree { .. })
                | (Flavor::Sod | Flavor::Full, Assigner::Single)
        );
        if !assigner_ok {
            return Err(Error::input(format!("partitioning does not belong to flavor {flavor}")));
        }
        if matches!(flavor, Flavor::Sod | Flavor::Full) && models.len() != 1 {
            return Err(Error::shape(format!("{flavor} uses a single model")));
        }
        Ok(ClusterKrigingModel { flavor, partitioning, models })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn partitioning(&self) -> &Partitioning {
        &self.partitioning
    }

    pub fn models(&self) -> &[KrigingModel] {
        &self.models
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn d(&self) -> usize {
        self.models[0].d()
    }

    pub fn predict(&self, q: &Matrix) -> Result<CombinedPrediction> {
        if q.cols() != self.d() {
            return Err(Error::shape(format!(
                "queries have {} columns but the model was trained on {}",
                q.cols(),
                self.d()
            )));
        }
        match (&self.partitioning.assigner, self.flavor.combiner()) {
            (Assigner::Tree { tree }, _) => {
                let leaves = tree_route(tree, q)?;
                self.predict_routed(q, &leaves)
            }
            (_, Combiner::SingleModel) => self.predict_routed(q, &vec![0; q.rows()]),
            (Assigner::Mixture { mixture }, Combiner::Membership) => {
                let w = gmm_membership(mixture, q)?;
                let preds = self.predict_all(q)?;
                combine_membership(&preds, &w)
            }
            (_, _) => {
                let preds = self.predict_all(q)?;
                let k = self.k();
                let mut w = Matrix::zeros(q.rows(), k);
                let mut var = vec![0.0; k];
                for i in 0..q.rows() {
                    for (v, p) in var.iter_mut().zip(&preds) {
                        *v = p.variance[i];
                    }
                    w.row_mut(i).copy_from_slice(&optimal_weights(&var));
                }
                combine_optimal(&preds, &w)
            }
        }
    }

    fn predict_all(&self, q: &Matrix) -> Result<Vec<Prediction>> {
        self.models.iter().map(|m| m.predict(q)).collect()
    }

    /// Asks exactly one model per query, `leaves[i]` for query `i`.
    fn predict_routed(&self, q: &Matrix, leaves: &[usize]) -> Result<CombinedPrediction> {
        let m = q.rows();
        let mut mean = vec![0.0; m];
        let mut variance = vec![0.0; m];
        let mut weights = Matrix::zeros(m, self.k());
        let mut by_leaf: Vec<Vec<usize>> = vec![Vec::new(); self.k()];
        for (i, &l) in leaves.iter().enumerate() {
            by_leaf[l].push(i);
        }
        let mut evaluations = 0;
        for (l, rows) in by_leaf.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let p = self.models[l].predict(&q.select_rows(rows))?;
            evaluations += rows.len();
            for (j, &i) in rows.iter().enumerate() {
                mean[i] = p.mean[j];
                variance[i] = p.variance[j];
                weights[(i, l)] = 1.0;
            }
        }
        Ok(CombinedPrediction { mean, variance, weights, model_evaluations: evaluations })
    }
}

/// Inverse-variance weights `wₗ = σₗ⁻² / Σ σᵢ⁻²`, which minimize
/// `Σ wₗ² σₗ²` over the simplex. When some variances are at most
/// [`ZERO_VARIANCE`] the weight is shared evenly among those.
pub fn optimal_weights(variances: &[f64]) -> Vec<f64> {
    let zeros = variances.iter().filter(|v| **v <= ZERO_VARIANCE).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return variances.iter().map(|v| if *v <= ZERO_VARIANCE { share } else { 0.0 }).collect();
    }
    let inv: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|p| p / total).collect()
}

fn check_combination(preds: &[Prediction], weights: &Matrix) -> Result<usize> {
    let k = preds.len();
    if k == 0 || weights.cols() != k {
        return Err(Error::shape(format!("{k} predictions but {} weight columns", weights.cols())));
    }
    let m = weights.rows();
    if let Some(l) = preds.iter().position(|p| p.mean.len() != m || p.variance.len() != m) {
        return Err(Error::shape(format!("prediction {l} does not have {m} queries")));
    }
    Ok(m)
}

/// Independent-model superposition: mean `Σ wₗ mₗ`, variance `Σ wₗ² σₗ²`.
pub fn combine_optimal(preds: &[Prediction], weights: &Matrix) -> Result<CombinedPrediction> {
    let m = check_combination(preds, weights)?;
    let mut mean = Vec::with_capacity(m);
    let mut variance = Vec::with_capacity(m);
    for i in 0..m {
        let w = weights.row(i);
        mean.push(preds.iter().zip(w).map(|(p, wl)| wl * p.mean[i]).sum());
        variance.push(preds.iter().zip(w).map(|(p, wl)| wl * wl * p.variance[i]).sum());
    }
    let evals = m * preds.len();
    Ok(CombinedPrediction { mean, variance, weights: weights.clone(), model_evaluations: evals })
}

/// Mixture of the per-cluster posteriors: mean `m̄ = Σ wₗ mₗ`, variance
/// `Σ wₗ (σₗ² + mₗ²) - m̄²`, evaluated as `Σ wₗ (σₗ² + (mₗ - m̄)²)` to avoid
/// cancellation.
pub fn combine_membership(preds: &[Prediction], w: &MembershipMatrix) -> Result<CombinedPrediction> {
    let weights = w.matrix();
    let m = check_combination(preds, weights)?;
    let mut mean = Vec::with_capacity(m);
    let mut variance = Vec::with_capacity(m);
    for i in 0..m {
        let wi = weights.row(i);
        let mbar: f64 = preds.iter().zip(wi).map(|(p, wl)| wl * p.mean[i]).sum();
        let v: f64 = preds
            .iter()
            .zip(wi)
            .map(|(p, wl)| {
                let dm = p.mean[i] - mbar;
                wl * (p.variance[i] + dm * dm)
            })
            .sum();
        mean.push(mbar);
        variance.push(v.max(0.0));
    }
    let evals = m * preds.len();
    Ok(CombinedPrediction { mean, variance, weights: weights.clone(), model_evaluations: evals })
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Combiner::OptimalWeight => "optimal-weight",
            Combiner::Membership => "membership",
            Combiner::SingleModel => "single-model",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Nugget;
    use proptest::prelude::*;

    fn pred(mean: &[f64], var: &[f64]) -> Prediction {
        Prediction { mean: mean.to_vec(), variance: var.to_vec() }
    }

    #[test]
    fn optimal_weight_examples() {
        assert_eq!(optimal_weights(&[2.0, 2.0, 2.0, 2.0]), vec![0.25; 4]);
        let w = optimal_weights(&[1.0, 3.0]);
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert_eq!(optimal_weights(&[0.0, 5.0]), vec![1.0, 0.0]);
        assert_eq!(optimal_weights(&[0.0, 5.0, 1e-13]), vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn combine_optimal_example() {
        let preds = [pred(&[2.0], &[1.0]), pred(&[4.0], &[1.0])];
        let w = Matrix::from_rows(&[optimal_weights(&[1.0, 1.0])]).unwrap();
        let c = combine_optimal(&preds, &w).unwrap();
        assert_eq!(c.mean, vec![3.0]);
        assert_eq!(c.variance, vec![0.5]);
    }

    #[test]
    fn combine_membership_examples() {
        let preds = [pred(&[0.0], &[1.0]), pred(&[2.0], &[1.0])];
        let w = MembershipMatrix::new(Matrix::from_rows(&[[0.5, 0.5]]).unwrap()).unwrap();
        let c = combine_membership(&preds, &w).unwrap();
        assert_eq!(c.mean, vec![1.0]);
        assert_eq!(c.variance, vec![2.0]);

        let one_hot = MembershipMatrix::one_hot(&[1], 2).unwrap();
        let c = combine_membership(&preds, &one_hot).unwrap();
        assert_eq!((c.mean[0], c.variance[0]), (2.0, 1.0));
    }

    #[test]
    fn combination_shape_errors() {
        let preds = [pred(&[0.0, 1.0], &[1.0, 1.0])];
        let w = Matrix::from_rows(&[[1.0]]).unwrap();
        assert!(matches!(combine_optimal(&preds, &w), Err(Error::Shape(_))));
    }

    #[test]
    fn flavor_names_round_trip() {
        for f in Flavor::ALL {
            assert_eq!(f.name().parse::<Flavor>().unwrap(), f);
        }
        assert!("bcm".parse::<Flavor>().is_err());
    }

    fn toy(n: usize) -> Dataset {
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = i as f64;
                [(t * 0.61).sin() * 2.0, (t * 0.37).cos() * 2.0]
            })
            .collect();
        let y = rows.iter().map(|r| (r[0]).sin() + 0.5 * r[1]).collect();
        Dataset::from_rows(&rows, y).unwrap()
    }

    fn quick(flavor: Flavor, k: usize) -> CkConfig {
        let mut c = CkConfig::new(flavor, k);
        c.fit.restarts = 1;
        c.fit.max_evals = 150;
        c.seed = 11;
        c
    }

    #[test]
    fn owck_structure() {
        let data = toy(120);
        let m = ck_fit(&data, &quick(Flavor::Owck, 4)).unwrap();
        assert_eq!(m.k(), 4);
        assert!(m.partitioning().covers(120) && m.partitioning().is_disjoint());
        for (model, rows) in m.models().iter().zip(&m.partitioning().clusters) {
            assert_eq!(model.data(), &data.subset(rows));
        }
    }

    #[test]
    fn tiny_cluster_is_rejected() {
        let data = toy(6);
        let mut c = quick(Flavor::Owck, 6);
        c.fit.nugget = Nugget::Fixed(1e-8);
        match ck_fit(&data, &c) {
            Err(Error::Parameter(msg)) => assert!(msg.contains("cluster 0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mtck_uses_one_model_per_query() {
        let data = toy(150);
        let m = ck_fit(&data, &quick(Flavor::Mtck, 3)).unwrap();
        let q = Matrix::from_rows(&[[0.1, 0.2], [1.5, -1.0], [-1.7, 1.9], [0.0, 0.0]]).unwrap();
        let c = m.predict(&q).unwrap();
        assert_eq!(c.model_evaluations, 4);
        let Assigner::Tree { tree } = &m.partitioning().assigner else { unreachable!() };
        for i in 0..4 {
            let leaf = tree.route(q.row(i));
            let (mean, var) = m.models()[leaf].predict_point(q.row(i)).unwrap();
            assert_eq!((c.mean[i], c.variance[i]), (mean, var));
            assert_eq!(c.weights.row(i).iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn sod_with_all_rows_is_full() {
        let data = toy(60);
        let mut sod = quick(Flavor::Sod, 1);
        sod.subset_size = 1000;
        let a = ck_fit(&data, &sod).unwrap();
        let b = ck_fit(&data, &quick(Flavor::Full, 1)).unwrap();
        assert_eq!(a.models(), b.models());
    }

    #[test]
    fn sod_subset_size_and_determinism() {
        let data = toy(80);
        let mut c = quick(Flavor::Sod, 1);
        c.subset_size = 25;
        let p = ck_partition(&data, &c).unwrap();
        assert_eq!(p.sizes(), vec![25]);
        assert_eq!(p, ck_partition(&data, &c).unwrap());
    }

    #[test]
    fn weights_on_simplex_for_every_flavor() {
        let data = toy(90);
        let q = Matrix::from_rows(&[[0.3, -0.4], [2.5, 2.5], [-3.0, 0.0]]).unwrap();
        for f in [Flavor::Owck, Flavor::Owfck, Flavor::Gmmck, Flavor::Mtck] {
            let m = ck_fit(&data, &quick(f, 3)).unwrap();
            let c = m.predict(&q).unwrap();
            for i in 0..3 {
                let w = c.weights.row(i);
                assert!(w.iter().all(|v| *v >= 0.0), "{f}");
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8, "{f}");
                assert!(c.variance[i] >= 0.0);
            }
        }
    }

    #[test]
    fn from_parts_checks_lengths() {
        let data = toy(40);
        let cfg = quick(Flavor::Owck, 2);
        let p = ck_partition(&data, &cfg).unwrap();
        let m0 = fit_cluster(&data, &p, 0, &cfg).unwrap();
        assert!(ClusterKrigingModel::from_parts(Flavor::Owck, p.clone(), vec![m0.clone()]).is_err());
        let m1 = fit_cluster(&data, &p, 1, &cfg).unwrap();
        assert!(ClusterKrigingModel::from_parts(Flavor::Gmmck, p.clone(), vec![m0.clone(), m1.clone()]).is_err());
        assert!(ClusterKrigingModel::from_parts(Flavor::Owck, p, vec![m0, m1]).is_ok());
    }

    proptest! {
        #[test]
        fn optimal_weights_simplex(v in prop::collection::vec(0.0..10.0f64, 1..9)) {
            let w = optimal_weights(&v);
            prop_assert!(w.iter().all(|x| *x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn membership_variance_dominates_average(
            m in prop::collection::vec(-5.0..5.0f64, 1..6),
            v in prop::collection::vec(0.0..3.0f64, 6),
            raw in prop::collection::vec(0.01..1.0f64, 6),
        ) {
            let k = m.len();
            let s: f64 = raw[..k].iter().sum();
            let w: Vec<f64> = raw[..k].iter().map(|r| r / s).collect();
            let preds: Vec<Prediction> = (0..k).map(|l| pred(&[m[l]], &[v[l]])).collect();
            let mm = MembershipMatrix::new(Matrix::from_rows(&[w.clone()]).unwrap()).unwrap();
            let c = combine_membership(&preds, &mm).unwrap();
            let avg: f64 = (0..k).map(|l| w[l] * v[l]).sum();
            prop_assert!(c.variance[0] >= avg - 1e-12);
        }
    }
}
