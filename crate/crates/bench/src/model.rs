//! Fitting with optional standardization, and JSON model files.
//!
//! A model file stores the training rows, the partitioning and each
//! cluster's hyper-parameters. Loading refactors every covariance matrix
//! from those, so a loaded model predicts bit-for-bit like the saved one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use clusterkrig_core::{
    ck_partition, fit_cluster, CkConfig, ClusterKrigingModel, Dataset, Flavor, KernelParams, KrigingModel, Matrix,
    Partitioning,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Standardizer;
use crate::error::{BenchError, Result};

pub const MODEL_FORMAT: &str = "clusterkrig-model";
pub const MODEL_VERSION: u32 = 1;

/// Partitions, then fits the clusters on the current rayon pool.
pub fn fit_parallel(data: &Dataset, config: &CkConfig) -> Result<ClusterKrigingModel> {
    let partitioning = ck_partition(data, config)?;
    let models = (0..partitioning.k())
        .into_par_iter()
        .map(|l| fit_cluster(data, &partitioning, l, config))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ClusterKrigingModel::from_parts(config.flavor, partitioning, models)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub standardizer: Option<Standardizer>,
    pub model: ClusterKrigingModel,
    /// Training rows as the models saw them, after standardization.
    pub training: Dataset,
}

impl Pipeline {
    pub fn fit(data: &Dataset, config: &CkConfig, standardize: bool) -> Result<Self> {
        let standardizer = standardize.then(|| Standardizer::fit(data));
        let training = match &standardizer {
            Some(s) => s.transform(data)?,
            None => data.clone(),
        };
        let model = fit_parallel(&training, config)?;
        Ok(Pipeline { standardizer, model, training })
    }

    /// Mean and variance in the units of the original target.
    pub fn predict(&self, q: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        let q = match &self.standardizer {
            Some(s) => s.transform_x(q)?,
            None => q.clone(),
        };
        let c = self.model.predict(&q)?;
        let (mut mean, mut variance) = (c.mean, c.variance);
        if let Some(s) = &self.standardizer {
            s.inverse(&mut mean, &mut variance);
        }
        Ok((mean, variance))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            flavor: self.model.flavor(),
            standardizer: self.standardizer.clone(),
            x: self.training.x().clone(),
            y: self.training.y().to_vec(),
            partitioning: self.model.partitioning().clone(),
            clusters: self
                .model
                .models()
                .iter()
                .map(|m| StoredCluster { params: m.params().clone(), mu_hat: m.mu_hat() })
                .collect(),
        };
        let mut w = BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?);
        serde_json::to_writer(&mut w, &file).map_err(|e| BenchError::format(path, e))?;
        w.flush().map_err(|e| BenchError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path).map_err(|e| BenchError::io(path, e))?);
        let file: ModelFile = serde_json::from_reader(reader).map_err(|e| BenchError::format(path, e))?;
        if file.format != MODEL_FORMAT {
            return Err(BenchError::format(path, format!("not a model file (format '{}')", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(BenchError::format(
                path,
                format!("model version {} is not supported (expected {MODEL_VERSION})", file.version),
            ));
        }
        let (rows, cols) = (file.x.rows(), file.x.cols());
        let training = Dataset::new(Matrix::from_row_major(rows, cols, file.x.into_vec())?, file.y)?;
        if file.clusters.len() != file.partitioning.k() {
            return Err(BenchError::format(path, "cluster count does not match the partitioning"));
        }
        let mut models = Vec::with_capacity(file.clusters.len());
        for (l, (stored, members)) in file.clusters.into_iter().zip(&file.partitioning.clusters).enumerate() {
            if members.iter().any(|&i| i >= training.n()) {
                return Err(BenchError::format(path, format!("cluster {l} refers to rows past the training data")));
            }
            let m = KrigingModel::from_params(training.subset(members), stored.params)?;
            if m.mu_hat().to_bits() != stored.mu_hat.to_bits() {
                return Err(BenchError::format(
                    path,
                    format!("cluster {l} does not reproduce its stored trend ({} vs {})", m.mu_hat(), stored.mu_hat),
                ));
            }
            models.push(m);
        }
        let model = ClusterKrigingModel::from_parts(file.flavor, file.partitioning, models)?;
        Ok(Pipeline { standardizer: file.standardizer, model, training })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    flavor: Flavor,
    standardizer: Option<Standardizer>,
    x: Matrix,
    y: Vec<f64>,
    partitioning: Partitioning,
    clusters: Vec<StoredCluster>,
}

#[derive(Serialize, Deserialize)]
struct StoredCluster {
    params: KernelParams,
    /// Kept as a check that loading rebuilt the same model.
    mu_hat: f64,
}
