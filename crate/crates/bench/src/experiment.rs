//! Cross-validated sweeps over flavors and cluster counts.

use std::path::PathBuf;
use std::time::Instant;

use clusterkrig_core::{
    kfold_split, msll_with, r2_score, smse, subseed, CkConfig, Dataset, FitConfig, Flavor, MsllForm,
};
use rayon::prelude::*;

use crate::data::load_csv;
use crate::error::{BenchError, Result};
use crate::model::Pipeline;
use crate::results::{aggregate, Fold, ResultRow};
use crate::synth::{synth_dataset, SynthFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic { function: SynthFunction, n: usize, d: usize, seed: u64 },
    Csv { path: PathBuf, target: String },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Synthetic { function, .. } => function.name().into(),
            DatasetSource::Csv { path, .. } => {
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
            }
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Synthetic { function, n, d, seed } => synth_dataset(*function, *n, *d, *seed),
            DatasetSource::Csv { path, target } => load_csv(path, target),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DatasetSource,
    pub flavors: Vec<Flavor>,
    /// Cluster counts swept by the clustered flavors.
    pub clusters: Vec<usize>,
    /// Subset sizes swept by SoD.
    pub subset_sizes: Vec<usize>,
    pub folds: usize,
    pub overlap: f64,
    /// Drives the fold split and every model fit.
    pub seed: u64,
    pub fit: FitConfig,
    /// Threads shared by concurrent cells and per-cluster fits.
    pub workers: usize,
    /// z-score inputs and target on each training fold.
    pub standardize: bool,
    pub msll_form: MsllForm,
}

impl ExperimentConfig {
    pub fn new(source: DatasetSource) -> Self {
        ExperimentConfig {
            source,
            flavors: vec![Flavor::Owck, Flavor::Owfck, Flavor::Gmmck, Flavor::Mtck, Flavor::Sod],
            clusters: vec![2, 4, 8, 16],
            subset_sizes: vec![128, 256, 512],
            folds: 5,
            overlap: 1.1,
            seed: 0,
            fit: FitConfig::default(),
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            standardize: true,
            msll_form: MsllForm::Standard,
        }
    }

    /// Sweep values for one flavor: cluster counts, subset sizes, or a
    /// single `1` for the full model.
    pub fn sweep(&self, flavor: Flavor) -> Vec<usize> {
        match flavor {
            Flavor::Sod => self.subset_sizes.clone(),
            Flavor::Full => vec![1],
            _ => self.clusters.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.flavors.is_empty() {
            return Err(BenchError::config("at least one flavor is required"));
        }
        if self.folds < 2 {
            return Err(BenchError::config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if !(1.0..=2.0).contains(&self.overlap) {
            return Err(BenchError::config(format!("overlap must lie in [1, 2], got {}", self.overlap)));
        }
        if self.workers == 0 {
            return Err(BenchError::config("workers must be at least 1"));
        }
        let check_sweep = |name: &str, values: &[usize], used: bool| {
            if !used {
                return Ok(());
            }
            if values.is_empty() {
                return Err(BenchError::config(format!("{name} sweep is empty")));
            }
            if values.contains(&0) {
                return Err(BenchError::config(format!("{name} values must be positive")));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(BenchError::config(format!("{name} values must be strictly increasing, got {values:?}")));
            }
            Ok(())
        };
        let clustered = self.flavors.iter().any(|f| !matches!(f, Flavor::Sod | Flavor::Full));
        check_sweep("cluster", &self.clusters, clustered)?;
        check_sweep("subset size", &self.subset_sizes, self.flavors.contains(&Flavor::Sod))?;
        if let DatasetSource::Synthetic { function, n, d, .. } = &self.source {
            function.check_dim(*d)?;
            self.check_rows(*n)?;
        }
        Ok(())
    }

    fn check_rows(&self, n: usize) -> Result<()> {
        if n < 10 * self.folds {
            return Err(BenchError::config(format!(
                "{n} rows are too few for {} folds (need at least {})",
                self.folds,
                10 * self.folds
            )));
        }
        Ok(())
    }

    /// Core settings for one cell.
    pub fn cell_config(&self, flavor: Flavor, sweep: usize, fold: usize) -> CkConfig {
        let mut ck = CkConfig { overlap: self.overlap, fit: self.fit.clone(), seed: subseed(self.seed, fold as u64), ..CkConfig::new(flavor, 1) };
        match flavor {
            Flavor::Sod => ck.subset_size = sweep,
            Flavor::Full => {}
            _ => ck.clusters = sweep,
        }
        ck
    }
}

/// Fits and scores one (flavor, sweep, fold) cell.
pub fn run_cell(
    config: &ExperimentConfig,
    name: &str,
    data: &Dataset,
    fold_of: &[usize],
    flavor: Flavor,
    sweep: usize,
    fold: usize,
) -> ResultRow {
    score_cell(config, name, data, fold_of, flavor, sweep, fold)
        .unwrap_or_else(|e| ResultRow::failed(name, flavor.name(), sweep, Fold::Index(fold), e.to_string()))
}

fn score_cell(
    config: &ExperimentConfig,
    name: &str,
    data: &Dataset,
    fold_of: &[usize],
    flavor: Flavor,
    sweep: usize,
    fold: usize,
) -> Result<ResultRow> {
    let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..data.n()).partition(|&i| fold_of[i] == fold);
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let ck = config.cell_config(flavor, sweep, fold);

    let t0 = Instant::now();
    let pipeline = Pipeline::fit(&train, &ck, config.standardize)?;
    let fit_time_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (mean, variance) = pipeline.predict(test.x())?;
    let predict_time_s = t1.elapsed().as_secs_f64();

    let n = train.n() as f64;
    let train_mean = train.y().iter().sum::<f64>() / n;
    let train_var = train.y().iter().map(|v| (v - train_mean) * (v - train_mean)).sum::<f64>() / n;
    // a clamped zero variance would make the log loss undefined
    let variance: Vec<f64> = variance.iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
    Ok(ResultRow {
        dataset: name.into(),
        flavor: flavor.name().into(),
        sweep,
        fold: Fold::Index(fold),
        r2: r2_score(test.y(), &mean)?,
        smse: smse(test.y(), &mean)?,
        msll: msll_with(config.msll_form, test.y(), &mean, &variance, train_mean, train_var)?,
        fit_time_s,
        predict_time_s,
        error: None,
    })
}

/// Runs every cell and returns fold rows followed by their `mean` row, per
/// flavor and sweep value in configuration order. `on_row` sees each fold
/// row as soon as it finishes, possibly from a worker thread.
pub fn run_experiment(config: &ExperimentConfig, on_row: impl Fn(&ResultRow) + Sync) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let data = config.source.load()?;
    config.check_rows(data.n())?;
    let name = config.source.name();
    let fold_of = kfold_split(data.n(), config.folds, config.seed)?;

    let cells: Vec<(Flavor, usize, usize)> = config
        .flavors
        .iter()
        .flat_map(|&f| config.sweep(f).into_iter().flat_map(move |s| (0..config.folds).map(move |k| (f, s, k))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BenchError::config(format!("cannot start {} workers: {e}", config.workers)))?;
    let rows: Vec<ResultRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(flavor, sweep, fold)| {
                let row = run_cell(config, &name, &data, &fold_of, flavor, sweep, fold);
                on_row(&row);
                row
            })
            .collect()
    });

    let means = aggregate(&rows);
    let mut out = Vec::with_capacity(rows.len() + means.len());
    for (group, mean) in rows.chunks(config.folds).zip(means) {
        out.extend_from_slice(group);
        out.push(mean);
    }
    Ok(out)
}
