//! Run options shared by command-line flags and TOML config files.
//!
//! A config file uses the flag names as keys (`subset-size = [64, 128]`);
//! any flag given on the command line replaces the file's value.

use std::path::{Path, PathBuf};

use clusterkrig_core::gp::Nugget;
use clusterkrig_core::{FitConfig, Flavor, MsllForm};

use crate::error::{BenchError, Result};
use crate::experiment::{DatasetSource, ExperimentConfig};
use crate::results::Format;

/// Range used when the nugget ratio is optimized.
pub const OPTIMIZED_NUGGET_RANGE: (f64, f64) = (1e-10, 1.0);

#[derive(Debug, Default, Clone, PartialEq, clap::Args, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// TOML file holding any of the options below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV file with a header row. Mutually exclusive with --function.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Target column of --dataset.
    #[arg(long)]
    pub target: Option<String>,
    /// Synthetic function name (default rastrigin).
    #[arg(long)]
    pub function: Option<String>,
    /// Synthetic sample size (default 2000).
    #[arg(long)]
    pub n: Option<usize>,
    /// Synthetic input dimension (default 5).
    #[arg(long)]
    pub d: Option<usize>,
    /// Seed for drawing synthetic inputs (defaults to --seed).
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Flavors to run; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub flavor: Vec<String>,
    /// Cluster counts, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub clusters: Vec<usize>,
    /// SoD subset sizes, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub subset_size: Vec<usize>,
    /// Soft-cluster overlap factor in [1, 2].
    #[arg(long)]
    pub overlap: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `auto`, `optimize`, or a fixed nugget-to-variance ratio.
    #[arg(long)]
    pub nugget: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Result file; rows go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json (default from the --out extension).
    #[arg(long)]
    pub format: Option<String>,
    /// Random restarts of the hyper-parameter search.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Likelihood evaluations per local search.
    #[arg(long)]
    pub max_evals: Option<usize>,
    /// z-score each training fold (default true).
    #[arg(long)]
    pub standardize: Option<bool>,
    /// `standard` or `printed`.
    #[arg(long)]
    pub msll_form: Option<String>,
}

pub fn parse_nugget(s: &str) -> Result<Nugget> {
    match s.to_ascii_lowercase().as_str() {
        "auto" => Ok(Nugget::Auto),
        "optimize" | "optimized" => {
            let (min, max) = OPTIMIZED_NUGGET_RANGE;
            Ok(Nugget::Optimized { min, max })
        }
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(Nugget::Fixed(v)),
            _ => Err(BenchError::config(format!("nugget must be 'auto', 'optimize' or a ratio >= 0, got '{s}'"))),
        },
    }
}

pub fn parse_msll_form(s: &str) -> Result<MsllForm> {
    match s.to_ascii_lowercase().as_str() {
        "standard" => Ok(MsllForm::Standard),
        "printed" => Ok(MsllForm::Printed),
        _ => Err(BenchError::config(format!("msll form must be 'standard' or 'printed', got '{s}'"))),
    }
}

impl RunArgs {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        toml::from_str(&text).map_err(|e| BenchError::format(path, e))
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: RunArgs) -> RunArgs {
        fn pick<T>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        RunArgs {
            config: self.config.or(base.config),
            dataset: self.dataset.or(base.dataset),
            target: self.target.or(base.target),
            function: self.function.or(base.function),
            n: self.n.or(base.n),
            d: self.d.or(base.d),
            data_seed: self.data_seed.or(base.data_seed),
            flavor: pick(self.flavor, base.flavor),
            clusters: pick(self.clusters, base.clusters),
            subset_size: pick(self.subset_size, base.subset_size),
            overlap: self.overlap.or(base.overlap),
            folds: self.folds.or(base.folds),
            seed: self.seed.or(base.seed),
            nugget: self.nugget.or(base.nugget),
            workers: self.workers.or(base.workers),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            restarts: self.restarts.or(base.restarts),
            max_evals: self.max_evals.or(base.max_evals),
            standardize: self.standardize.or(base.standardize),
            msll_form: self.msll_form.or(base.msll_form),
        }
    }

    /// Merges in the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<RunArgs> {
        match self.config.clone() {
            Some(path) => Ok(self.over(RunArgs::from_toml_file(&path)?)),
            None => Ok(self),
        }
    }

    pub fn output_format(&self) -> Result<Format> {
        match (&self.format, &self.out) {
            (Some(f), _) => f.parse(),
            (None, Some(out)) => Ok(Format::from_path(out)),
            (None, None) => Ok(Format::Csv),
        }
    }

    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let seed = self.seed.unwrap_or(0);
        let source = match (&self.dataset, &self.function) {
            (Some(_), Some(_)) => return Err(BenchError::config("give either a dataset file or a function, not both")),
            (Some(path), None) => {
                if self.n.is_some() || self.d.is_some() {
                    return Err(BenchError::config("n and d apply to synthetic functions only"));
                }
                DatasetSource::Csv { path: path.clone(), target: self.target.clone().unwrap_or_else(|| "y".into()) }
            }
            (None, f) => DatasetSource::Synthetic {
                function: f.as_deref().unwrap_or("rastrigin").parse()?,
                n: self.n.unwrap_or(2000),
                d: self.d.unwrap_or(5),
                seed: self.data_seed.unwrap_or(seed),
            },
        };
        let mut c = ExperimentConfig::new(source);
        if !self.flavor.is_empty() {
            c.flavors = self.flavor.iter().map(|f| f.parse::<Flavor>()).collect::<std::result::Result<_, _>>()?;
        }
        if !self.clusters.is_empty() {
            c.clusters = self.clusters.clone();
        }
        if !self.subset_size.is_empty() {
            c.subset_sizes = self.subset_size.clone();
        }
        c.overlap = self.overlap.unwrap_or(c.overlap);
        c.folds = self.folds.unwrap_or(c.folds);
        c.seed = seed;
        c.workers = self.workers.unwrap_or(c.workers);
        c.standardize = self.standardize.unwrap_or(true);
        c.fit = FitConfig {
            restarts: self.restarts.unwrap_or(c.fit.restarts),
            max_evals: self.max_evals.unwrap_or(c.fit.max_evals),
            nugget: self.nugget.as_deref().map(parse_nugget).transpose()?.unwrap_or(c.fit.nugget),
            ..c.fit
        };
        if let Some(form) = &self.msll_form {
            c.msll_form = parse_msll_form(form)?;
        }
        c.validate()?;
        Ok(c)
    }
}
