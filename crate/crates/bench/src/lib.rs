//! Benchmark harness for `clusterkrig-core`: synthetic functions, CSV
//! input, cross-validated sweeps, result files and model files.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod model;
pub mod results;
pub mod synth;

pub use config::RunArgs;
pub use data::{load_csv, write_csv, Standardizer};
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, DatasetSource, ExperimentConfig};
pub use model::{fit_parallel, Pipeline};
pub use results::{aggregate, emit_results, read_results, Fold, Format, ResultRow};
pub use synth::{synth_dataset, SynthFunction};
