//! Ordinary Kriging (Gaussian process regression with an unknown constant
//! trend) and the cluster Kriging family of approximations built on top of it.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation over in-memory data; file formats, CSV ingestion and the
//! benchmark harness live in the `clusterkrig-bench` crate.
//!
//! Layout:
//!
//! - [`kernel`]: stationary covariance functions.
//! - [`gp`]: single-model Ordinary Kriging (fit, likelihood, predict).
//! - [`partition`]: K-means, fuzzy C-means, Gaussian mixtures and
//!   regression-tree partitioning.
//! - [`cluster`]: per-cluster fitting and the prediction combiners.
//! - [`metrics`]: R², SMSE, MSLL and k-fold splitting.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod optim;
mod seed;

pub mod cluster;
pub mod gp;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod partition;

pub use cluster::{
    ck_fit, ck_partition, combine_membership, combine_optimal, fit_cluster, optimal_weights, CkConfig,
    ClusterKrigingModel,
    CombinedPrediction, Combiner, Flavor,
};
pub use error::{Error, Result};
pub use gp::{fit, log_marginal_likelihood, Dataset, FitConfig, KrigingModel, Nugget, Prediction};
pub use kernel::{kernel_eval, kernel_matrix, KernelKind, KernelParams};
pub use linalg::Matrix;
pub use metrics::{kfold_split, msll, msll_with, r2_score, smse, EvalReport, MsllForm};
pub use partition::{MembershipMatrix, Partitioning};
pub use seed::subseed;
