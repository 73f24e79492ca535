//! Kernels on permutations and consistent estimators of marginalised kernels
//! between partial rankings.
//!
//! The crate is organised bottom-up:
//!
//! - [`perm`] and [`distance`]: permutations, group operations, the usual
//!   permutation distances, and explicit feature maps for the negative-type ones.
//! - [`partial`]: partial rankings, the set of consistent full rankings,
//!   exact enumeration, uniform and antithetic sampling, and the Kendall
//!   projection onto a top-k ranking.
//! - [`kernels`]: kernel families on permutations and Gram matrices.
//! - [`estimators`]: exact marginalised kernels, Monte Carlo and antithetic
//!   Gram estimators, the exact estimator variance, and the two-step herding check.
//! - [`sampling`]: Mallows and mixture generators, top-k censoring.
//! - [`mmd`]: unbiased MMD² and the permutation test.
//! - [`clustering`]: average linkage, tree cuts, dendrogram purity.
//! - [`dataset`] and [`io`]: text formats used by the command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod estimators;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod mmd;
pub mod partial;
pub mod perm;
pub mod rng;
pub mod sampling;
pub mod selfcheck;

pub use distance::{
    cayley_distance, hamming_distance, hamming_feature, kendall_distance, kendall_feature,
    linf_distance, lp_distance, spearman_footrule, spearman_rank_corr, Distance,
    HammingFeatureMatrix, KendallFeatureVector,
};
pub use error::{Error, Result};
pub use estimators::{
    compute_gram, draw_batch, draw_batches, estimate_gram, exact_gram, marginal_kernel_exact,
    EstimatorConfig, EstimatorKind, GramEstimate, Pairing, SampleBatch,
};
pub use kernels::{median_bandwidth, KernelFamily, KernelSpec};
pub use partial::PartialRanking;
pub use perm::Permutation;
