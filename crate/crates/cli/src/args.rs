//! Command-line arguments.
//!
//! Every option can also come from a JSON object passed with `--config`,
//! keyed by the option name in snake_case (`--degree-m` → `degree_m`).
//! Flags given on the command line take precedence over the file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "rankkernel", version, about = "Kernels between (partial) rankings")]
pub struct Cli {
    /// JSON file with default option values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the Gram matrix between the rankings of a dataset.
    Gram(GramArgs),
    /// Two-sample MMD permutation test between two datasets.
    Mmd(MmdArgs),
    /// Average-linkage clustering on kernel-induced distances.
    Cluster(ClusterArgs),
    /// Draw a synthetic dataset.
    Sample(SampleArgs),
    /// Run the exhaustive invariant suite.
    Selfcheck(SelfcheckArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelArgs {
    /// kendall, mallows, polynomial, hamming, exp-semimetric or distance-induced.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,

    /// Bandwidth ν, or `median` for the inverse median pairwise distance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<String>,

    /// Polynomial kernel degree.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_m: Option<u32>,

    /// kendall, hamming, cayley, footrule, rank-corr, linf or lp:<p>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_distance: Option<String>,

    /// Centre permutation for distance-induced kernels, e.g. `3,1,2`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,

    /// Positive multiplier applied to the kernel.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorArgs {
    /// exact, mc or antithetic.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,

    /// Completions per ranking (M).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Refuse exact enumeration beyond this many kernel evaluations per entry.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_limit: Option<u64>,

    /// Master seed; required by every stochastic step.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GramArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// rankings-text or csv-permutations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorArgs,

    /// Gram matrix CSV; provenance goes to the same path with a .json extension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,

    /// Also write the induced squared-distance matrix here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<PathBuf>,

    /// Fail with exit code 3 if the minimum eigenvalue is below -1e-9.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub check_psd: bool,

    /// Replace each diagonal entry by its exact value when enumerable.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub exact_diagonal: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MmdArgs {
    /// First sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<PathBuf>,

    /// Second sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorArgs,

    /// Number of label shuffles (at least 99).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shuffles: Option<usize>,

    /// JSON report path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub estimator: EstimatorArgs,

    /// Number of flat clusters to cut the tree into.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,

    /// per-class (default) or pooled.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<String>,

    /// Directory for dendrogram.json, clusters.csv and report.json.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleArgs {
    /// mallows, mixture (the two-centre reference mixture) or uniform.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,

    /// Number of items n.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,

    /// Mallows lengthscale θ (default 1).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,

    /// kendall or hamming, for `--model mallows`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<String>,

    /// Centre permutation for `--model mallows` (default: identity).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,

    /// Keep only the top-k items of each draw.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topk: Option<usize>,

    /// Label each draw with its mixture component (`c0`, `c1`, ...).
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub label_components: bool,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfcheckArgs {
    /// Largest degree to scan (3..=6, default 6).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,

    /// JSON report path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}
