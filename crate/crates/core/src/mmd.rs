//! Unbiased MMD² between two samples of partial rankings and a permutation test.
//!
//! The pooled Gram matrix is computed once. Each shuffle relabels which
//! rows belong to which sample and re-reads the same matrix, so the test is
//! exact for the (estimated) kernel on the pooled set.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::{compute_gram, EstimatorConfig, EstimatorKind, GramEstimate};
use crate::kernels::KernelSpec;
use crate::partial::PartialRanking;
use crate::rng::{derive_seed, stream};

/// Smallest accepted number of shuffles.
pub const MIN_SHUFFLES: usize = 99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MMDReport {
    pub statistic: f64,
    pub p_value: f64,
    pub num_shuffles: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub sample_sizes: (usize, usize),
}

/// MMD² with the first `m` rows as one sample and the next `n` as the other.
pub fn mmd2_unbiased(gram: &DMatrix<f64>, m: usize, n: usize) -> Result<f64> {
    if m < 2 || n < 2 {
        return invalid(format!("both samples need at least 2 points, got ({m}, {n})"));
    }
    if gram.nrows() != m + n || gram.ncols() != m + n {
        return invalid(format!(
            "Gram matrix is {}x{}, expected {}",
            gram.nrows(),
            gram.ncols(),
            m + n
        ));
    }
    let labels: Vec<bool> = (0..m + n).map(|i| i < m).collect();
    Ok(mmd2_labelled(gram, &labels, m, n))
}

/// `labels[i]` marks row `i` as belonging to the first sample.
fn mmd2_labelled(gram: &DMatrix<f64>, labels: &[bool], m: usize, n: usize) -> f64 {
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    let size = labels.len();
    for i in 0..size {
        for j in 0..i {
            let k = gram[(i, j)];
            match (labels[i], labels[j]) {
                (true, true) => xx += k,
                (false, false) => yy += k,
                _ => xy += k,
            }
        }
    }
    let (m, n) = (m as f64, n as f64);
    2.0 * xx / (m * (m - 1.0)) + 2.0 * yy / (n * (n - 1.0)) - 2.0 * xy / (m * n)
}

/// Permutation test on a precomputed pooled Gram matrix.
pub fn permutation_test_gram(
    gram: &GramEstimate,
    split: (usize, usize),
    num_shuffles: usize,
    seed: u64,
) -> Result<MMDReport> {
    if num_shuffles < MIN_SHUFFLES {
        return invalid(format!("need at least {MIN_SHUFFLES} shuffles, got {num_shuffles}"));
    }
    let (m, n) = split;
    let observed = mmd2_unbiased(&gram.matrix, m, n)?;
    // label assignments drawn sequentially so the result is scheduling-independent
    let mut rng = stream(derive_seed(seed, 1), 0);
    let mut base: Vec<bool> = (0..m + n).map(|i| i < m).collect();
    let shuffles: Vec<Vec<bool>> = (0..num_shuffles)
        .map(|_| {
            base.shuffle(&mut rng);
            base.clone()
        })
        .collect();
    let tol = 1e-12 * observed.abs().max(1e-300);
    let exceed = shuffles
        .par_iter()
        .filter(|labels| mmd2_labelled(&gram.matrix, labels, m, n) >= observed - tol)
        .count();
    Ok(MMDReport {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (num_shuffles + 1) as f64,
        num_shuffles,
        seed,
        estimator: gram.estimator,
        sample_sizes: split,
    })
}

/// Estimates the pooled Gram of `pooled` (first `m`, then `n` rankings) and
/// runs the permutation test on it.
pub fn permutation_test(
    pooled: &[PartialRanking],
    split: (usize, usize),
    spec: &KernelSpec,
    config: &EstimatorConfig,
    num_shuffles: usize,
    seed: u64,
) -> Result<MMDReport> {
    if pooled.len() != split.0 + split.1 {
        return invalid(format!(
            "{} rankings do not match split ({}, {})",
            pooled.len(),
            split.0,
            split.1
        ));
    }
    if num_shuffles < MIN_SHUFFLES {
        return invalid(format!("need at least {MIN_SHUFFLES} shuffles, got {num_shuffles}"));
    }
    let gram = compute_gram(spec, pooled, config, derive_seed(seed, 0))?;
    permutation_test_gram(&gram, split, num_shuffles, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::rng::stream;

    fn naive(g: &DMatrix<f64>, x: &[usize], y: &[usize]) -> f64 {
        let mut s = 0.0;
        let (m, n) = (x.len() as f64, y.len() as f64);
        for &i in x {
            for &j in x {
                if i != j {
                    s += g[(i, j)] / (m * (m - 1.0));
                }
            }
        }
        for &i in y {
            for &j in y {
                if i != j {
                    s += g[(i, j)] / (n * (n - 1.0));
                }
            }
        }
        for &i in x {
            for &j in y {
                s -= 2.0 * g[(i, j)] / (m * n);
            }
        }
        s
    }

    fn random_gram(size: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream(seed, 0);
        let perms: Vec<_> = (0..size).map(|_| Permutation::random(5, &mut rng)).collect();
        KernelSpec::mallows(0.3).gram(&perms).unwrap()
    }

    #[test]
    fn matches_naive_sums_under_relabelling() {
        let g = random_gram(9, 1);
        assert!((mmd2_unbiased(&g, 4, 5).unwrap() - naive(&g, &[0, 1, 2, 3], &[4, 5, 6, 7, 8])).abs() < 1e-14);
        let labels = [true, false, false, true, true, false, true, false, false];
        let x: Vec<usize> = (0..9).filter(|&i| labels[i]).collect();
        let y: Vec<usize> = (0..9).filter(|&i| !labels[i]).collect();
        assert!((mmd2_labelled(&g, &labels, 4, 5) - naive(&g, &x, &y)).abs() < 1e-14);
    }

    #[test]
    fn identical_samples() {
        // a repeated ranking on both sides cancels exactly
        let r = PartialRanking::top_k(6, &[3, 1, 4]).unwrap();
        let exact = EstimatorConfig::Exact { limit: 1_000_000 };
        let g = compute_gram(&KernelSpec::mallows(1.0), &vec![r; 6], &exact, 0).unwrap();
        assert!(mmd2_unbiased(&g.matrix, 3, 3).unwrap().abs() < 1e-12);

        // for X = Y in general the unbiased form leaves
        // (2/m²)·(Σ_{i≠j} K / (m − 1) − Σ_i K(x_i, x_i))
        let mut rng = stream(3, 0);
        let perms: Vec<_> = (0..5).map(|_| Permutation::random(5, &mut rng)).collect();
        let doubled: Vec<_> = perms.iter().chain(&perms).cloned().collect();
        let g = KernelSpec::kendall().gram(&doubled).unwrap();
        let inner = KernelSpec::kendall().gram(&perms).unwrap();
        let off = inner.sum() - inner.trace();
        let want = 2.0 / 25.0 * (off / 4.0 - inner.trace());
        assert!((mmd2_unbiased(&g, 5, 5).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn can_be_negative() {
        let found = (0..50).any(|s| mmd2_unbiased(&random_gram(10, s), 5, 5).unwrap() < 0.0);
        assert!(found);
    }

    #[test]
    fn argument_checks() {
        let g = random_gram(5, 0);
        assert!(mmd2_unbiased(&g, 1, 4).is_err());
        assert!(mmd2_unbiased(&g, 2, 2).is_err());
        let est = GramEstimate {
            matrix: g,
            estimator: EstimatorKind::Exact,
            samples_per_ranking: vec![1; 5],
            seed: None,
            kernel: KernelSpec::mallows(0.3),
        };
        assert!(permutation_test_gram(&est, (2, 3), 98, 0).is_err());
        let r = permutation_test_gram(&est, (2, 3), 99, 0).unwrap();
        assert!(r.p_value >= 0.01 && r.p_value <= 1.0);
        assert_eq!(r, permutation_test_gram(&est, (2, 3), 99, 0).unwrap());
    }
}
