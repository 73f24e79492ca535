//! Marginalised kernels between partial rankings.
//!
//! The marginalised kernel between `R` and `R′` is the average of a
//! permutation kernel over the consistent sets, `(1/|R||R′|) Σ Σ K(σ, σ′)`.
//! It is available exactly by enumeration for small sets and otherwise
//! estimated from sampled completions:
//!
//! ```text
//! K̂(R_i, R_j) = (1 / M_i M_j) Σ_l Σ_m w_l w_m K(σ_l, σ_m)
//! ```
//!
//! With antithetic batches the draws come in pairs `(σ, A_R(σ))`, and the
//! same formula expands to the four-term antithetic average. Every estimated
//! Gram matrix is the Gram matrix of empirical mean embeddings, hence PSD.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::linalg::{is_symmetric, min_eigenvalue};
use crate::partial::PartialRanking;
use crate::perm::Permutation;
use crate::rng::{derive_seed, stream, StreamRng};

/// Tolerance on the minimum eigenvalue of an estimated Gram matrix.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    Iid,
    AntitheticPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Exact,
    MonteCarlo,
    Antithetic,
}

/// Weighted completions of one partial ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub ranking: PartialRanking,
    pub draws: Vec<(Permutation, f64)>,
    pub pairing: Pairing,
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// Non-uniform proposal over the consistent set of a partial ranking.
pub trait Proposal: Sync {
    fn sample(&self, rng: &mut StreamRng) -> Permutation;
    /// `q(σ | R)`.
    fn probability(&self, sigma: &Permutation) -> f64;
}

/// Proposal given by an explicit probability table over a finite support.
#[derive(Debug, Clone)]
pub struct TabulatedProposal {
    support: Vec<Permutation>,
    probs: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl TabulatedProposal {
    /// `weights` need not be normalised but must be positive.
    pub fn new(support: Vec<Permutation>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return invalid("proposal support and weights must be non-empty and equally long");
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return invalid("proposal weights must be finite and positive");
        }
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidArgument(format!("proposal weights: {e}")))?;
        let mut sorted = support.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != support.len() {
            return invalid("proposal support has duplicates");
        }
        Ok(Self {
            support,
            probs,
            index,
        })
    }
}

impl Proposal for TabulatedProposal {
    fn sample(&self, rng: &mut StreamRng) -> Permutation {
        self.support[self.index.sample(rng)].clone()
    }

    fn probability(&self, sigma: &Permutation) -> f64 {
        self.support
            .iter()
            .position(|s| s == sigma)
            .map_or(0.0, |i| self.probs[i])
    }
}

/// Draws `m` completions of `ranking` from the stream seeded by `seed`.
///
/// With `AntitheticPairs`, `m` must be even and the batch holds `m / 2`
/// pairs `(σ, A_R(σ))`. With a proposal, weights are `p(σ|R) / q(σ|R)`
/// where `p` is uniform on `R`.
pub fn draw_batch(
    ranking: &PartialRanking,
    m: usize,
    pairing: Pairing,
    proposal: Option<&dyn Proposal>,
    seed: u64,
) -> Result<SampleBatch> {
    if m == 0 {
        return invalid("a batch needs at least one draw");
    }
    let mut rng = stream(seed, 0);
    let draws = match (pairing, proposal) {
        (Pairing::Iid, None) => (0..m)
            .map(|_| (ranking.sample_uniform(&mut rng), 1.0))
            .collect(),
        (Pairing::Iid, Some(q)) => {
            let p = 1.0 / ranking.cardinality()? as f64;
            (0..m)
                .map(|_| {
                    let s = q.sample(&mut rng);
                    if !ranking.is_consistent(&s)? {
                        return invalid(format!("proposal produced {s}, outside `{ranking}`"));
                    }
                    let w = p / q.probability(&s);
                    Ok((s, w))
                })
                .collect::<Result<Vec<_>>>()?
        }
        (Pairing::AntitheticPairs, None) => {
            if !m.is_multiple_of(2) {
                return invalid(format!("antithetic batches need an even size, got {m}"));
            }
            let mut draws = Vec::with_capacity(m);
            for _ in 0..m / 2 {
                let (a, b) = ranking.sample_antithetic_pair(&mut rng)?;
                draws.push((a, 1.0));
                draws.push((b, 1.0));
            }
            draws
        }
        (Pairing::AntitheticPairs, Some(_)) => {
            return invalid("antithetic pairs are only defined for the uniform proposal")
        }
    };
    Ok(SampleBatch {
        ranking: ranking.clone(),
        draws,
        pairing,
        seed,
    })
}

/// One batch per ranking, each from its own stream derived from `master_seed`.
pub fn draw_batches(
    rankings: &[PartialRanking],
    m: usize,
    pairing: Pairing,
    master_seed: u64,
) -> Result<Vec<SampleBatch>> {
    rankings
        .par_iter()
        .enumerate()
        .map(|(i, r)| draw_batch(r, m, pairing, None, derive_seed(master_seed, i as u64)))
        .collect()
}

/// Symmetric matrix of (estimated) marginalised kernel values with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramEstimate {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub estimator: EstimatorKind,
    pub samples_per_ranking: Vec<usize>,
    pub seed: Option<u64>,
    pub kernel: KernelSpec,
}

impl GramEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Minimum eigenvalue, or an error carrying diagnostics when it is below `−tol`.
    pub fn check_psd(&self, tol: f64) -> Result<f64> {
        let lam = min_eigenvalue(&self.matrix);
        if lam < -tol {
            let diag: Vec<String> = (0..self.dim().min(8))
                .map(|i| format!("{:.6e}", self.matrix[(i, i)]))
                .collect();
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: lam,
                dimension: self.dim(),
                diagnostics: format!(
                    "estimator={:?} kernel={} samples={:?} seed={:?} leading diagonal=[{}]",
                    self.estimator,
                    serde_json::to_string(&self.kernel).unwrap_or_default(),
                    &self.samples_per_ranking[..self.samples_per_ranking.len().min(8)],
                    self.seed,
                    diag.join(", ")
                ),
            });
        }
        Ok(lam)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GramOptions {
    /// Replace each diagonal entry by the exact `K(R_i, R_i)` when `|R_i|²` is within this limit.
    pub exact_diagonal_limit: Option<u128>,
}

/// `K̂` over the given batches. The result is checked to be PSD.
pub fn estimate_gram(spec: &KernelSpec, batches: &[SampleBatch]) -> Result<GramEstimate> {
    estimate_gram_with(spec, batches, GramOptions::default())
}

pub fn estimate_gram_with(
    spec: &KernelSpec,
    batches: &[SampleBatch],
    options: GramOptions,
) -> Result<GramEstimate> {
    spec.validate()?;
    let first = batches
        .first()
        .ok_or_else(|| Error::InvalidArgument("no batches".into()))?;
    let n = first.ranking.degree();
    for (i, b) in batches.iter().enumerate() {
        if b.draws.is_empty() {
            return invalid(format!("batch {i} is empty"));
        }
        if b.ranking.degree() != n {
            return Err(Error::DegreeMismatch {
                left: n,
                right: b.ranking.degree(),
            });
        }
        if b.pairing != first.pairing {
            return invalid("batches mix i.i.d. and antithetic pairing");
        }
    }
    if let Some(c) = &spec.center {
        if c.degree() != n {
            return Err(Error::DegreeMismatch {
                left: n,
                right: c.degree(),
            });
        }
    }
    let size = batches.len();
    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| batch_kernel(spec, &batches[i], &batches[j]))
                .collect()
        })
        .collect();
    let mut matrix = DMatrix::zeros(size, size);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    let mut substituted = false;
    if let Some(limit) = options.exact_diagonal_limit {
        for (i, b) in batches.iter().enumerate() {
            if let Ok(v) = marginal_kernel_exact(spec, &b.ranking, &b.ranking, limit) {
                matrix[(i, i)] = v;
                substituted = true;
            }
        }
    }
    let estimate = GramEstimate {
        matrix,
        estimator: match first.pairing {
            Pairing::Iid => EstimatorKind::MonteCarlo,
            Pairing::AntitheticPairs => EstimatorKind::Antithetic,
        },
        samples_per_ranking: batches.iter().map(SampleBatch::len).collect(),
        seed: None,
        kernel: spec.clone(),
    };
    // an exact diagonal is no longer a Gram of embeddings, so PSD is not promised
    if !substituted {
        estimate.check_psd(PSD_TOLERANCE)?;
    }
    Ok(estimate)
}

fn batch_kernel(spec: &KernelSpec, a: &SampleBatch, b: &SampleBatch) -> f64 {
    let mut total = 0.0;
    for (s, ws) in &a.draws {
        let mut row = 0.0;
        for (t, wt) in &b.draws {
            row += wt * spec.eval_unchecked(s, t);
        }
        total += ws * row;
    }
    total / (a.draws.len() as f64 * b.draws.len() as f64)
}

/// How a Gram matrix over partial rankings is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorConfig {
    /// Full enumeration; refuses when a pair product of cardinalities exceeds `limit`.
    Exact { limit: u128 },
    /// `samples` i.i.d. uniform completions per ranking.
    MonteCarlo { samples: usize },
    /// `samples / 2` antithetic pairs per ranking.
    Antithetic { samples: usize },
}

impl EstimatorConfig {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorConfig::Exact { .. } => EstimatorKind::Exact,
            EstimatorConfig::MonteCarlo { .. } => EstimatorKind::MonteCarlo,
            EstimatorConfig::Antithetic { .. } => EstimatorKind::Antithetic,
        }
    }
}

/// Gram matrix over `rankings` under `config`, seeded deterministically.
pub fn compute_gram(
    spec: &KernelSpec,
    rankings: &[PartialRanking],
    config: &EstimatorConfig,
    master_seed: u64,
) -> Result<GramEstimate> {
    let mut g = match *config {
        EstimatorConfig::Exact { limit } => exact_gram(spec, rankings, limit)?,
        EstimatorConfig::MonteCarlo { samples } => {
            estimate_gram(spec, &draw_batches(rankings, samples, Pairing::Iid, master_seed)?)?
        }
        EstimatorConfig::Antithetic { samples } => estimate_gram(
            spec,
            &draw_batches(rankings, samples, Pairing::AntitheticPairs, master_seed)?,
        )?,
    };
    if !matches!(config, EstimatorConfig::Exact { .. }) {
        g.seed = Some(master_seed);
    }
    Ok(g)
}

fn check_pair_limit(r: &PartialRanking, s: &PartialRanking, limit: u128) -> Result<()> {
    let product = r.cardinality_big() * s.cardinality_big();
    if product > BigUint::from(limit) {
        return Err(Error::Infeasible {
            what: format!("pair (`{r}`, `{s}`) with |R|={}, |R'|={}", r.cardinality_big(), s.cardinality_big()),
            size: product.to_string(),
            limit,
        });
    }
    Ok(())
}

/// `(1/|R||R′|) Σ_{σ∈R} Σ_{σ′∈R′} K(σ, σ′)` by enumeration.
pub fn marginal_kernel_exact(
    spec: &KernelSpec,
    r: &PartialRanking,
    r_prime: &PartialRanking,
    limit: u128,
) -> Result<f64> {
    spec.validate()?;
    if r.degree() != r_prime.degree() {
        return Err(Error::DegreeMismatch {
            left: r.degree(),
            right: r_prime.degree(),
        });
    }
    check_pair_limit(r, r_prime, limit)?;
    let a = r.enumerate(limit)?;
    let b = r_prime.enumerate(limit)?;
    if let Some(c) = &spec.center {
        spec.eval(&a[0], c)?;
    }
    Ok(mean_kernel(spec, &a, &b))
}

/// Row sums are computed in parallel and added in a fixed order, so the
/// result does not depend on the thread count.
fn mean_kernel(spec: &KernelSpec, a: &[Permutation], b: &[Permutation]) -> f64 {
    let rows: Vec<f64> = a
        .par_iter()
        .map(|s| b.iter().map(|t| spec.eval_unchecked(s, t)).sum::<f64>())
        .collect();
    rows.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

fn mean_kernel_serial(spec: &KernelSpec, a: &[Permutation], b: &[Permutation]) -> f64 {
    let total: f64 = a
        .iter()
        .map(|s| b.iter().map(|t| spec.eval_unchecked(s, t)).sum::<f64>())
        .sum();
    total / (a.len() as f64 * b.len() as f64)
}

/// Exact marginalised Gram matrix by enumeration.
pub fn exact_gram(
    spec: &KernelSpec,
    rankings: &[PartialRanking],
    limit: u128,
) -> Result<GramEstimate> {
    spec.validate()?;
    if rankings.is_empty() {
        return invalid("no rankings");
    }
    let n = rankings[0].degree();
    for r in rankings {
        if r.degree() != n {
            return Err(Error::DegreeMismatch {
                left: n,
                right: r.degree(),
            });
        }
    }
    // the largest pair product is the square of the largest set
    let largest = rankings
        .iter()
        .max_by_key(|r| r.cardinality_big())
        .unwrap();
    check_pair_limit(largest, largest, limit)?;
    let sets: Vec<Vec<Permutation>> = rankings
        .iter()
        .map(|r| r.enumerate(limit))
        .collect::<Result<_>>()?;
    if let Some(c) = &spec.center {
        spec.eval(&sets[0][0], c)?;
    }
    let size = rankings.len();
    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|i| (0..=i).map(|j| mean_kernel_serial(spec, &sets[i], &sets[j])).collect())
        .collect();
    let mut matrix = DMatrix::zeros(size, size);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(GramEstimate {
        matrix,
        estimator: EstimatorKind::Exact,
        samples_per_ranking: sets.iter().map(Vec::len).collect(),
        seed: None,
        kernel: spec.clone(),
    })
}

/// Moments of `K(σ, τ)` for `σ ~ Unif(R_i)`, `τ ~ Unif(R_j)` independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    /// `E K`.
    pub mean: f64,
    /// `E_σ (E_τ K)²`.
    pub row_second: f64,
    /// `E_τ (E_σ K)²`.
    pub col_second: f64,
    /// `E K²`.
    pub second: f64,
}

impl KernelMoments {
    /// Variance of the i.i.d. estimator with `m_i` and `m_j` draws:
    ///
    /// ```text
    /// (1/M_i) Var_σ(g) + (1/M_j) Var_τ(h) + (1/M_i M_j)(E K² − E g² − E h² + (E K)²)
    /// ```
    ///
    /// with `g(σ) = E_τ K(σ, τ)` and `h(τ) = E_σ K(σ, τ)`.
    pub fn estimator_variance(&self, m_i: usize, m_j: usize) -> f64 {
        let (mi, mj) = (m_i as f64, m_j as f64);
        let mu2 = self.mean * self.mean;
        let v = (self.row_second - mu2) / mi
            + (self.col_second - mu2) / mj
            + (self.second - self.row_second - self.col_second + mu2) / (mi * mj);
        v.max(0.0)
    }

    /// The expression that keeps only the `σ`-side conditional variance,
    /// `(1/M_i)(E g² − (E K)²) + (1/M_i M_j)(E K² − E g²)`. It misses the
    /// `τ`-side term `((M_i − 1)/(M_i M_j)) Var_τ(h)` and so equals the true
    /// variance only when `h` is constant on `R_j`.
    pub fn one_sided_variance(&self, m_i: usize, m_j: usize) -> f64 {
        let (mi, mj) = (m_i as f64, m_j as f64);
        (self.row_second - self.mean * self.mean) / mi + (self.second - self.row_second) / (mi * mj)
    }
}

/// Exact moments of `K` between uniform completions of two rankings.
pub fn kernel_moments(
    spec: &KernelSpec,
    r_i: &PartialRanking,
    r_j: &PartialRanking,
    limit: u128,
) -> Result<KernelMoments> {
    spec.validate()?;
    check_pair_limit(r_i, r_j, limit)?;
    let a = r_i.enumerate(limit)?;
    let b = r_j.enumerate(limit)?;
    if a[0].degree() != b[0].degree() {
        return Err(Error::DegreeMismatch {
            left: a[0].degree(),
            right: b[0].degree(),
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let table: Vec<Vec<f64>> = a
        .par_iter()
        .map(|s| b.iter().map(|t| spec.eval_unchecked(s, t)).collect())
        .collect();
    let mut col = vec![0.0; b.len()];
    let (mut mean, mut row_second, mut second) = (0.0, 0.0, 0.0);
    for row in &table {
        let g = row.iter().sum::<f64>() / nb;
        mean += g;
        row_second += g * g;
        for (c, &k) in col.iter_mut().zip(row) {
            *c += k;
            second += k * k;
        }
    }
    let col_second = col.iter().map(|c| (c / na) * (c / na)).sum::<f64>() / nb;
    Ok(KernelMoments {
        mean: mean / na,
        row_second: row_second / na,
        col_second,
        second: second / (na * nb),
    })
}

/// Exact variance of the off-diagonal i.i.d. estimator `K̂(R_i, R_j)` with
/// `m_i`, `m_j` uniform draws, by enumeration.
pub fn estimator_variance_exact(
    spec: &KernelSpec,
    r_i: &PartialRanking,
    r_j: &PartialRanking,
    m_i: usize,
    m_j: usize,
    limit: u128,
) -> Result<f64> {
    if m_i == 0 || m_j == 0 {
        return invalid("sample counts must be positive");
    }
    Ok(kernel_moments(spec, r_i, r_j, limit)?.estimator_variance(m_i, m_j))
}

/// `E K̂(R, R)` for `m` i.i.d. draws: `((M−1)/M) E K(σ,σ′) + (1/M) E K(σ,σ)`.
pub fn diagonal_expectation(
    spec: &KernelSpec,
    r: &PartialRanking,
    m: usize,
    limit: u128,
) -> Result<f64> {
    if m == 0 {
        return invalid("sample count must be positive");
    }
    let cross = marginal_kernel_exact(spec, r, r, limit)?;
    let members = r.enumerate(limit)?;
    let self_mean =
        members.iter().map(|s| spec.eval_unchecked(s, s)).sum::<f64>() / members.len() as f64;
    let m = m as f64;
    Ok((m - 1.0) / m * cross + self_mean / m)
}

/// Squared distances `K(R,R) + K(R′,R′) − 2K(R,R′)` induced by a Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedDistances {
    pub matrix: DMatrix<f64>,
    /// Number of off-diagonal entries (counted once per unordered pair) raised to zero.
    pub clamp_events: usize,
}

pub fn induced_sq_distance_matrix(g: &GramEstimate) -> InducedDistances {
    let k = &g.matrix;
    let n = k.nrows();
    let mut matrix = DMatrix::zeros(n, n);
    let mut clamp_events = 0;
    for i in 0..n {
        for j in 0..i {
            let mut d = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if d < 0.0 {
                d = 0.0;
                clamp_events += 1;
            }
            matrix[(i, j)] = d;
            matrix[(j, i)] = d;
        }
    }
    debug_assert!(is_symmetric(&matrix, 0.0));
    InducedDistances {
        matrix,
        clamp_events,
    }
}

fn require_kendall_exponential(spec: &KernelSpec) -> Result<()> {
    spec.validate()?;
    let ok = match spec.family {
        KernelFamily::Mallows => true,
        KernelFamily::ExpSemimetric => spec.base_distance == Some(Distance::Kendall),
        _ => false,
    };
    if !ok {
        return invalid("herding check needs a Mallows / exponential-Kendall kernel");
    }
    Ok(())
}

/// `‖μ_R − (1/N) Σ φ(σ_t)‖²` for the uniform distribution on `R`.
pub fn herding_objective(
    spec: &KernelSpec,
    samples: &[Permutation],
    r: &PartialRanking,
    limit: u128,
) -> Result<f64> {
    spec.validate()?;
    if samples.is_empty() {
        return invalid("herding objective needs at least one sample");
    }
    let members = r.enumerate(limit)?;
    Ok(HerdingState::new(spec, &members).objective(samples))
}

struct HerdingState<'a> {
    spec: &'a KernelSpec,
    members: &'a [Permutation],
    embedding_norm: f64,
    /// `μ_R(s)` for every member `s`.
    embedding: Vec<f64>,
}

impl<'a> HerdingState<'a> {
    fn new(spec: &'a KernelSpec, members: &'a [Permutation]) -> Self {
        let embedding: Vec<f64> = members
            .par_iter()
            .map(|s| mean_embedding_at(spec, members, s))
            .collect();
        let embedding_norm = embedding.iter().sum::<f64>() / members.len() as f64;
        Self {
            spec,
            members,
            embedding_norm,
            embedding,
        }
    }

    fn objective(&self, samples: &[Permutation]) -> f64 {
        let n = samples.len() as f64;
        let cross: f64 = samples
            .iter()
            .map(|s| mean_embedding_at(self.spec, self.members, s))
            .sum::<f64>()
            / n;
        let mut gram = 0.0;
        for a in samples {
            for b in samples {
                gram += self.spec.eval_unchecked(a, b);
            }
        }
        self.embedding_norm - 2.0 * cross + gram / (n * n)
    }

    /// Objective of the pair `(members[i], members[j])`.
    fn pair_objective(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.members[i], &self.members[j]);
        let k = self.spec.eval_unchecked(a, a) + 2.0 * self.spec.eval_unchecked(a, b)
            + self.spec.eval_unchecked(b, b);
        self.embedding_norm - (self.embedding[i] + self.embedding[j]) + k / 4.0
    }

    fn second_sample(&self, first: usize) -> Result<usize> {
        let values: Vec<f64> = (0..self.members.len())
            .map(|j| self.pair_objective(first, j))
            .collect();
        let (best, &best_value) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("consistent set is never empty");
        let tol = 1e-12 * best_value.abs().max(1.0);
        let ties: Vec<usize> = (0..values.len())
            .filter(|&j| values[j] - best_value <= tol)
            .collect();
        if ties.len() > 1 {
            return Err(Error::TiedObjective(format!(
                "{} minimisers after {}, e.g. {} and {}",
                ties.len(),
                self.members[first],
                self.members[ties[0]],
                self.members[ties[1]]
            )));
        }
        Ok(best)
    }
}

fn mean_embedding_at(spec: &KernelSpec, members: &[Permutation], s: &Permutation) -> f64 {
    members.iter().map(|m| spec.eval_unchecked(m, s)).sum::<f64>() / members.len() as f64
}

/// Minimiser over `σ₂ ∈ R` of the two-sample herding objective given `σ₁`.
///
/// Ties closer than `1e-12` (relative) are reported as an error.
pub fn herding_second_sample(
    spec: &KernelSpec,
    first: &Permutation,
    r: &PartialRanking,
    limit: u128,
) -> Result<Permutation> {
    require_kendall_exponential(spec)?;
    if !r.is_consistent(first)? {
        return invalid(format!("{first} is not consistent with `{r}`"));
    }
    let members = r.enumerate(limit)?;
    let state = HerdingState::new(spec, &members);
    let idx = members
        .iter()
        .position(|m| m == first)
        .expect("consistent ranking is enumerated");
    Ok(members[state.second_sample(idx)?].clone())
}

/// `(σ₁, σ₂)` for every `σ₁ ∈ R`, with `σ₂` as in [`herding_second_sample`].
pub fn herding_pairs(
    spec: &KernelSpec,
    r: &PartialRanking,
    limit: u128,
) -> Result<Vec<(Permutation, Permutation)>> {
    require_kendall_exponential(spec)?;
    let members = r.enumerate(limit)?;
    let state = HerdingState::new(spec, &members);
    (0..members.len())
        .into_par_iter()
        .map(|i| Ok((members[i].clone(), members[state.second_sample(i)?].clone())))
        .collect()
}
