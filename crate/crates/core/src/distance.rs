//! Distances between permutations and explicit feature maps for the
//! negative-type ones.
//!
//! Kendall's distance counts item pairs ranked in opposite order by the two
//! permutations. With the position → item convention this is the inversion
//! count of `τ⁻¹ ∘ σ`, and it is invariant under relabelling the items
//! (`d(η∘σ, η∘τ) = d(σ, τ)`). The vector distances (footrule, rank
//! correlation, `l_p`, `l_∞`) compare the mapping arrays entrywise.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::perm::{check_degrees, Permutation};

/// Number of discordant item pairs, `O(n log n)` by merge-sort inversion counting.
pub fn kendall_distance(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(kendall_unchecked(sigma, tau))
}

pub(crate) fn kendall_unchecked(sigma: &Permutation, tau: &Permutation) -> u64 {
    let tau_ranks = tau.ranks();
    let mut seq: Vec<usize> = sigma.as_slice().iter().map(|&x| tau_ranks[x - 1]).collect();
    count_inversions(&mut seq)
}

/// Sorts `v` and returns its number of inversions.
pub fn count_inversions(v: &mut [usize]) -> u64 {
    let mut buf = v.to_vec();
    sort_count(v, &mut buf)
}

fn sort_count(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    if n <= 16 {
        // insertion sort; each shift is one inversion
        let mut inv = 0;
        for i in 1..n {
            let x = v[i];
            let mut j = i;
            while j > 0 && v[j - 1] > x {
                v[j] = v[j - 1];
                j -= 1;
                inv += 1;
            }
            v[j] = x;
        }
        return inv;
    }
    let mid = n / 2;
    let (lo_buf, hi_buf) = buf.split_at_mut(mid);
    let mut inv = {
        let (lo, hi) = v.split_at_mut(mid);
        sort_count(lo, lo_buf) + sort_count(hi, hi_buf)
    };
    buf[..n].copy_from_slice(v);
    let (lo, hi) = buf[..n].split_at(mid);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < lo.len() && j < hi.len() {
        if hi[j] < lo[i] {
            v[k] = hi[j];
            j += 1;
            inv += (lo.len() - i) as u64;
        } else {
            v[k] = lo[i];
            i += 1;
        }
        k += 1;
    }
    v[k..k + lo.len() - i].copy_from_slice(&lo[i..]);
    k += lo.len() - i;
    v[k..].copy_from_slice(&hi[j..]);
    inv
}

/// Number of positions holding different items.
pub fn hamming_distance(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(hamming_unchecked(sigma, tau))
}

fn hamming_unchecked(sigma: &Permutation, tau: &Permutation) -> u64 {
    sigma
        .as_slice()
        .iter()
        .zip(tau.as_slice())
        .filter(|(a, b)| a != b)
        .count() as u64
}

/// Minimum number of transpositions, `n − cycles(σ ∘ τ⁻¹)`.
pub fn cayley_distance(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(cayley_unchecked(sigma, tau))
}

fn cayley_unchecked(sigma: &Permutation, tau: &Permutation) -> u64 {
    let rel = sigma.compose(&tau.inverse()).expect("degrees checked");
    (sigma.degree() - rel.cycle_count()) as u64
}

fn abs_diffs<'a>(sigma: &'a Permutation, tau: &'a Permutation) -> impl Iterator<Item = u64> + 'a {
    sigma
        .as_slice()
        .iter()
        .zip(tau.as_slice())
        .map(|(&a, &b)| a.abs_diff(b) as u64)
}

/// `‖σ − τ‖₁`.
pub fn spearman_footrule(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(abs_diffs(sigma, tau).sum())
}

/// `‖σ − τ‖₂²`; always an integer.
pub fn spearman_rank_corr(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(abs_diffs(sigma, tau).map(|d| d * d).sum())
}

/// `‖σ − τ‖_p` for real `p ≥ 1`, evaluated in IEEE double precision.
pub fn lp_distance(sigma: &Permutation, tau: &Permutation, p: f64) -> Result<f64> {
    check_degrees(sigma, tau)?;
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("l_p distance needs finite p >= 1, got {p}"));
    }
    let s: f64 = abs_diffs(sigma, tau).map(|d| (d as f64).powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `‖σ − τ‖_∞`.
pub fn linf_distance(sigma: &Permutation, tau: &Permutation) -> Result<u64> {
    check_degrees(sigma, tau)?;
    Ok(abs_diffs(sigma, tau).max().unwrap_or(0))
}

/// Choice of permutation distance, used by kernels and samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Kendall,
    Hamming,
    Cayley,
    SpearmanFootrule,
    SpearmanRankCorr,
    Lp(f64),
    Linf,
}

impl Distance {
    pub fn eval(&self, sigma: &Permutation, tau: &Permutation) -> Result<f64> {
        check_degrees(sigma, tau)?;
        if let Distance::Lp(p) = *self {
            return lp_distance(sigma, tau, p);
        }
        Ok(self.eval_unchecked(sigma, tau))
    }

    /// Caller guarantees equal degrees and a valid `p`.
    pub(crate) fn eval_unchecked(&self, sigma: &Permutation, tau: &Permutation) -> f64 {
        match *self {
            Distance::Kendall => kendall_unchecked(sigma, tau) as f64,
            Distance::Hamming => hamming_unchecked(sigma, tau) as f64,
            Distance::Cayley => cayley_unchecked(sigma, tau) as f64,
            Distance::SpearmanFootrule => abs_diffs(sigma, tau).sum::<u64>() as f64,
            Distance::SpearmanRankCorr => abs_diffs(sigma, tau).map(|d| d * d).sum::<u64>() as f64,
            Distance::Lp(p) => {
                let s: f64 = abs_diffs(sigma, tau).map(|d| (d as f64).powf(p)).sum();
                s.powf(1.0 / p)
            }
            Distance::Linf => abs_diffs(sigma, tau).max().unwrap_or(0) as f64,
        }
    }

    /// Whether the distance is known to be of negative type, which makes
    /// `exp(-ν d)` and the distance-induced kernel positive definite.
    pub fn is_negative_type(&self) -> bool {
        matches!(
            self,
            Distance::Kendall | Distance::Hamming | Distance::SpearmanRankCorr
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Distance::Lp(p) if !(p >= 1.0) || !p.is_finite() => {
                invalid(format!("l_p distance needs finite p >= 1, got {p}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Distance::Kendall => "kendall".into(),
            Distance::Hamming => "hamming".into(),
            Distance::Cayley => "cayley".into(),
            Distance::SpearmanFootrule => "spearman_footrule".into(),
            Distance::SpearmanRankCorr => "spearman_rank_corr".into(),
            Distance::Lp(p) => format!("lp({p})"),
            Distance::Linf => "linf".into(),
        }
    }
}

/// Permutation matrix `Φ(σ)` with `Φ[ℓ][i] = 1` iff `σ(i) = ℓ` (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingFeatureMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl HammingFeatureMatrix {
    pub fn degree(&self) -> usize {
        self.n
    }

    /// Entry at 1-based row `item` and column `position`.
    pub fn get(&self, item: usize, position: usize) -> u8 {
        self.entries[(item - 1) * self.n + (position - 1)]
    }

    /// `Trace[Φ(σ) Φ(τ)ᵀ]`, the Frobenius inner product.
    pub fn trace_product(&self, other: &Self) -> u64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a * b) as u64)
            .sum()
    }

    /// `½ Trace[(Φ(σ) − Φ(τ))(Φ(σ) − Φ(τ))ᵀ]`.
    pub fn half_sq_frobenius_distance(&self, other: &Self) -> f64 {
        let s: i64 = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| {
                let d = a as i64 - b as i64;
                d * d
            })
            .sum();
        s as f64 / 2.0
    }
}

pub fn hamming_feature(sigma: &Permutation) -> HammingFeatureMatrix {
    let n = sigma.degree();
    let mut entries = vec![0u8; n * n];
    for (pos, &item) in sigma.as_slice().iter().enumerate() {
        entries[(item - 1) * n + pos] = 1;
    }
    HammingFeatureMatrix { n, entries }
}

/// Unit vector over item pairs `a < b` whose inner products give the Kendall kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallFeatureVector {
    entries: Vec<f64>,
}

impl KendallFeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum()
    }
}

/// Entry for item pair `(a, b)`, `a < b`, is `±1/√C(n,2)`: positive when `b`
/// is ranked ahead of `a`.
pub fn kendall_feature(sigma: &Permutation) -> Result<KendallFeatureVector> {
    let n = sigma.degree();
    if n < 2 {
        return invalid("Kendall feature map needs degree >= 2");
    }
    let ranks = sigma.ranks();
    let norm = 1.0 / (binomial2(n) as f64).sqrt();
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            entries.push(if ranks[a] > ranks[b] { norm } else { -norm });
        }
    }
    Ok(KendallFeatureVector { entries })
}

/// `C(n, 2)`.
#[inline]
pub fn binomial2(n: usize) -> u64 {
    (n as u64) * (n.saturating_sub(1) as u64) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, VecDeque};

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    /// O(n²) count of item pairs ordered differently.
    fn kendall_pairs(s: &Permutation, t: &Permutation) -> u64 {
        let (rs, rt) = (s.ranks(), t.ranks());
        let n = s.degree();
        let mut c = 0;
        for a in 0..n {
            for b in a + 1..n {
                if (rs[a] < rs[b]) != (rt[a] < rt[b]) {
                    c += 1;
                }
            }
        }
        c
    }

    /// Minimum transposition count from the identity by BFS over S_n.
    fn transposition_bfs(n: usize) -> HashMap<Vec<usize>, u64> {
        let start: Vec<usize> = (1..=n).collect();
        let mut dist = HashMap::from([(start.clone(), 0u64)]);
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            let d = dist[&cur];
            for i in 0..n {
                for j in i + 1..n {
                    let mut nxt = cur.clone();
                    nxt.swap(i, j);
                    if !dist.contains_key(&nxt) {
                        dist.insert(nxt.clone(), d + 1);
                        queue.push_back(nxt);
                    }
                }
            }
        }
        dist
    }

    fn example1() -> [Permutation; 3] {
        [p(&[3, 2, 1]), p(&[2, 3, 1]), p(&[2, 1, 3])]
    }

    #[test]
    fn kendall_example_one() {
        let [a, b, c] = example1();
        assert_eq!(kendall_distance(&a, &b).unwrap(), 1);
        assert_eq!(kendall_distance(&a, &c).unwrap(), 2);
        assert_eq!(kendall_distance(&b, &c).unwrap(), 1);
    }

    #[test]
    fn kendall_extremes() {
        for n in 1..12 {
            let e = Permutation::identity(n);
            assert_eq!(kendall_distance(&e, &e).unwrap(), 0);
            assert_eq!(
                kendall_distance(&e, &Permutation::reverse_identity(n)).unwrap(),
                binomial2(n)
            );
        }
    }

    #[test]
    fn kendall_matches_pair_count_exhaustively() {
        for n in 1..=6 {
            let all = all_permutations(n);
            for s in &all {
                for t in &all {
                    assert_eq!(kendall_distance(s, t).unwrap(), kendall_pairs(s, t));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let n = rng.random_range(7..=8);
            let (s, t) = (Permutation::random(n, &mut rng), Permutation::random(n, &mut rng));
            assert_eq!(kendall_distance(&s, &t).unwrap(), kendall_pairs(&s, &t));
        }
    }

    #[test]
    fn kendall_large_n_merge_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [17, 33, 100, 257] {
            let (s, t) = (Permutation::random(n, &mut rng), Permutation::random(n, &mut rng));
            assert_eq!(kendall_distance(&s, &t).unwrap(), kendall_pairs(&s, &t));
        }
    }

    #[test]
    fn degree_mismatch_errors() {
        let (a, b) = (Permutation::identity(3), Permutation::identity(4));
        assert!(kendall_distance(&a, &b).is_err());
        assert!(hamming_distance(&a, &b).is_err());
        assert!(cayley_distance(&a, &b).is_err());
        assert!(spearman_footrule(&a, &b).is_err());
        assert!(spearman_rank_corr(&a, &b).is_err());
        assert!(lp_distance(&a, &b, 2.0).is_err());
        assert!(linf_distance(&a, &b).is_err());
    }

    #[test]
    fn lp_rejects_small_p() {
        let e = Permutation::identity(3);
        assert!(lp_distance(&e, &e, 0.5).is_err());
        assert!(lp_distance(&e, &e, f64::NAN).is_err());
        assert!(Distance::Lp(0.9).validate().is_err());
    }

    #[test]
    fn hamming_examples() {
        let e = Permutation::identity(3);
        assert_eq!(hamming_distance(&e, &e).unwrap(), 0);
        assert_eq!(hamming_distance(&e, &p(&[1, 3, 2])).unwrap(), 2);
    }

    #[test]
    fn hamming_is_never_one() {
        for s in all_permutations(5) {
            for t in all_permutations(5) {
                assert_ne!(hamming_distance(&s, &t).unwrap(), 1);
            }
        }
    }

    #[test]
    fn cayley_examples() {
        let e = Permutation::identity(3);
        assert_eq!(cayley_distance(&e, &e).unwrap(), 0);
        assert_eq!(cayley_distance(&e, &p(&[2, 1, 3])).unwrap(), 1);
        assert_eq!(cayley_distance(&e, &p(&[2, 3, 1])).unwrap(), 2);
    }

    #[test]
    fn cayley_matches_transposition_bfs() {
        for n in 1..=5 {
            let bfs = transposition_bfs(n);
            let all = all_permutations(n);
            for s in &all {
                for t in &all {
                    // σ = (σ∘τ⁻¹)∘τ, so d(σ,τ) = transpositions needed for σ∘τ⁻¹
                    let rel = s.compose(&t.inverse()).unwrap();
                    assert_eq!(cayley_distance(s, t).unwrap(), bfs[rel.as_slice()]);
                }
            }
        }
    }

    #[test]
    fn vector_distance_examples() {
        let e = p(&[1, 2, 3]);
        let r = p(&[3, 2, 1]);
        assert_eq!(spearman_footrule(&e, &r).unwrap(), 4);
        assert_eq!(spearman_rank_corr(&e, &r).unwrap(), 8);
        assert_eq!(linf_distance(&e, &r).unwrap(), 2);
        for d in [spearman_footrule, spearman_rank_corr, linf_distance] {
            assert_eq!(d(&r, &r).unwrap(), 0);
        }
        assert_eq!(lp_distance(&r, &r, 3.5).unwrap(), 0.0);
        assert!((lp_distance(&e, &r, 2.0).unwrap() - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hamming_feature_properties() {
        let id = hamming_feature(&Permutation::identity(4));
        for l in 1..=4 {
            for i in 1..=4 {
                assert_eq!(id.get(l, i), (l == i) as u8);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.random_range(1..=10);
            let (s, t) = (Permutation::random(n, &mut rng), Permutation::random(n, &mut rng));
            let (fs, ft) = (hamming_feature(&s), hamming_feature(&t));
            assert_eq!(fs.trace_product(&fs), n as u64);
            let direct = s.as_slice().iter().zip(t.as_slice()).filter(|(a, b)| a != b).count();
            assert_eq!(fs.half_sq_frobenius_distance(&ft), direct as f64);
            // rows and columns sum to one
            for l in 1..=n {
                assert_eq!((1..=n).map(|i| fs.get(l, i) as usize).sum::<usize>(), 1);
                assert_eq!((1..=n).map(|i| fs.get(i, l) as usize).sum::<usize>(), 1);
            }
        }
    }

    #[test]
    fn kendall_feature_inner_products() {
        assert!(kendall_feature(&Permutation::identity(1)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let n = rng.random_range(2..=9);
            let (s, t) = (Permutation::random(n, &mut rng), Permutation::random(n, &mut rng));
            let (fs, ft) = (kendall_feature(&s).unwrap(), kendall_feature(&t).unwrap());
            assert!((fs.dot(&fs) - 1.0).abs() < 1e-12);
            let c = binomial2(n) as f64;
            let nd = kendall_pairs(&s, &t) as f64;
            assert!((fs.dot(&ft) - (c - 2.0 * nd) / c).abs() < 1e-12);
        }
        let e = kendall_feature(&Permutation::identity(6)).unwrap();
        let r = kendall_feature(&Permutation::reverse_identity(6)).unwrap();
        assert!((e.dot(&r) + 1.0).abs() < 1e-12);
    }

    fn perm_pair_triple() -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
        (2usize..=9).prop_flat_map(|n| {
            let one = Just((1..=n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::new(v).unwrap());
            (one.clone(), one.clone(), one)
        })
    }

    const METRICS: [Distance; 6] = [
        Distance::SpearmanFootrule,
        Distance::Kendall,
        Distance::Cayley,
        Distance::Hamming,
        Distance::Lp(2.5),
        Distance::Linf,
    ];

    proptest! {
        #[test]
        fn semimetric_axioms((s, t, _u) in perm_pair_triple()) {
            for d in METRICS.iter().chain([Distance::SpearmanRankCorr].iter()) {
                let st = d.eval(&s, &t).unwrap();
                prop_assert_eq!(st, d.eval(&t, &s).unwrap());
                prop_assert_eq!(st == 0.0, s == t);
            }
        }

        #[test]
        fn triangle_inequality((s, t, u) in perm_pair_triple()) {
            for d in METRICS {
                let lhs = d.eval(&s, &u).unwrap();
                let rhs = d.eval(&s, &t).unwrap() + d.eval(&t, &u).unwrap();
                prop_assert!(lhs <= rhs + 1e-9, "{} violated", d.name());
            }
        }

        #[test]
        fn relabelling_invariance((s, t, eta) in perm_pair_triple()) {
            // η∘σ renames items; Kendall, Hamming and Cayley are unchanged
            let (es, et) = (eta.compose(&s).unwrap(), eta.compose(&t).unwrap());
            for d in [Distance::Kendall, Distance::Hamming, Distance::Cayley] {
                prop_assert_eq!(d.eval(&es, &et).unwrap(), d.eval(&s, &t).unwrap());
            }
            // σ∘η reorders positions; Hamming, Cayley and the vector distances are unchanged
            let (se, te) = (s.compose(&eta).unwrap(), t.compose(&eta).unwrap());
            for d in [Distance::Hamming, Distance::Cayley, Distance::SpearmanFootrule, Distance::SpearmanRankCorr, Distance::Linf] {
                prop_assert_eq!(d.eval(&se, &te).unwrap(), d.eval(&s, &t).unwrap());
            }
        }

        #[test]
        fn lp_one_is_footrule((s, t, _u) in perm_pair_triple()) {
            prop_assert_eq!(lp_distance(&s, &t, 1.0).unwrap(), spearman_footrule(&s, &t).unwrap() as f64);
        }
    }

    #[test]
    fn negative_type_quadratic_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [Distance::SpearmanRankCorr, Distance::Hamming, Distance::Kendall] {
            assert!(d.is_negative_type());
            for _ in 0..200 {
                let n = rng.random_range(2..=8);
                let m = rng.random_range(2..=12);
                let xs: Vec<_> = (0..m).map(|_| Permutation::random(n, &mut rng)).collect();
                let mut alpha: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mean = alpha.iter().sum::<f64>() / m as f64;
                alpha.iter_mut().for_each(|a| *a -= mean);
                let mut q = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        q += alpha[i] * alpha[j] * d.eval(&xs[i], &xs[j]).unwrap();
                    }
                }
                assert!(q <= 1e-9, "{} quadratic form {q}", d.name());
            }
        }
    }
}
