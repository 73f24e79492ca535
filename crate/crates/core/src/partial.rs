//! Partial rankings `Ω₁ ≻ … ≻ Ω_l` and the set `R ⊆ S_n` of full rankings
//! consistent with them.
//!
//! Text syntax: blocks separated by `>`, items inside a block separated by
//! `,`. A trailing `|rest` appends every item not yet mentioned as a final
//! block, so `3>1|rest` with `n = 4` is the top-2 ranking `3 ≻ 1 ≻ {2, 4}`.
//! Without it, unmentioned items are unconstrained.

use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distance::binomial2;
use crate::error::{invalid, Error, Result};
use crate::perm::Permutation;

/// Ordered, pairwise-disjoint, non-empty blocks of items from `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRanking", into = "RawRanking")]
pub struct PartialRanking {
    degree: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawRanking {
    degree: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<RawRanking> for PartialRanking {
    type Error = Error;
    fn try_from(r: RawRanking) -> Result<Self> {
        PartialRanking::new(r.degree, r.blocks)
    }
}

impl From<PartialRanking> for RawRanking {
    fn from(r: PartialRanking) -> Self {
        RawRanking {
            degree: r.degree,
            blocks: r.blocks,
        }
    }
}

impl PartialRanking {
    /// Items inside a block carry no order and are stored ascending.
    pub fn new(degree: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if degree == 0 {
            return invalid("partial ranking degree must be >= 1");
        }
        let mut seen = vec![false; degree];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return invalid(format!("block {} is empty", b + 1));
            }
            for &item in block {
                if item == 0 || item > degree {
                    return invalid(format!("item {item} out of range 1..={degree}"));
                }
                if std::mem::replace(&mut seen[item - 1], true) {
                    return invalid(format!("item {item} appears more than once"));
                }
            }
        }
        blocks.iter_mut().for_each(|b| b.sort_unstable());
        Ok(Self { degree, blocks })
    }

    /// No constraints: `R = S_n`.
    pub fn unconstrained(degree: usize) -> Result<Self> {
        Self::new(degree, Vec::new())
    }

    /// `a_1 ≻ … ≻ a_k ≻ rest`, the complement forming the final block.
    pub fn top_k(degree: usize, ranked: &[usize]) -> Result<Self> {
        let mut r = Self::chain(degree, ranked)?;
        let rest = r.unranked_items();
        if !rest.is_empty() && !r.blocks.is_empty() {
            r.blocks.push(rest);
        }
        Ok(r)
    }

    /// Chain `a_1 ≻ … ≻ a_m` of singletons with the remaining items free.
    pub fn chain(degree: usize, items: &[usize]) -> Result<Self> {
        Self::new(degree, items.iter().map(|&a| vec![a]).collect())
    }

    /// The single full ranking `σ(1) ≻ … ≻ σ(n)`.
    pub fn from_permutation(sigma: &Permutation) -> Self {
        Self {
            degree: sigma.degree(),
            blocks: sigma.as_slice().iter().map(|&a| vec![a]).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Total number of items mentioned in some block.
    pub fn mentioned(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Items in no block, ascending.
    pub fn unranked_items(&self) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        for &x in self.blocks.iter().flatten() {
            seen[x - 1] = true;
        }
        (1..=self.degree).filter(|&x| !seen[x - 1]).collect()
    }

    pub fn is_exhaustive(&self) -> bool {
        self.mentioned() == self.degree
    }

    /// Ranked prefix `a_1, …, a_k` when this is a top-k ranking.
    ///
    /// Top-k means every block but the last is a singleton and the blocks
    /// cover all items; the unconstrained ranking is top-0.
    pub fn top_k_prefix(&self) -> Option<Vec<usize>> {
        match self.blocks.len() {
            0 => return Some(Vec::new()),
            1 => return (self.blocks[0].len() == self.degree).then(Vec::new),
            _ => {}
        }
        if !self.is_exhaustive() {
            return None;
        }
        let (last, head) = self.blocks.split_last().unwrap();
        if head.iter().any(|b| b.len() != 1) {
            return None;
        }
        let mut prefix: Vec<usize> = head.iter().map(|b| b[0]).collect();
        if last.len() == 1 {
            prefix.push(last[0]);
        }
        Some(prefix)
    }

    pub fn is_top_k(&self) -> bool {
        self.top_k_prefix().is_some()
    }

    fn require_top_k(&self, op: &str) -> Result<Vec<usize>> {
        self.top_k_prefix().ok_or_else(|| {
            Error::UnsupportedRankingType(format!(
                "{op} requires a top-k partial ranking, got `{self}`"
            ))
        })
    }

    fn check_degree(&self, sigma: &Permutation) -> Result<()> {
        if sigma.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: sigma.degree(),
                right: self.degree,
            });
        }
        Ok(())
    }

    /// Whether `σ` places every item of an earlier block before every item of a later one.
    pub fn is_consistent(&self, sigma: &Permutation) -> Result<bool> {
        self.check_degree(sigma)?;
        Ok(self.contains_unchecked(&sigma.ranks()))
    }

    fn contains_unchecked(&self, ranks: &[usize]) -> bool {
        let mut prev_max = 0;
        for block in &self.blocks {
            let (mut lo, mut hi) = (usize::MAX, 0);
            for &x in block {
                lo = lo.min(ranks[x - 1]);
                hi = hi.max(ranks[x - 1]);
            }
            if lo < prev_max {
                return false;
            }
            prev_max = hi;
        }
        true
    }

    /// `|R| = (n! / m!) ∏ |Ω_i|!` with `m` the number of mentioned items.
    pub fn cardinality_big(&self) -> BigUint {
        let m = self.mentioned();
        let mut c: BigUint = ((m + 1)..=self.degree).map(BigUint::from).product();
        for block in &self.blocks {
            c *= (1..=block.len()).map(BigUint::from).product::<BigUint>();
        }
        c
    }

    /// `|R|` in 128-bit arithmetic; overflow is reported, not wrapped.
    pub fn cardinality(&self) -> Result<u128> {
        let overflow = || Error::Overflow(format!("|R| for `{self}` exceeds 128 bits"));
        let m = self.mentioned();
        let mut c: u128 = 1;
        for k in (m + 1)..=self.degree {
            c = c.checked_mul(k as u128).ok_or_else(overflow)?;
        }
        for block in &self.blocks {
            for k in 2..=block.len() {
                c = c.checked_mul(k as u128).ok_or_else(overflow)?;
            }
        }
        Ok(c)
    }

    fn check_limit(&self, limit: u128) -> Result<u128> {
        let size = self.cardinality_big();
        match u128::try_from(&size) {
            Ok(s) if s <= limit => Ok(s),
            _ => Err(Error::Infeasible {
                what: format!("consistent set of `{self}` (n={})", self.degree),
                size: size.to_string(),
                limit,
            }),
        }
    }

    /// All consistent full rankings in lexicographic order of the mapping.
    pub fn enumerate(&self, limit: u128) -> Result<Vec<Permutation>> {
        let size = self.check_limit(limit)?;
        let n = self.degree;
        // block index per item; unmentioned items are free
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                block_of[x - 1] = b;
            }
        }
        let mut remaining_in_block: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        let mut out = Vec::with_capacity(size as usize);
        let mut used = vec![false; n];
        let mut cur = Vec::with_capacity(n);
        let mut walker = Enumerator {
            block_of: &block_of,
            remaining: &mut remaining_in_block,
            used: &mut used,
            cur: &mut cur,
            out: &mut out,
            n,
        };
        walker.recurse(0);
        Ok(out)
    }

    /// Exact uniform draw from `R`.
    ///
    /// Blocks are shuffled internally, unmentioned items are shuffled, and
    /// the positions of the mentioned items are a uniform subset of `1..=n`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let n = self.degree;
        let mut ranked: Vec<usize> = Vec::with_capacity(self.mentioned());
        for block in &self.blocks {
            let start = ranked.len();
            ranked.extend_from_slice(block);
            ranked[start..].shuffle(rng);
        }
        let mut free = self.unranked_items();
        free.shuffle(rng);
        let mut slot_is_ranked = vec![false; n];
        for i in rand::seq::index::sample(rng, n, ranked.len()) {
            slot_is_ranked[i] = true;
        }
        let (mut r, mut f) = (ranked.into_iter(), free.into_iter());
        let mapping = slot_is_ranked
            .into_iter()
            .map(|is_ranked| if is_ranked { r.next() } else { f.next() }.unwrap())
            .collect();
        Permutation::from_vec_unchecked(mapping)
    }

    /// Maximal-Kendall-distance partner of `σ` inside a top-k `R`: the ranked
    /// prefix is kept and the remaining `n − k` positions are reversed.
    pub fn antithetic(&self, sigma: &Permutation) -> Result<Permutation> {
        let prefix = self.require_top_k("antithetic")?;
        if !self.is_consistent(sigma)? {
            return invalid(format!("{sigma} is not consistent with `{self}`"));
        }
        Ok(reverse_tail(sigma, prefix.len()))
    }

    /// `(σ₁, A_R(σ₁))` with `σ₁` uniform on a top-k `R`.
    pub fn sample_antithetic_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(Permutation, Permutation)> {
        let k = self.require_top_k("antithetic sampling")?.len();
        let first = self.sample_uniform(rng);
        let second = reverse_tail(&first, k);
        Ok((first, second))
    }

    /// Kendall-closest element of a top-k `R` to an arbitrary `τ`: the ranked
    /// prefix followed by the other items in the order `τ` gives them.
    pub fn project(&self, tau: &Permutation) -> Result<Permutation> {
        let prefix = self.require_top_k("projection")?;
        self.check_degree(tau)?;
        let mut in_prefix = vec![false; self.degree];
        for &a in &prefix {
            in_prefix[a - 1] = true;
        }
        let mut mapping = prefix;
        mapping.extend(tau.as_slice().iter().filter(|&&x| !in_prefix[x - 1]));
        Ok(Permutation::from_vec_unchecked(mapping))
    }

    /// For top-k `R: a_1 ≻ … ≻ a_l` and `R′: b_1 ≻ … ≻ b_m`, the ranking
    /// `a_1 ≻ … ≻ a_l ≻ b_{i_1} ≻ … ≻ b_{i_q} ≻ rest` where the `b_{i_j}`
    /// are the `b`'s not among the `a`'s, in their original order.
    ///
    /// Projecting `Unif(R′)` onto `R` yields `Unif` of this ranking.
    pub fn compose_rankings(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let mut items = self.require_top_k("ranking composition")?;
        let theirs = other.require_top_k("ranking composition")?;
        let mut taken = vec![false; self.degree];
        for &a in &items {
            taken[a - 1] = true;
        }
        items.extend(theirs.into_iter().filter(|&b| !taken[b - 1]));
        Self::top_k(self.degree, &items)
    }
}

fn reverse_tail(sigma: &Permutation, k: usize) -> Permutation {
    let mut mapping = sigma.as_slice().to_vec();
    mapping[k..].reverse();
    Permutation::from_vec_unchecked(mapping)
}

struct Enumerator<'a> {
    block_of: &'a [usize],
    remaining: &'a mut Vec<usize>,
    used: &'a mut Vec<bool>,
    cur: &'a mut Vec<usize>,
    out: &'a mut Vec<Permutation>,
    n: usize,
}

impl Enumerator<'_> {
    /// `next_block` is the first block that still has unplaced items.
    fn recurse(&mut self, next_block: usize) {
        if self.cur.len() == self.n {
            self.out
                .push(Permutation::from_vec_unchecked(self.cur.clone()));
            return;
        }
        for x in 0..self.n {
            if self.used[x] {
                continue;
            }
            let b = self.block_of[x];
            if b != usize::MAX && b != next_block {
                continue;
            }
            self.used[x] = true;
            self.cur.push(x + 1);
            let mut nb = next_block;
            if b != usize::MAX {
                self.remaining[b] -= 1;
                while nb < self.remaining.len() && self.remaining[nb] == 0 {
                    nb += 1;
                }
            }
            self.recurse(nb);
            if b != usize::MAX {
                self.remaining[b] += 1;
            }
            self.cur.pop();
            self.used[x] = false;
        }
    }
}

/// Kendall distance from `σ` to its antithetic partner in a top-k ranking with `k` ranked items.
pub fn antithetic_distance(degree: usize, k: usize) -> u64 {
    binomial2(degree - k.min(degree))
}

impl fmt::Display for PartialRanking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("|rest");
        }
        let explicit_rest = self.blocks.len() >= 2
            && self.is_exhaustive()
            && self.blocks.last().is_some_and(|b| b.len() >= 2);
        let shown = if explicit_rest {
            &self.blocks[..self.blocks.len() - 1]
        } else {
            &self.blocks[..]
        };
        for (i, block) in shown.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        if explicit_rest {
            f.write_str("|rest")?;
        }
        Ok(())
    }
}

impl PartialRanking {
    /// Parses the `3>1,2>4` / `3>1|rest` syntax for a given degree.
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let text = text.trim();
        let (body, rest) = match text.strip_suffix("|rest") {
            Some(b) => (b.trim(), true),
            None => (text, false),
        };
        let mut blocks = Vec::new();
        if !body.is_empty() {
            for (b, block) in body.split('>').enumerate() {
                let items = block
                    .split(',')
                    .map(|tok| {
                        let tok = tok.trim();
                        tok.parse::<usize>().map_err(|_| {
                            Error::InvalidArgument(format!(
                                "block {}: `{tok}` is not an item number",
                                b + 1
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                blocks.push(items);
            }
        } else if !rest {
            return invalid("empty ranking; write `|rest` for the unconstrained ranking");
        }
        let mut r = Self::new(degree, blocks)?;
        if rest && !r.blocks.is_empty() {
            let tail = r.unranked_items();
            if !tail.is_empty() {
                r.blocks.push(tail);
            }
        }
        Ok(r)
    }
}
