//! Permutations of `{1..n}` stored as position → item arrays.
//!
//! A ranking `a_1 ≻ a_2 ≻ … ≻ a_n` is the permutation with `σ(j) = a_j`, so
//! `mapping[j - 1]` is the item placed at position `j`. Items and positions
//! are 1-based throughout the public API.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A bijection on `{1..n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    /// Validates `mapping` (1-based items) and wraps it.
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        if n == 0 {
            return invalid("permutation must have degree >= 1");
        }
        let mut seen = vec![false; n];
        for &item in &mapping {
            if item == 0 || item > n {
                return invalid(format!("item {item} out of range 1..={n}"));
            }
            if std::mem::replace(&mut seen[item - 1], true) {
                return invalid(format!("item {item} appears twice"));
            }
        }
        Ok(Self { mapping })
    }

    /// Builds from a mapping already known to be a bijection.
    pub(crate) fn from_vec_unchecked(mapping: Vec<usize>) -> Self {
        debug_assert!(Self::new(mapping.clone()).is_ok());
        Self { mapping }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "degree must be >= 1");
        Self {
            mapping: (1..=n).collect(),
        }
    }

    /// The reversal `n ≻ n-1 ≻ … ≻ 1` of the identity.
    pub fn reverse_identity(n: usize) -> Self {
        assert!(n >= 1, "degree must be >= 1");
        Self {
            mapping: (1..=n).rev().collect(),
        }
    }

    /// Uniformly random permutation of degree `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Self::identity(n);
        p.mapping.shuffle(rng);
        p
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.mapping.len()
    }

    /// The item at 1-based `position`.
    #[inline]
    pub fn at(&self, position: usize) -> usize {
        self.mapping[position - 1]
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.mapping
    }

    /// `ranks()[item - 1]` is the 1-based position of `item`, i.e. `σ⁻¹`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![0; self.degree()];
        for (pos, &item) in self.mapping.iter().enumerate() {
            r[item - 1] = pos + 1;
        }
        r
    }

    pub fn inverse(&self) -> Self {
        Self {
            mapping: self.ranks(),
        }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_degrees(self, other)?;
        Ok(Self {
            mapping: other.mapping.iter().map(|&i| self.mapping[i - 1]).collect(),
        })
    }

    /// Number of cycles in the cycle decomposition (fixed points count).
    pub fn cycle_count(&self) -> usize {
        let n = self.degree();
        let mut visited = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.mapping[i] - 1;
            }
        }
        cycles
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &x)| x == i + 1)
    }
}

pub(crate) fn check_degrees(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        });
    }
    Ok(())
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.mapping.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.mapping.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Permutation::new(v).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

/// Every permutation of degree `n` in lexicographic order of the mapping.
///
/// Only meant for small `n`; the caller is responsible for `n!` fitting in memory.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=n).collect();
    loop {
        out.push(Permutation::from_vec_unchecked(cur.clone()));
        if !next_lexicographic(&mut cur) {
            break;
        }
    }
    out
}

/// Advances `v` to its lexicographic successor; false when `v` was the last one.
pub(crate) fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
