//! Average-linkage (UPGMA) clustering, tree cuts and dendrogram purity.
//!
//! Node ids follow the usual linkage-matrix convention: leaves are
//! `0..N`, and the `t`-th merge creates node `N + t`.

use std::collections::HashMap;
use std::hash::Hash;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Dendrogram {
    /// Checks node ids, merge count and leaf coverage.
    pub fn validate(&self) -> Result<()> {
        let n = self.leaves;
        if n == 0 {
            return invalid("dendrogram has no leaves");
        }
        if self.merges.len() != n - 1 {
            return invalid(format!("{} merges for {n} leaves", self.merges.len()));
        }
        if let Some(l) = &self.labels {
            if l.len() != n {
                return invalid(format!("{} labels for {n} leaves", l.len()));
            }
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes = vec![1usize; 2 * n - 1];
        for (t, m) in self.merges.iter().enumerate() {
            for c in [m.left, m.right] {
                if c >= n + t || std::mem::replace(&mut used[c], true) {
                    return invalid(format!("merge {t} uses node {c} twice or before it exists"));
                }
            }
            if !(m.height >= 0.0) {
                return invalid(format!("merge {t} has height {}", m.height));
            }
            sizes[n + t] = sizes[m.left] + sizes[m.right];
            if m.size != sizes[n + t] {
                return invalid(format!("merge {t} records size {}, expected {}", m.size, sizes[n + t]));
            }
        }
        Ok(())
    }
}

fn check_distance_matrix(d: &DMatrix<f64>) -> Result<usize> {
    let n = d.nrows();
    if n == 0 || d.ncols() != n {
        return invalid(format!("distance matrix must be square and non-empty, got {}x{}", n, d.ncols()));
    }
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return invalid(format!("diagonal entry {i} is {}", d[(i, i)]));
        }
        for j in 0..i {
            let v = d[(i, j)];
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("entry ({i},{j}) = {v} is not a finite nonnegative value"));
            }
            if v != d[(j, i)] {
                return invalid(format!("matrix is not symmetric at ({i},{j})"));
            }
        }
    }
    Ok(n)
}

/// UPGMA over a symmetric, zero-diagonal, nonnegative matrix.
///
/// The cluster distance is the mean of cross pairs, maintained by the
/// Lance–Williams update. Each cluster lives in the slot of its smallest
/// leaf; among equally close pairs, the lexicographically smallest slot pair
/// merges first.
pub fn average_linkage(d: &DMatrix<f64>) -> Result<Dendrogram> {
    let n = check_distance_matrix(d)?;
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| d[(i, j)]).collect()).collect();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node = (0..n).collect::<Vec<_>>();
    // nearest[i] = closest active j > i, smallest j on ties
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; n];
    let scan = |dist: &Vec<Vec<f64>>, active: &Vec<bool>, i: usize| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for j in i + 1..dist.len() {
            if active[j] && best.is_none_or(|(b, _)| dist[i][j] < b) {
                best = Some((dist[i][j], j));
            }
        }
        best
    };
    for i in 0..n {
        nearest[i] = scan(&dist, &active, i);
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for t in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if let (true, Some((v, j))) = (active[i], nearest[i]) {
                if best.is_none_or(|(b, _, _)| v < b) {
                    best = Some((v, i, j));
                }
            }
        }
        let (height, a, b) = best.expect("at least two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if active[k] && k != a && k != b {
                let v = (na * dist[a][k] + nb * dist[b][k]) / (na + nb);
                dist[a][k] = v;
                dist[k][a] = v;
            }
        }
        active[b] = false;
        size[a] += size[b];
        let (l, r) = (node[a], node[b]);
        merges.push(Merge {
            left: l.min(r),
            right: l.max(r),
            height,
            size: size[a],
        });
        node[a] = n + t;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if i == a {
                nearest[i] = scan(&dist, &active, i);
            } else if i < a {
                match nearest[i] {
                    Some((_, j)) if j == a || j == b => nearest[i] = scan(&dist, &active, i),
                    Some((v, j)) => {
                        let w = dist[i][a];
                        if w < v || (w == v && a < j) {
                            nearest[i] = Some((w, a));
                        }
                    }
                    None => nearest[i] = scan(&dist, &active, i),
                }
            } else if matches!(nearest[i], Some((_, j)) if j == b) {
                nearest[i] = scan(&dist, &active, i);
            }
        }
    }
    Ok(Dendrogram {
        leaves: n,
        merges,
        labels: None,
    })
}

/// Flat clustering with `k` clusters: the last `k − 1` merges are undone.
///
/// Cluster ids are numbered by first appearance in leaf order.
pub fn cut_tree(tree: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    tree.validate()?;
    let n = tree.leaves;
    if k == 0 || k > n {
        return invalid(format!("k must be in 1..={n}, got {k}"));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (t, m) in tree.merges.iter().take(n - k).enumerate() {
        parent[m.left] = n + t;
        parent[m.right] = n + t;
    }
    let mut ids = HashMap::new();
    Ok((0..n)
        .map(|leaf| {
            let root = find(&mut parent, leaf);
            let next = ids.len();
            *ids.entry(root).or_insert(next)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityMode {
    /// Per-class expectation over same-class pairs, then the mean over classes.
    #[default]
    PerClass,
    /// Expectation over all same-class pairs pooled across classes.
    Pooled,
}

/// Exact dendrogram purity by aggregation at least common ancestors.
///
/// For a same-class pair `(x, y)` of class `c`, the pair's purity is the
/// fraction of leaves of class `c` under `lca(x, y)`. Classes with a single
/// member contribute no pairs.
pub fn dendrogram_purity<L: Eq + Hash>(
    tree: &Dendrogram,
    labels: &[L],
    mode: PurityMode,
) -> Result<f64> {
    tree.validate()?;
    let n = tree.leaves;
    if labels.len() != n {
        return invalid(format!("{} labels for {n} leaves", labels.len()));
    }
    let mut class_of = HashMap::new();
    let classes: Vec<usize> = labels
        .iter()
        .map(|l| {
            let next = class_of.len();
            *class_of.entry(l).or_insert(next)
        })
        .collect();
    let c = class_of.len();
    let mut class_size = vec![0u64; c];
    for &k in &classes {
        class_size[k] += 1;
    }
    let pairs: Vec<f64> = class_size.iter().map(|&s| (s * s.saturating_sub(1) / 2) as f64).collect();
    if pairs.iter().all(|&p| p == 0.0) {
        return Err(Error::UndefinedPurity("no label occurs on two or more leaves".into()));
    }
    // sparse class counts per node; children are consumed on merge
    let mut counts: Vec<Option<HashMap<usize, u64>>> = Vec::with_capacity(2 * n - 1);
    counts.extend(classes.iter().map(|&k| Some(HashMap::from([(k, 1u64)]))));
    let mut score = vec![0.0f64; c];
    for m in &tree.merges {
        let a = counts[m.left].take().expect("node consumed once");
        let b = counts[m.right].take().expect("node consumed once");
        let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        let mut lca_pairs = Vec::new();
        for (&k, &cs) in &small {
            let cb = big.get(&k).copied().unwrap_or(0);
            if cb > 0 {
                lca_pairs.push((k, cs * cb));
            }
            *big.entry(k).or_insert(0) += cs;
        }
        for (k, p) in lca_pairs {
            score[k] += p as f64 * big[&k] as f64 / m.size as f64;
        }
        counts.push(Some(big));
    }
    Ok(match mode {
        PurityMode::PerClass => {
            let used: Vec<usize> = (0..c).filter(|&k| pairs[k] > 0.0).collect();
            used.iter().map(|&k| score[k] / pairs[k]).sum::<f64>() / used.len() as f64
        }
        PurityMode::Pooled => score.iter().sum::<f64>() / pairs.iter().sum::<f64>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) })
    }

    /// O(N³) UPGMA recomputing each cluster distance from leaf pairs.
    fn naive_upgma(d: &DMatrix<f64>) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
        let mut clusters: Vec<Vec<usize>> = (0..d.nrows()).map(|i| vec![i]).collect();
        let mut out = Vec::new();
        while clusters.len() > 1 {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..clusters.len() {
                for b in a + 1..clusters.len() {
                    let mut s = 0.0;
                    for &x in &clusters[a] {
                        for &y in &clusters[b] {
                            s += d[(x, y)];
                        }
                    }
                    let v = s / (clusters[a].len() * clusters[b].len()) as f64;
                    if v < best.0 {
                        best = (v, a, b);
                    }
                }
            }
            let (v, a, b) = best;
            let cb = clusters.remove(b);
            let ca = clusters[a].clone();
            clusters[a].extend(&cb);
            clusters[a].sort();
            out.push((ca, cb, v));
        }
        out
    }

    fn leaves_under(tree: &Dendrogram, node: usize) -> Vec<usize> {
        if node < tree.leaves {
            return vec![node];
        }
        let m = &tree.merges[node - tree.leaves];
        let mut v = leaves_under(tree, m.left);
        v.extend(leaves_under(tree, m.right));
        v.sort();
        v
    }

    #[test]
    fn small_examples() {
        let d = matrix(2, |_, _| 3.0);
        let t = average_linkage(&d).unwrap();
        assert_eq!(t.merges, vec![Merge { left: 0, right: 1, height: 3.0, size: 2 }]);

        let d = matrix(3, |i, j| if (i, j) == (0, 1) { 1.0 } else { 4.0 });
        let t = average_linkage(&d).unwrap();
        assert_eq!(t.merges[0], Merge { left: 0, right: 1, height: 1.0, size: 2 });
        assert_eq!(t.merges[1], Merge { left: 2, right: 3, height: 4.0, size: 3 });
        assert_eq!(cut_tree(&t, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(cut_tree(&t, 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(cut_tree(&t, 3).unwrap(), vec![0, 1, 2]);
        assert!(cut_tree(&t, 0).is_err());
        assert!(cut_tree(&t, 4).is_err());

        let single = average_linkage(&DMatrix::zeros(1, 1)).unwrap();
        assert!(single.merges.is_empty());
    }

    #[test]
    fn ties_merge_smallest_pair_first() {
        let d = matrix(4, |_, _| 1.0);
        let t = average_linkage(&d).unwrap();
        assert_eq!((t.merges[0].left, t.merges[0].right), (0, 1));
        assert_eq!((t.merges[1].left, t.merges[1].right), (2, 4));
        assert_eq!((t.merges[2].left, t.merges[2].right), (3, 5));
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(average_linkage(&DMatrix::zeros(0, 0)).is_err());
        assert!(average_linkage(&DMatrix::zeros(2, 3)).is_err());
        let mut d = matrix(3, |_, _| 1.0);
        d[(0, 1)] = 2.0;
        assert!(average_linkage(&d).is_err());
        let d = matrix(3, |_, _| -1.0);
        assert!(average_linkage(&d).is_err());
        let mut d = matrix(3, |_, _| 1.0);
        d[(1, 1)] = 0.5;
        assert!(average_linkage(&d).is_err());
    }

    #[test]
    fn agrees_with_naive_upgma() {
        let mut rng = stream(11, 0);
        for _ in 0..20 {
            let n = 20;
            let vals: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
            let d = matrix(n, |i, j| vals[i * n + j]);
            let t = average_linkage(&d).unwrap();
            t.validate().unwrap();
            let reference = naive_upgma(&d);
            for (m, (a, b, h)) in t.merges.iter().zip(&reference) {
                assert!((m.height - h).abs() < 1e-12);
                let mut got = [leaves_under(&t, m.left), leaves_under(&t, m.right)];
                got.sort();
                let mut want = [a.clone(), b.clone()];
                want.sort();
                assert_eq!(got, want);
            }
            assert!(t.merges.windows(2).all(|w| w[0].height <= w[1].height + 1e-12));
        }
    }

    fn four_leaf() -> Dendrogram {
        // ((0,1),(2,3))
        Dendrogram {
            leaves: 4,
            merges: vec![
                Merge { left: 0, right: 1, height: 1.0, size: 2 },
                Merge { left: 2, right: 3, height: 1.0, size: 2 },
                Merge { left: 4, right: 5, height: 2.0, size: 4 },
            ],
            labels: None,
        }
    }

    #[test]
    fn purity_examples() {
        let t = four_leaf();
        assert_eq!(dendrogram_purity(&t, &["a", "b", "a", "b"], PurityMode::PerClass).unwrap(), 0.5);
        assert_eq!(dendrogram_purity(&t, &["a", "a", "b", "b"], PurityMode::PerClass).unwrap(), 1.0);
        assert_eq!(dendrogram_purity(&t, &["a", "a", "a", "a"], PurityMode::PerClass).unwrap(), 1.0);
        assert!(matches!(
            dendrogram_purity(&t, &["a", "b", "c", "d"], PurityMode::PerClass),
            Err(Error::UndefinedPurity(_))
        ));
        assert!(dendrogram_purity(&t, &["a", "b"], PurityMode::PerClass).is_err());
        // class a: pair (0,1) purity 1; pair (0,2),(1,2) at root 3/4; class b single
        let per = dendrogram_purity(&t, &["a", "a", "a", "b"], PurityMode::PerClass).unwrap();
        assert!((per - (1.0 + 0.75 + 0.75) / 3.0).abs() < 1e-15);
        // pooled differs from per-class when classes have different pair counts
        let labels = ["a", "a", "a", "b", "b", "a"];
        let d = matrix(6, |i, j| (i as f64 - j as f64).abs());
        let t = average_linkage(&d).unwrap();
        let p = dendrogram_purity(&t, &labels, PurityMode::PerClass).unwrap();
        let q = dendrogram_purity(&t, &labels, PurityMode::Pooled).unwrap();
        assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        assert_ne!(p, q);
    }

    #[test]
    fn dendrogram_json_round_trip() {
        let t = four_leaf();
        let back: Dendrogram = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
