//! Enumeration-backed invariant suite for small degrees.
//!
//! Checks scan enumerated sets (a few with a fixed stride to bound the
//! cost), and a failure names its first counterexample.

use serde::Serialize;

use crate::distance::{
    binomial2, hamming_distance, hamming_feature, kendall_distance, kendall_feature, Distance,
};
use crate::error::{invalid, Result};
use crate::estimators::herding_pairs;
use crate::kernels::KernelSpec;
use crate::linalg::min_eigenvalue;
use crate::partial::PartialRanking;
use crate::perm::{all_permutations, Permutation};

pub const MAX_SELFCHECK_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub max_degree: usize,
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Check {
    name: &'static str,
    cases: u64,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failure: None,
        }
    }

    /// Records one case; keeps the first failure.
    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.failure.is_none(),
            cases: self.cases,
            counterexample: self.failure,
        }
    }
}

fn d(a: &Permutation, b: &Permutation) -> u64 {
    kendall_distance(a, b).expect("equal degrees")
}

/// Top-k rankings with prefixes of length at most `max_len`, in lex order.
fn prefixes(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len.min(n) {
        let mut next = Vec::new();
        for p in &frontier {
            for x in 1..=n {
                if !p.contains(&x) {
                    let mut q: Vec<usize> = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn top(n: usize, prefix: &[usize]) -> PartialRanking {
    PartialRanking::top_k(n, prefix).expect("valid prefix")
}

/// Runs every check for degrees `3..=max_degree`.
pub fn run_selfcheck(max_degree: usize) -> Result<SelfCheckReport> {
    if !(3..=MAX_SELFCHECK_DEGREE).contains(&max_degree) {
        return invalid(format!(
            "self-check degree must be in 3..={MAX_SELFCHECK_DEGREE}, got {max_degree}"
        ));
    }
    let degrees: Vec<usize> = (3..=max_degree).collect();
    let groups: Vec<Vec<Permutation>> = degrees.iter().map(|&n| all_permutations(n)).collect();
    let checks = vec![
        two_above_one(),
        semimetric_axioms(&groups),
        hamming_features(&groups),
        kendall_features(&groups),
        positive_definite_grams(&groups),
        cardinality_matches_enumeration(&degrees),
        antithetic_distance(&degrees),
        constant_sum(&degrees),
        projection_decomposition(&degrees, &groups),
        antithetic_relation(&degrees, &groups),
        nested_commutation(&degrees),
        nested_constant_sum(&degrees),
        herding_two_step(&degrees),
    ];
    Ok(SelfCheckReport {
        max_degree,
        checks,
    })
}

fn two_above_one() -> CheckOutcome {
    let mut c = Check::new("kendall distances within 2>1, n=3");
    let r = PartialRanking::chain(3, &[2, 1]).expect("valid");
    let members = r.enumerate(10).expect("small");
    let got: Vec<u64> = vec![
        d(&members[0], &members[1]),
        d(&members[0], &members[2]),
        d(&members[1], &members[2]),
    ];
    c.case(got == [1, 2, 1], || format!("{members:?} gave {got:?}"));
    c.finish()
}

fn semimetric_axioms(groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("semimetric axioms and invariance (n<=4)");
    let dists = [
        Distance::Kendall,
        Distance::Hamming,
        Distance::Cayley,
        Distance::SpearmanFootrule,
        Distance::SpearmanRankCorr,
        Distance::Lp(2.0),
        Distance::Linf,
    ];
    for g in groups.iter().filter(|g| g[0].degree() <= 4) {
        for dist in dists {
            for a in g {
                for b in g {
                    let v = dist.eval(a, b).expect("valid");
                    let w = dist.eval(b, a).expect("valid");
                    c.case(v == w && v >= 0.0 && ((v == 0.0) == (a == b)), || {
                        format!("{} on {a}, {b}", dist.name())
                    });
                }
                // Kendall is invariant under relabelling items (η∘σ), the
                // rank-vector distances under reindexing positions (σ∘η),
                // Hamming and Cayley under both
                let eta = &g[g.len() / 2];
                let (items, positions) = match dist {
                    Distance::Kendall => (true, false),
                    Distance::Hamming | Distance::Cayley => (true, true),
                    _ => (false, true),
                };
                for b in g.iter().step_by(3) {
                    let rhs = dist.eval(a, b).unwrap();
                    if items {
                        let lhs = dist.eval(&eta.compose(a).unwrap(), &eta.compose(b).unwrap()).unwrap();
                        c.case(lhs == rhs, || format!("{} relabelled by {eta}: {a}, {b}", dist.name()));
                    }
                    if positions {
                        let lhs = dist.eval(&a.compose(eta).unwrap(), &b.compose(eta).unwrap()).unwrap();
                        c.case(lhs == rhs, || format!("{} reindexed by {eta}: {a}, {b}", dist.name()));
                    }
                }
            }
        }
    }
    c.finish()
}

fn hamming_features(groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("hamming distance equals half squared feature distance");
    for g in groups.iter().filter(|g| g[0].degree() <= 5) {
        let feats: Vec<_> = g.iter().map(hamming_feature).collect();
        for (i, a) in g.iter().enumerate() {
            for (j, b) in g.iter().enumerate().step_by(7) {
                let h = hamming_distance(a, b).unwrap() as f64;
                c.case(feats[i].half_sq_frobenius_distance(&feats[j]) == h, || format!("{a}, {b}"));
            }
        }
    }
    c.finish()
}

fn kendall_features(groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("kendall feature inner products equal the kendall kernel");
    let spec = KernelSpec::kendall();
    for g in groups.iter().filter(|g| g[0].degree() <= 5) {
        let feats: Vec<_> = g.iter().map(|s| kendall_feature(s).unwrap()).collect();
        for (i, a) in g.iter().enumerate() {
            for (j, b) in g.iter().enumerate().step_by(5) {
                let k = spec.eval(a, b).unwrap();
                c.case((feats[i].dot(&feats[j]) - k).abs() < 1e-12, || format!("{a}, {b}"));
            }
        }
    }
    c.finish()
}

fn positive_definite_grams(groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("kernel Gram matrices over S_n are PSD (n<=5)");
    let specs = [
        KernelSpec::kendall(),
        KernelSpec::mallows(0.5),
        KernelSpec::polynomial(3),
        KernelSpec::hamming(),
        KernelSpec::exp_semimetric(Distance::Hamming, 0.7),
        KernelSpec::exp_semimetric(Distance::Kendall, 1.3),
        KernelSpec::distance_induced(Distance::Kendall, None),
        KernelSpec::distance_induced(Distance::SpearmanRankCorr, None),
    ];
    for g in groups.iter().filter(|g| g[0].degree() <= 5) {
        for spec in &specs {
            let m = spec.gram(g).unwrap();
            let lam = min_eigenvalue(&m);
            let tol = 1e-9 * m.amax().max(1.0);
            c.case(lam >= -tol, || format!("{spec:?} at n={}: {lam:e}", g[0].degree()));
        }
    }
    c.finish()
}

fn cardinality_matches_enumeration(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("cardinality equals enumeration size and consistency");
    for &n in degrees {
        let group = all_permutations(n);
        let cases = [
            PartialRanking::unconstrained(n).unwrap(),
            PartialRanking::chain(n, &[2, 1]).unwrap(),
            PartialRanking::new(n, vec![vec![1, 3], vec![2]]).unwrap(),
            PartialRanking::top_k(n, &[n, 1]).unwrap(),
        ];
        for r in cases {
            let members = r.enumerate(1_000_000).unwrap();
            let brute = group.iter().filter(|s| r.is_consistent(s).unwrap()).count();
            c.case(
                members.len() as u128 == r.cardinality().unwrap() && members.len() == brute,
                || format!("`{r}` at n={n}"),
            );
        }
    }
    c.finish()
}

fn antithetic_distance(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("antithetic partner is the unique farthest element");
    for &n in degrees {
        for p in prefixes(n, 2) {
            let r = top(n, &p);
            let members = r.enumerate(1_000_000).unwrap();
            let k = p.len().min(n);
            for s in &members {
                let a = r.antithetic(s).unwrap();
                let far = members.iter().map(|t| d(s, t)).max().unwrap();
                let argmax = members.iter().filter(|t| d(s, t) == far).count();
                c.case(
                    d(s, &a) == binomial2(n - k) && far == d(s, &a) && argmax == 1 && r.is_consistent(&a).unwrap(),
                    || format!("`{r}` σ={s}"),
                );
            }
        }
    }
    c.finish()
}

fn constant_sum(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("d(σ,τ) + d(A(σ),τ) is constant on a top-k set");
    for &n in degrees {
        for p in prefixes(n, 2) {
            let r = top(n, &p);
            let members = r.enumerate(1_000_000).unwrap();
            let want = binomial2(n - p.len());
            for s in &members {
                let a = r.antithetic(s).unwrap();
                for t in members.iter().step_by(3) {
                    c.case(d(s, t) + d(&a, t) == want, || format!("`{r}` σ={s} τ={t}"));
                }
            }
        }
    }
    c.finish()
}

fn projection_decomposition(degrees: &[usize], groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("projection is the unique closest element and splits the distance");
    for (&n, group) in degrees.iter().zip(groups).filter(|(n, _)| **n <= 5) {
        for p in prefixes(n, 2) {
            let r = top(n, &p);
            let members = r.enumerate(1_000_000).unwrap();
            for t in group {
                let proj = r.project(t).unwrap();
                let best = members.iter().map(|s| d(s, t)).min().unwrap();
                let argmin = members.iter().filter(|s| d(s, t) == best).count();
                c.case(d(&proj, t) == best && argmin == 1, || format!("`{r}` τ={t}"));
                for s in members.iter().step_by(2) {
                    c.case(d(s, t) == d(s, &proj) + d(&proj, t), || format!("`{r}` σ={s} τ={t}"));
                }
            }
        }
    }
    c.finish()
}

fn antithetic_relation(degrees: &[usize], groups: &[Vec<Permutation>]) -> CheckOutcome {
    let mut c = Check::new("d(A(σ),τ) = d(σ,τ) + C(n-k,2) - 2 d(σ,Π(τ))");
    for (&n, group) in degrees.iter().zip(groups).filter(|(n, _)| **n <= 5) {
        for p in prefixes(n, 2) {
            let r = top(n, &p);
            let members = r.enumerate(1_000_000).unwrap();
            let ck = binomial2(n - p.len()) as i64;
            for t in group.iter().step_by(2) {
                let proj = r.project(t).unwrap();
                for s in &members {
                    let a = r.antithetic(s).unwrap();
                    let lhs = d(&a, t) as i64;
                    let rhs = d(s, t) as i64 + ck - 2 * d(s, &proj) as i64;
                    c.case(lhs == rhs, || format!("`{r}` σ={s} τ={t}"));
                }
            }
        }
    }
    c.finish()
}

/// Pairs (R, R″) of top-k rankings with R″ extending R's prefix by up to two items.
fn nested_pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for p in prefixes(n, 2) {
        for ext in prefixes(n, 2) {
            if ext.iter().any(|x| p.contains(x)) {
                continue;
            }
            let mut q = p.clone();
            q.extend(&ext);
            out.push((p.clone(), q));
        }
    }
    out
}

fn nested_commutation(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("A_R''(Π_R''(σ)) = Π_R''(A_R(σ)) for nested top-k R'' in R");
    for &n in degrees {
        for (p, q) in nested_pairs(n) {
            let (r, r2) = (top(n, &p), top(n, &q));
            for s in r.enumerate(1_000_000).unwrap() {
                let lhs = r2.antithetic(&r2.project(&s).unwrap()).unwrap();
                let rhs = r2.project(&r.antithetic(&s).unwrap()).unwrap();
                c.case(lhs == rhs, || format!("`{r}` ⊇ `{r2}` σ={s}"));
            }
        }
    }
    c.finish()
}

fn nested_constant_sum(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("d(σ,Π''(σ)) + d(A(σ),Π''(A(σ))) = (α-β)β + C(β,2)");
    for &n in degrees {
        for (p, q) in nested_pairs(n) {
            let (r, r2) = (top(n, &p), top(n, &q));
            let alpha = (n - p.len()) as u64;
            let beta = (q.len() - p.len()) as u64;
            let want = (alpha - beta) * beta + binomial2(beta as usize);
            for s in r.enumerate(1_000_000).unwrap() {
                let a = r.antithetic(&s).unwrap();
                let got = d(&s, &r2.project(&s).unwrap()) + d(&a, &r2.project(&a).unwrap());
                c.case(got == want, || format!("`{r}` ⊇ `{r2}` σ={s}: {got} != {want}"));
            }
        }
    }
    c.finish()
}

fn herding_two_step(degrees: &[usize]) -> CheckOutcome {
    let mut c = Check::new("two-step herding picks the antithetic partner");
    let spec = KernelSpec::mallows(1.0);
    for &n in degrees {
        for k in 0..=2.min(n) {
            let prefix: Vec<usize> = (1..=k).collect();
            let r = top(n, &prefix);
            match herding_pairs(&spec, &r, 1_000_000) {
                Ok(pairs) => {
                    for (first, second) in pairs {
                        let ok = second == r.antithetic(&first).unwrap();
                        c.case(ok, || format!("`{r}` σ₁={first}: picked {second}"));
                    }
                }
                Err(e) => c.case(false, || format!("`{r}`: {e}")),
            }
        }
    }
    c.finish()
}
