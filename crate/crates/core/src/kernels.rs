//! Positive-definite kernels on permutations.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{binomial2, kendall_unchecked, Distance};
use crate::error::{invalid, Error, Result};
use crate::perm::{check_degrees, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `(n_c − n_d) / C(n, 2)`.
    Kendall,
    /// `exp(−ν n_d)`.
    Mallows,
    /// `(1 + k_τ)^m` with the Kendall kernel `k_τ`.
    Polynomial,
    /// `Trace[Φ(σ) Φ(τ)ᵀ] = n − d_H`.
    Hamming,
    /// `exp(−ν d)` for a chosen base distance.
    ExpSemimetric,
    /// `½[d(σ, σ₀) + d(τ, σ₀) − d(σ, τ)]`.
    DistanceInduced,
}

/// Kernel family plus hyperparameters; serialises to
/// `{family, bandwidth?, degree_m?, base_distance?, center?, scale?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_distance: Option<Distance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl KernelSpec {
    fn bare(family: KernelFamily) -> Self {
        Self {
            family,
            bandwidth: None,
            degree_m: None,
            base_distance: None,
            center: None,
            scale: None,
        }
    }

    pub fn kendall() -> Self {
        Self::bare(KernelFamily::Kendall)
    }

    pub fn mallows(bandwidth: f64) -> Self {
        Self {
            bandwidth: Some(bandwidth),
            ..Self::bare(KernelFamily::Mallows)
        }
    }

    pub fn polynomial(degree_m: u32) -> Self {
        Self {
            degree_m: Some(degree_m),
            ..Self::bare(KernelFamily::Polynomial)
        }
    }

    pub fn hamming() -> Self {
        Self::bare(KernelFamily::Hamming)
    }

    pub fn exp_semimetric(base: Distance, bandwidth: f64) -> Self {
        Self {
            bandwidth: Some(bandwidth),
            base_distance: Some(base),
            ..Self::bare(KernelFamily::ExpSemimetric)
        }
    }

    /// `center = None` means the identity permutation.
    pub fn distance_induced(base: Distance, center: Option<Permutation>) -> Self {
        Self {
            base_distance: Some(base),
            center,
            ..Self::bare(KernelFamily::DistanceInduced)
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or(1.0)
    }

    fn bandwidth_checked(&self) -> Result<f64> {
        match self.bandwidth {
            Some(b) if b > 0.0 && b.is_finite() => Ok(b),
            Some(b) => invalid(format!("bandwidth must be finite and > 0, got {b}")),
            None => invalid(format!("{:?} kernel needs a bandwidth", self.family)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scale();
        if !(s > 0.0) || !s.is_finite() {
            return invalid(format!("scale must be finite and > 0, got {s}"));
        }
        match self.family {
            KernelFamily::Kendall | KernelFamily::Hamming => Ok(()),
            KernelFamily::Mallows => self.bandwidth_checked().map(drop),
            KernelFamily::Polynomial => match self.degree_m {
                Some(m) if m >= 1 => Ok(()),
                _ => invalid("polynomial kernel needs degree_m >= 1"),
            },
            KernelFamily::ExpSemimetric => {
                self.bandwidth_checked()?;
                self.base_distance
                    .ok_or_else(|| Error::InvalidArgument("exp-semimetric kernel needs a base_distance".into()))?
                    .validate()
            }
            KernelFamily::DistanceInduced => {
                let d = self.base_distance.ok_or_else(|| {
                    Error::InvalidArgument("distance-induced kernel needs a base_distance".into())
                })?;
                if !d.is_negative_type() {
                    return invalid(format!(
                        "distance-induced kernel needs a negative-type distance, {} is not",
                        d.name()
                    ));
                }
                Ok(())
            }
        }
    }

    /// Kernel value for one pair of full rankings.
    pub fn eval(&self, sigma: &Permutation, tau: &Permutation) -> Result<f64> {
        check_degrees(sigma, tau)?;
        self.validate()?;
        if let Some(c) = &self.center {
            check_degrees(sigma, c)?;
        }
        Ok(self.eval_unchecked(sigma, tau))
    }

    /// Caller guarantees a validated spec and equal degrees.
    pub(crate) fn eval_unchecked(&self, sigma: &Permutation, tau: &Permutation) -> f64 {
        let n = sigma.degree();
        let raw = match self.family {
            KernelFamily::Kendall => kendall_kernel(sigma, tau),
            KernelFamily::Mallows => {
                (-self.bandwidth.unwrap() * kendall_unchecked(sigma, tau) as f64).exp()
            }
            KernelFamily::Polynomial => {
                (1.0 + kendall_kernel(sigma, tau)).powi(self.degree_m.unwrap() as i32)
            }
            KernelFamily::Hamming => {
                let same = sigma
                    .as_slice()
                    .iter()
                    .zip(tau.as_slice())
                    .filter(|(a, b)| a == b)
                    .count();
                same as f64
            }
            KernelFamily::ExpSemimetric => {
                let d = self.base_distance.unwrap().eval_unchecked(sigma, tau);
                (-self.bandwidth.unwrap() * d).exp()
            }
            KernelFamily::DistanceInduced => {
                let d = self.base_distance.unwrap();
                let identity;
                let c = match &self.center {
                    Some(c) => c,
                    None => {
                        identity = Permutation::identity(n);
                        &identity
                    }
                };
                0.5 * (d.eval_unchecked(sigma, c) + d.eval_unchecked(tau, c)
                    - d.eval_unchecked(sigma, tau))
            }
        };
        raw * self.scale()
    }

    /// `k(σ,σ) + k(τ,τ) − 2k(σ,τ)`, clamped at zero.
    pub fn induced_sq_distance(&self, sigma: &Permutation, tau: &Permutation) -> Result<f64> {
        let kst = self.eval(sigma, tau)?;
        let v = self.eval_unchecked(sigma, sigma) + self.eval_unchecked(tau, tau) - 2.0 * kst;
        Ok(v.max(0.0))
    }

    /// Gram matrix over `items`, computed row-parallel.
    pub fn gram(&self, items: &[Permutation]) -> Result<DMatrix<f64>> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidArgument("gram of an empty list".into()))?;
        for it in items {
            check_degrees(first, it)?;
        }
        self.eval(first, first)?;
        let n = items.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| self.eval_unchecked(&items[i], &items[j])).collect())
            .collect();
        let mut g = DMatrix::zeros(n, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }
}

fn kendall_kernel(sigma: &Permutation, tau: &Permutation) -> f64 {
    let n = sigma.degree();
    if n < 2 {
        return 1.0;
    }
    let c = binomial2(n) as f64;
    (c - 2.0 * kendall_unchecked(sigma, tau) as f64) / c
}

/// Inverse of the lower median of all pairwise distances.
pub fn median_bandwidth(items: &[Permutation], distance: Distance) -> Result<f64> {
    if items.len() < 2 {
        return invalid("median heuristic needs at least two items");
    }
    distance.validate()?;
    let mut d = Vec::with_capacity(items.len() * (items.len() - 1) / 2);
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            d.push(distance.eval(&items[i], &items[j])?);
        }
    }
    d.sort_by(f64::total_cmp);
    let median = d[(d.len() - 1) / 2];
    if median <= 0.0 {
        return Err(Error::DegenerateInput(format!(
            "median pairwise {} distance is zero over {} items",
            distance.name(),
            items.len()
        )));
    }
    Ok(1.0 / median)
}
