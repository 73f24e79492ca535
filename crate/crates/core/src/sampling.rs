//! Synthetic ranking populations: Mallows models under Kendall and Hamming,
//! their mixtures, and top-k censoring.
//!
//! A Mallows model has `p(σ) ∝ exp(−θ·d(σ, σ₀))`. The Kendall case is
//! sampled exactly for any `n` by repeated insertion; the Hamming case by
//! categorical sampling over the enumerated group, so it is limited to
//! `n ≤ ENUMERATION_MAX_DEGREE`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{hamming_distance, kendall_distance};
use crate::error::{invalid, Error, Result};
use crate::partial::PartialRanking;
use crate::perm::{all_permutations, Permutation};

/// Largest degree for which `S_n` is enumerated for exact sampling.
pub const ENUMERATION_MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MallowsDistance {
    Kendall,
    Hamming,
}

impl MallowsDistance {
    fn eval(self, a: &Permutation, b: &Permutation) -> u64 {
        match self {
            MallowsDistance::Kendall => kendall_distance(a, b).expect("same degree"),
            MallowsDistance::Hamming => hamming_distance(a, b).expect("same degree") as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MallowsModel {
    pub center: Permutation,
    /// Concentration `θ`; `0` is the uniform distribution.
    pub lengthscale: f64,
    pub distance: MallowsDistance,
}

impl MallowsModel {
    pub fn new(center: Permutation, lengthscale: f64, distance: MallowsDistance) -> Result<Self> {
        let m = Self {
            center,
            lengthscale,
            distance,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn degree(&self) -> usize {
        self.center.degree()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale >= 0.0) || !self.lengthscale.is_finite() {
            return invalid(format!(
                "Mallows lengthscale must be finite and >= 0, got {}",
                self.lengthscale
            ));
        }
        Ok(())
    }

    /// Exact probabilities over `S_n` in lexicographic order.
    pub fn probability_table(&self) -> Result<Vec<(Permutation, f64)>> {
        self.validate()?;
        let n = self.degree();
        if n > ENUMERATION_MAX_DEGREE {
            return Err(Error::UnsupportedScale(format!(
                "exact Mallows table needs n <= {ENUMERATION_MAX_DEGREE}, got {n}"
            )));
        }
        let perms = all_permutations(n);
        let weights: Vec<f64> = perms
            .iter()
            .map(|s| (-self.lengthscale * self.distance.eval(s, &self.center) as f64).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        Ok(perms.into_iter().zip(weights.into_iter().map(|w| w / z)).collect())
    }
}

/// Sampler prepared once per model.
enum Sampler<'a> {
    Insertion(&'a MallowsModel),
    Table(Vec<Permutation>, WeightedIndex<f64>),
}

impl<'a> Sampler<'a> {
    fn new(model: &'a MallowsModel) -> Result<Self> {
        model.validate()?;
        match model.distance {
            MallowsDistance::Kendall => Ok(Sampler::Insertion(model)),
            MallowsDistance::Hamming => Self::table(model),
        }
    }

    fn table(model: &'a MallowsModel) -> Result<Self> {
        let (perms, probs): (Vec<_>, Vec<_>) = model.probability_table()?.into_iter().unzip();
        let index = WeightedIndex::new(&probs)
            .map_err(|e| Error::InvalidArgument(format!("Mallows weights: {e}")))?;
        Ok(Sampler::Table(perms, index))
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        match self {
            Sampler::Insertion(m) => repeated_insertion(&m.center, m.lengthscale, rng),
            Sampler::Table(perms, index) => perms[index.sample(rng)].clone(),
        }
    }
}

/// Kendall–Mallows draw: the `i`-th item of `σ₀` goes to slot `j ∈ 1..=i`
/// with probability `∝ exp(−θ(i − j))`, creating `i − j` discordant pairs.
fn repeated_insertion<R: Rng + ?Sized>(center: &Permutation, theta: f64, rng: &mut R) -> Permutation {
    let n = center.degree();
    let q = (-theta).exp();
    let mut weights = Vec::with_capacity(n);
    let mut out: Vec<usize> = Vec::with_capacity(n);
    for (idx, &item) in center.as_slice().iter().enumerate() {
        let i = idx + 1;
        // weights[s] for displacement s = i − j, s = 0..i−1
        weights.clear();
        let mut w = 1.0;
        for _ in 0..i {
            weights.push(w);
            w *= q;
        }
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut s = i - 1;
        for (k, &wk) in weights.iter().enumerate() {
            if u < wk {
                s = k;
                break;
            }
            u -= wk;
        }
        out.insert(i - 1 - s, item);
    }
    Permutation::from_vec_unchecked(out)
}

/// `count` independent draws from the Mallows model.
pub fn sample_mallows<R: Rng + ?Sized>(
    model: &MallowsModel,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Permutation>> {
    let sampler = Sampler::new(model)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}

/// Draws by categorical sampling over the enumerated group, for either distance.
pub fn sample_mallows_enumerated<R: Rng + ?Sized>(
    model: &MallowsModel,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Permutation>> {
    let sampler = Sampler::table(model)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub components: Vec<(f64, MallowsModel)>,
}

impl MixtureModel {
    pub fn new(components: Vec<(f64, MallowsModel)>) -> Result<Self> {
        let m = Self { components };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::InvalidArgument("mixture has no components".into()))?;
        let n = first.1.degree();
        let mut total = 0.0;
        for (w, m) in &self.components {
            if !(*w > 0.0) || !w.is_finite() {
                return invalid(format!("mixture weight {w} must be positive"));
            }
            if m.degree() != n {
                return Err(Error::DegreeMismatch {
                    left: n,
                    right: m.degree(),
                });
            }
            m.validate()?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("mixture weights sum to {total}, not 1"));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.components[0].1.degree()
    }

    /// Equal mixture of a Kendall–Mallows component centred at the identity
    /// and a Hamming–Mallows component centred at its reversal, both with
    /// lengthscale `theta`.
    pub fn reference(degree: usize, theta: f64) -> Result<Self> {
        if degree == 0 {
            return invalid("degree must be >= 1");
        }
        Self::new(vec![
            (
                0.5,
                MallowsModel::new(Permutation::identity(degree), theta, MallowsDistance::Kendall)?,
            ),
            (
                0.5,
                MallowsModel::new(
                    Permutation::reverse_identity(degree),
                    theta,
                    MallowsDistance::Hamming,
                )?,
            ),
        ])
    }
}

/// `count` draws: a component is chosen by weight, then sampled.
pub fn sample_mixture<R: Rng + ?Sized>(
    model: &MixtureModel,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Permutation>> {
    Ok(sample_mixture_labelled(model, count, rng)?
        .into_iter()
        .map(|(s, _)| s)
        .collect())
}

/// Like [`sample_mixture`], also returning the index of the component of each draw.
pub fn sample_mixture_labelled<R: Rng + ?Sized>(
    model: &MixtureModel,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(Permutation, usize)>> {
    model.validate()?;
    let samplers = model
        .components
        .iter()
        .map(|(_, m)| Sampler::new(m))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = model.components.iter().map(|(w, _)| *w).collect();
    let pick = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("mixture weights: {e}")))?;
    Ok((0..count)
        .map(|_| {
            let c = pick.sample(rng);
            (samplers[c].draw(rng), c)
        })
        .collect())
}

/// The top-k ranking `σ(1) ≻ … ≻ σ(k) ≻ rest`.
pub fn censor_topk(sigma: &Permutation, k: usize) -> Result<PartialRanking> {
    let n = sigma.degree();
    if k == 0 || k > n {
        return invalid(format!("k must be in 1..={n}, got {k}"));
    }
    PartialRanking::top_k(n, &sigma.as_slice()[..k])
}
