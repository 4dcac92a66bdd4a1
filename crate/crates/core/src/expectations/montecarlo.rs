use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub n_samples: usize,
    pub seed: u64,
    /// Batches used for batch-means standard errors.
    pub n_batches: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 0,
            n_batches: 100,
        }
    }
}

impl McSettings {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            ..Self::default()
        }
    }

    pub fn with_batches(mut self, n_batches: usize) -> Self {
        self.n_batches = n_batches;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_batches < 2 {
            return Err(invalid("n_batches", "need at least two batches"));
        }
        if self.n_samples < self.n_batches {
            return Err(invalid("n_samples", "fewer samples than batches"));
        }
        Ok(())
    }

    /// Size of batch `b`; sizes differ by at most one.
    pub fn batch_len(&self, b: usize) -> usize {
        let base = self.n_samples / self.n_batches;
        base + usize::from(b < self.n_samples % self.n_batches)
    }
}

/// ChaCha8 generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Something that can draw one joint sample.
pub trait Sampler: Sync {
    type Output;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Self::Output;
}

/// Adapts a closure into a [`Sampler`].
pub struct FnSampler<F>(pub F);

impl<O, F> Sampler for FnSampler<F>
where
    F: Fn(&mut ChaCha8Rng) -> O + Sync,
{
    type Output = O;
    fn draw(&self, rng: &mut ChaCha8Rng) -> O {
        (self.0)(rng)
    }
}

/// Per-batch sample means of `K` statistics.
///
/// Batch `b` always uses substream `b` of the seed, so the result is
/// bit-identical for a fixed `(seed, n_samples, n_batches)` regardless of how
/// rayon schedules the batches.
#[derive(Debug, Clone)]
pub struct BatchMeans<T, const K: usize> {
    means: Vec<[T; K]>,
    lens: Vec<usize>,
}

impl<T: Real, const K: usize> BatchMeans<T, K> {
    pub fn run<S, F>(sampler: &S, statistics: F, settings: &McSettings) -> Result<Self>
    where
        S: Sampler,
        F: Fn(&S::Output) -> [T; K] + Sync,
    {
        settings.validate()?;
        let means: Vec<[T; K]> = (0..settings.n_batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(settings.seed, b as u64);
                let len = settings.batch_len(b);
                let mut acc = [T::zero(); K];
                for _ in 0..len {
                    let s = sampler.draw(&mut rng);
                    let v = statistics(&s);
                    for k in 0..K {
                        acc[k] = acc[k] + v[k];
                    }
                }
                let n = T::from_count(len);
                acc.map(|a| a / n)
            })
            .collect();
        let lens = (0..settings.n_batches).map(|b| settings.batch_len(b)).collect();
        Ok(Self { means, lens })
    }

    pub fn n_batches(&self) -> usize {
        self.means.len()
    }

    pub fn n_samples(&self) -> usize {
        self.lens.iter().sum()
    }

    pub fn batch(&self, b: usize) -> &[T; K] {
        &self.means[b]
    }

    /// Pooled means over all samples.
    pub fn pooled(&self) -> [T; K] {
        let total = T::from_count(self.n_samples());
        let mut out = [T::zero(); K];
        for (m, len) in self.means.iter().zip(&self.lens) {
            let w = T::from_count(*len);
            for k in 0..K {
                out[k] = out[k] + m[k] * w;
            }
        }
        out.map(|x| x / total)
    }

    /// `h` of the pooled means, with standard error from the spread of `h`
    /// over batch means (`sd / √B`).
    pub fn estimate_with<H: Fn(&[T; K]) -> T>(&self, h: H) -> Estimate<T> {
        let value = h(&self.pooled());
        let per_batch: Vec<T> = self.means.iter().map(&h).collect();
        let b = T::from_count(per_batch.len());
        let mean = per_batch.iter().copied().sum::<T>() / b;
        let var = per_batch
            .iter()
            .map(|x| (*x - mean) * (*x - mean))
            .sum::<T>()
            / (b - T::one());
        Estimate::new(value, (var / b).sqrt())
    }

    pub fn estimate(&self, k: usize) -> Estimate<T> {
        self.estimate_with(|m| m[k])
    }

    /// Ratio of two pooled means.
    pub fn ratio(&self, num: usize, den: usize) -> Estimate<T> {
        self.estimate_with(|m| m[num] / m[den])
    }
}

/// `E{φ(S)}` by batched sample mean.
pub fn mc_expect<T, S, F>(phi: F, sampler: &S, settings: &McSettings) -> Result<Estimate<T>>
where
    T: Real,
    S: Sampler,
    F: Fn(&S::Output) -> T + Sync,
{
    BatchMeans::<T, 1>::run(sampler, |s| [phi(s)], settings).map(|b| b.estimate(0))
}
