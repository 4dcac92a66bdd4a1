use rayon::prelude::*;

use super::ScalarDistribution;
use crate::expectations::substream;
use crate::scalar::Real;

/// Samples per independent substream.
pub const SAMPLE_BLOCK: usize = 1 << 14;

/// Draws `n` variates. Output depends only on `(seed, n)`: block `b` of
/// [`SAMPLE_BLOCK`] samples comes from ChaCha8 stream `b`, whichever worker
/// happens to run it.
pub fn sample<T: Real>(dist: &ScalarDistribution<T>, n: usize, seed: u64) -> Vec<T> {
    sample_with_block_size(dist, n, seed, SAMPLE_BLOCK)
}

pub fn sample_with_block_size<T: Real>(
    dist: &ScalarDistribution<T>,
    n: usize,
    seed: u64,
    block: usize,
) -> Vec<T> {
    assert!(block > 0, "block size must be positive");
    let mut out = vec![T::zero(); n];
    out.par_chunks_mut(block)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = substream(seed, b as u64);
            for slot in chunk {
                *slot = dist.sample_one(&mut rng);
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{ClassAParams, MixtureSpec};

    fn moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        (mean, m2, m4)
    }

    #[test]
    fn gaussian_variance_within_five_standard_errors() {
        let d = ScalarDistribution::gaussian(10.0).unwrap();
        let xs = sample(&d, 1_000_000, 3);
        let (_, m2, m4) = moments(&xs);
        let se = ((m4 - m2 * m2) / xs.len() as f64).sqrt();
        assert!((m2 - 10.0).abs() < 5.0 * se, "var {m2}, se {se}");
    }

    #[test]
    fn every_family_has_requested_variance() {
        let laws = [
            ScalarDistribution::laplace(2.0).unwrap(),
            ScalarDistribution::uniform(0.5).unwrap(),
            ScalarDistribution::triangular(3.0).unwrap(),
            ScalarDistribution::mixture(MixtureSpec::new(vec![0.9, 0.1], vec![0.5, 5.5]).unwrap()),
        ];
        for (i, d) in laws.iter().enumerate() {
            let xs = sample(d, 1_000_000, 11 + i as u64);
            let (mean, m2, m4) = moments(&xs);
            let se = ((m4 - m2 * m2) / xs.len() as f64).sqrt();
            assert!((m2 - d.variance()).abs() < 5.0 * se, "{d:?}: {m2} ± {se}");
            assert!(mean.abs() < 5.0 * (m2 / xs.len() as f64).sqrt());
        }
    }

    #[test]
    fn class_a_is_impulsive() {
        let d = ScalarDistribution::class_a(&ClassAParams::new(0.01, 0.01, 1.0)).unwrap();
        let xs = sample(&d, 1_000_000, 5);
        let (_, m2, m4) = moments(&xs);
        let empirical = m4 / (m2 * m2);
        let formula = match &d {
            ScalarDistribution::Mixture(m) => m.kurtosis(),
            _ => unreachable!(),
        };
        // 3 Σβσ⁴ / (Σβσ²)² ≈ 2.9e2 for these parameters
        assert!(formula > 250.0 && formula < 350.0, "formula {formula}");
        assert!(empirical > 100.0, "empirical kurtosis {empirical}");
        assert!((empirical / formula - 1.0).abs() < 0.5);
    }

    #[test]
    fn same_seed_same_vector() {
        let d = ScalarDistribution::laplace(1.0).unwrap();
        assert_eq!(sample(&d, 50_000, 9), sample(&d, 50_000, 9));
        assert_ne!(sample(&d, 1000, 9), sample(&d, 1000, 10));
    }

    #[test]
    fn prefix_stable_across_lengths() {
        let d = ScalarDistribution::gaussian(1.0f64).unwrap();
        let long = sample(&d, 3 * SAMPLE_BLOCK, 1);
        let short = sample(&d, SAMPLE_BLOCK + 7, 1);
        assert_eq!(&long[..short.len()], &short[..]);
    }

    #[test]
    fn independent_of_thread_count() {
        let d = ScalarDistribution::gaussian(1.0f64).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample(&d, 100_000, 4));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sample(&d, 100_000, 4));
        assert_eq!(one, many);
    }
}
