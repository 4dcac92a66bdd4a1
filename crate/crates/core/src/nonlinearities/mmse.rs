use crate::distributions::MixtureSpec;
use crate::error::{invalid, Result};
use crate::scalar::{log_gauss, Real};

/// `E{X | Y = y}` for `X ~ N(0, σ_X²)` and independent mixture noise.
///
/// `g(y) = w(y)·y` where `w` is the posterior average of the per-component
/// Wiener gains `c_m = σ_X²/(σ_X² + σ_m²)`. Posterior weights are normalised in
/// the log domain, so Class-A weights spanning hundreds of decades are fine.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMmse<T> {
    source_variance: T,
    noise: MixtureSpec<T>,
    log_weights: Vec<T>,
    /// `σ_X² + σ_m²`.
    output_variances: Vec<T>,
    /// `σ_X²/(σ_X² + σ_m²)`.
    wiener: Vec<T>,
    tail_gain: T,
}

impl<T: Real> MixtureMmse<T> {
    pub fn new(source_variance: T, noise: &MixtureSpec<T>) -> Result<Self> {
        if !(source_variance > T::zero()) || !source_variance.is_finite() {
            return Err(invalid("source_variance", "must be positive and finite"));
        }
        let mut log_weights = Vec::with_capacity(noise.len());
        let mut output_variances = Vec::with_capacity(noise.len());
        let mut wiener = Vec::with_capacity(noise.len());
        for (b, v) in noise.components().filter(|(b, _)| *b > T::zero()) {
            let s = source_variance + v;
            log_weights.push(b.ln());
            output_variances.push(s);
            wiener.push(source_variance / s);
        }
        let widest = output_variances
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, _)| i)
            .expect("mixture has a positive weight");
        Ok(Self {
            source_variance,
            noise: noise.clone(),
            tail_gain: wiener[widest],
            log_weights,
            output_variances,
            wiener,
        })
    }

    pub fn source_variance(&self) -> T {
        self.source_variance
    }

    pub fn noise(&self) -> &MixtureSpec<T> {
        &self.noise
    }

    /// Posterior component probabilities at `y`, or `None` when every term
    /// underflows.
    fn posterior(&self, y: T) -> Option<Vec<T>> {
        let logs: Vec<T> = self
            .log_weights
            .iter()
            .zip(&self.output_variances)
            .map(|(lb, s)| *lb + log_gauss(y, *s))
            .collect();
        let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
        if !top.is_finite() {
            return None;
        }
        let mut p: Vec<T> = logs.iter().map(|l| (*l - top).exp()).collect();
        let total: T = p.iter().copied().sum();
        p.iter_mut().for_each(|x| *x = *x / total);
        Some(p)
    }

    /// `w(y) = g(y)/y`, between the smallest and largest Wiener gain.
    pub fn gain_factor(&self, y: T) -> T {
        match self.posterior(y) {
            Some(p) => p.iter().zip(&self.wiener).map(|(p, c)| *p * *c).sum(),
            None => self.tail_gain,
        }
    }

    pub fn evaluate(&self, y: T) -> T {
        self.gain_factor(y) * y
    }

    /// `g'(y) = w + y·w'` with `w' = y Σ c_m p_m (Σ_k p_k/s_k − 1/s_m)`.
    pub fn derivative(&self, y: T) -> T {
        let Some(p) = self.posterior(y) else {
            return self.tail_gain;
        };
        let mean_precision: T = p
            .iter()
            .zip(&self.output_variances)
            .map(|(p, s)| *p / *s)
            .sum();
        let (w, dw) = p
            .iter()
            .zip(&self.wiener)
            .zip(&self.output_variances)
            .fold((T::zero(), T::zero()), |(w, dw), ((p, c), s)| {
                (
                    w + *p * *c,
                    dw + *c * *p * (mean_precision - T::one() / *s),
                )
            });
        w + y * y * dw
    }
}
