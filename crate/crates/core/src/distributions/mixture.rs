use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Zero-mean Gaussian mixture `Σ β_l G(·; σ_l²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec<T> {
    weights: Vec<T>,
    variances: Vec<T>,
}

impl<T: Real> MixtureSpec<T> {
    /// Weights must be non-negative and sum to one within `1e-12` (or a few
    /// ulps of `T`, whichever is looser); variances must be positive.
    pub fn new(weights: Vec<T>, variances: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weights", "mixture needs at least one component"));
        }
        if weights.len() != variances.len() {
            return Err(invalid(
                "variances",
                format!("{} weights but {} variances", weights.len(), variances.len()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(invalid("weights", format!("weight {w} is not a probability mass")));
        }
        if let Some(v) = variances.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
            return Err(invalid("variances", format!("variance {v} must be positive")));
        }
        let total: T = weights.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::from_count(4 * weights.len()));
        if (total - T::one()).abs() > tol {
            return Err(invalid("weights", format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights, variances })
    }

    /// Single-component mixture, i.e. a plain zero-mean Gaussian.
    pub fn gaussian(variance: T) -> Result<Self> {
        Self::new(vec![T::one()], vec![variance])
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(β_l, σ_l²)` pairs.
    pub fn components(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.weights.iter().copied().zip(self.variances.iter().copied())
    }

    /// `Σ β_l σ_l²`.
    pub fn total_variance(&self) -> T {
        self.components().map(|(w, v)| w * v).sum()
    }

    /// `3 Σ β_l σ_l⁴ / (Σ β_l σ_l²)²`.
    pub fn kurtosis(&self) -> T {
        let m2 = self.total_variance();
        let m4: T = self.components().map(|(w, v)| w * v * v).sum();
        T::lit(3.0) * m4 / (m2 * m2)
    }

    pub fn max_variance(&self) -> T {
        self.variances.iter().copied().fold(T::zero(), T::max)
    }

    /// Same shape, every variance multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(
            self.weights.clone(),
            self.variances.iter().map(|v| *v * factor).collect(),
        )
    }

    /// Same shape rescaled to the requested total variance.
    pub fn with_total_variance(&self, variance: T) -> Result<Self> {
        if !(variance > T::zero()) {
            return Err(invalid("variance", "total variance must be positive"));
        }
        self.scaled(variance / self.total_variance())
    }

    /// Convolution with an independent zero-mean Gaussian of variance `extra`.
    pub fn convolve_gaussian(&self, extra: T) -> Result<Self> {
        Self::new(
            self.weights.clone(),
            self.variances.iter().map(|v| *v + extra).collect(),
        )
    }

    pub fn pdf(&self, x: T) -> T {
        self.components()
            .map(|(w, v)| w * crate::scalar::gauss(x, v))
            .sum()
    }
}

/// Middleton class-A parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAParams<T> {
    /// Impulsive index `A`.
    pub impulsive_index: T,
    /// Gaussian-to-impulsive power ratio `Γ`.
    pub gamma: T,
    pub total_variance: T,
    /// Poisson mass allowed to fall outside the truncated expansion.
    pub mass_tolerance: T,
}

impl<T: Real> ClassAParams<T> {
    pub const MAX_COMPONENTS: usize = 10_000;

    pub fn new(impulsive_index: T, gamma: T, total_variance: T) -> Self {
        Self {
            impulsive_index,
            gamma,
            total_variance,
            mass_tolerance: T::lit(1e-12),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("{x} must be positive and finite")))
            }
        };
        positive("A", self.impulsive_index)?;
        positive("gamma", self.gamma)?;
        positive("variance", self.total_variance)?;
        if !(self.mass_tolerance > T::zero() && self.mass_tolerance < T::one()) {
            return Err(invalid("mass_tolerance", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Unnormalised Poisson weight `e^{-A} A^l / l!`.
    pub fn poisson_weight(&self, l: usize) -> T {
        let a = self.impulsive_index;
        let mut log_fact = T::zero();
        for k in 2..=l {
            log_fact = log_fact + T::from_count(k).ln();
        }
        (-a + T::from_count(l) * a.ln() - log_fact).exp()
    }

    /// Variance of component `l`: `(l/A + Γ)/(1 + Γ) σ²`.
    pub fn component_variance(&self, l: usize) -> T {
        (T::from_count(l) / self.impulsive_index + self.gamma) / (T::one() + self.gamma)
            * self.total_variance
    }
}

/// Truncated class-A expansion.
///
/// Components are added until the Poisson tail beyond the last one is below
/// `mass_tolerance`. Weights are then renormalised and the variances rescaled
/// so that the mixture's total variance is exactly `total_variance`.
pub fn class_a_mixture<T: Real>(params: &ClassAParams<T>) -> Result<MixtureSpec<T>> {
    params.validate()?;
    let a = params.impulsive_index;
    let mut weights = Vec::new();
    let mut variances = Vec::new();
    // log β_l, updated incrementally
    let mut log_w = -a;
    for l in 0..ClassAParams::<T>::MAX_COMPONENTS {
        if l > 0 {
            log_w = log_w + a.ln() - T::from_count(l).ln();
        }
        weights.push(log_w.exp());
        variances.push(params.component_variance(l));

        // Tail Σ_{k>l} β_k ≤ β_{l+1} / (1 - A/(l+2)) once l + 2 > A.
        let ratio = a / T::from_count(l + 2);
        if ratio < T::one() {
            let next = (log_w + a.ln() - T::from_count(l + 1).ln()).exp();
            let tail = next / (T::one() - ratio);
            if tail <= params.mass_tolerance {
                return renormalise(weights, variances, params.total_variance);
            }
        }
    }
    Err(Error::TruncationNotConverged {
        tolerance: params.mass_tolerance.as_f64(),
        max_components: ClassAParams::<T>::MAX_COMPONENTS,
    })
}

fn renormalise<T: Real>(mut weights: Vec<T>, mut variances: Vec<T>, target: T) -> Result<MixtureSpec<T>> {
    let mass: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w = *w / mass);
    let total: T = weights.iter().zip(&variances).map(|(w, v)| *w * *v).sum();
    let scale = target / total;
    variances.iter_mut().for_each(|v| *v = *v * scale);
    MixtureSpec::new(weights, variances)
}
