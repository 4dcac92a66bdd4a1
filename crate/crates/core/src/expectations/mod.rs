//! Expectation engines: deterministic quadrature over Gaussian and
//! Gaussian-mixture laws, and seeded batch-means Monte Carlo.

mod montecarlo;
mod quadrature;

pub use montecarlo::{mc_expect, substream, BatchMeans, FnSampler, McSettings, Sampler};
pub use quadrature::{
    gaussian_expect, gaussian_integral, integrate, mixture_expect, Integral, QuadratureSettings,
};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A value with its standard error (zero for deterministic quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, std_error: T) -> Self {
        debug_assert!(!(std_error < T::zero()));
        Self { value, std_error }
    }

    pub fn exact(value: T) -> Self {
        Self {
            value,
            std_error: T::zero(),
        }
    }

    /// `|value - target|` in units of the standard error; infinite when the
    /// error is zero and the values differ.
    pub fn z_score(&self, target: T) -> T {
        let d = (self.value - target).abs();
        if d == T::zero() {
            T::zero()
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, target: T, n_se: T) -> bool {
        (self.value - target).abs() <= n_se * self.std_error
    }
}
