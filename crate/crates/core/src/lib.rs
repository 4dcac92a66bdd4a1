//! Linear-regression analysis of memoryless nonlinearities driven by sums of
//! Gaussian and Gaussian-mixture variables.
//!
//! The core is generic over the scalar type through [`Real`]; the aliases at the
//! crate root fix it to `f64`, which is what the CLI and the tests use.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod expectations;
pub mod gains;
pub mod metrics;
pub mod nonlinearities;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Field, Rational, Real};

pub type MixtureSpec = distributions::MixtureSpec<f64>;
pub type ClassAParams = distributions::ClassAParams<f64>;
pub type ScalarDistribution = distributions::ScalarDistribution<f64>;
pub type Nonlinearity = nonlinearities::Nonlinearity<f64>;
pub type BreakpointSet = nonlinearities::BreakpointSet<f64>;
pub type BlankerThreshold = nonlinearities::BlankerThreshold<f64>;
pub type QuadratureSettings = expectations::QuadratureSettings<f64>;
pub type Estimate = expectations::Estimate<f64>;
pub type Scenario = gains::Scenario<f64>;
pub type GainSet = gains::GainSet<f64>;
pub type EmpiricalGains = gains::EmpiricalGains<f64>;
pub type Moments = metrics::Moments<f64>;
pub type MetricSet = metrics::MetricSet<f64>;
pub type MiEstimate = metrics::MiEstimate<f64>;

pub use expectations::McSettings;
pub use metrics::{MiSettings, MiTarget};

/// Single-precision variants.
pub mod f32 {
    pub type MixtureSpec = crate::distributions::MixtureSpec<f32>;
    pub type ScalarDistribution = crate::distributions::ScalarDistribution<f32>;
    pub type Nonlinearity = crate::nonlinearities::Nonlinearity<f32>;
    pub type Scenario = crate::gains::Scenario<f32>;
    pub type GainSet = crate::gains::GainSet<f32>;
    pub type MetricSet = crate::metrics::MetricSet<f32>;
}
