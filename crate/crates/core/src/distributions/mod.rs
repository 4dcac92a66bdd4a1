//! Zero-mean scalar laws: Gaussian, Gaussian mixtures (including the
//! Middleton class-A expansion), Laplace, uniform and triangular.
//!
//! Characteristic functions use the convention `C(u) = E{exp(j 2π X u)}`,
//! with `u` in cycles per unit of `X`.

mod mixture;
mod sampling;

pub use mixture::{class_a_mixture, ClassAParams, MixtureSpec};
pub use sampling::{sample, sample_with_block_size, SAMPLE_BLOCK};

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nonlinearities::BreakpointSet;
use crate::scalar::{gauss, Real};

/// Zero-mean scalar distribution, parameterised by its variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarDistribution<T> {
    Gaussian { variance: T },
    Mixture(MixtureSpec<T>),
    /// `f(x) = (λ/2) e^{-λ|x|}` with `λ = √2/σ`.
    Laplace { variance: T },
    /// Uniform on `[-√3σ, √3σ]`.
    Uniform { variance: T },
    /// Self-convolution of two uniforms of variance `σ²/2`, supported on
    /// `[-√6σ, √6σ]`.
    Triangular { variance: T },
}

impl<T: Real> ScalarDistribution<T> {
    pub fn gaussian(variance: T) -> Result<Self> {
        check_variance(variance).map(|variance| Self::Gaussian { variance })
    }

    pub fn laplace(variance: T) -> Result<Self> {
        check_variance(variance).map(|variance| Self::Laplace { variance })
    }

    pub fn uniform(variance: T) -> Result<Self> {
        check_variance(variance).map(|variance| Self::Uniform { variance })
    }

    pub fn triangular(variance: T) -> Result<Self> {
        check_variance(variance).map(|variance| Self::Triangular { variance })
    }

    pub fn mixture(spec: MixtureSpec<T>) -> Self {
        Self::Mixture(spec)
    }

    pub fn class_a(params: &ClassAParams<T>) -> Result<Self> {
        class_a_mixture(params).map(Self::Mixture)
    }

    pub fn variance(&self) -> T {
        match self {
            Self::Gaussian { variance }
            | Self::Laplace { variance }
            | Self::Uniform { variance }
            | Self::Triangular { variance } => *variance,
            Self::Mixture(m) => m.total_variance(),
        }
    }

    pub fn std_dev(&self) -> T {
        self.variance().sqrt()
    }

    /// Same family rescaled to the given variance.
    pub fn with_variance(&self, variance: T) -> Result<Self> {
        let variance = check_variance(variance)?;
        Ok(match self {
            Self::Gaussian { .. } => Self::Gaussian { variance },
            Self::Laplace { .. } => Self::Laplace { variance },
            Self::Uniform { .. } => Self::Uniform { variance },
            Self::Triangular { .. } => Self::Triangular { variance },
            Self::Mixture(m) => Self::Mixture(m.with_total_variance(variance)?),
        })
    }

    pub fn is_gaussian(&self) -> bool {
        match self {
            Self::Gaussian { .. } => true,
            Self::Mixture(m) => m.len() == 1,
            _ => false,
        }
    }

    /// View as a Gaussian mixture when the law is one.
    pub fn as_mixture(&self) -> Option<MixtureSpec<T>> {
        match self {
            Self::Gaussian { variance } => MixtureSpec::gaussian(*variance).ok(),
            Self::Mixture(m) => Some(m.clone()),
            _ => None,
        }
    }

    pub fn pdf(&self, x: T) -> T {
        match self {
            Self::Gaussian { variance } => gauss(x, *variance),
            Self::Mixture(m) => m.pdf(x),
            Self::Laplace { variance } => {
                let lambda = T::SQRT_2() / variance.sqrt();
                T::lit(0.5) * lambda * (-lambda * x.abs()).exp()
            }
            Self::Uniform { variance } => {
                let half_width = uniform_half_width(*variance);
                if x.abs() <= half_width {
                    T::one() / (half_width + half_width)
                } else {
                    T::zero()
                }
            }
            Self::Triangular { variance } => {
                let reach = triangular_half_width(*variance);
                let d = x.abs();
                if d < reach {
                    (reach - d) / (reach * reach)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Points where the density is not smooth, for panelled quadrature.
    pub fn breakpoints(&self) -> BreakpointSet<T> {
        let pts = match self {
            Self::Gaussian { .. } | Self::Mixture(_) => vec![],
            Self::Laplace { .. } => vec![T::zero()],
            Self::Uniform { variance } => {
                let h = uniform_half_width(*variance);
                vec![-h, h]
            }
            Self::Triangular { variance } => {
                let h = triangular_half_width(*variance);
                vec![-h, T::zero(), h]
            }
        };
        BreakpointSet::new(pts).expect("sorted by construction")
    }

    /// Half-width of an interval that holds all but a negligible fraction of
    /// the mass (`multiple` standard deviations for unbounded laws).
    pub fn support_half_width(&self, multiple: T) -> T {
        match self {
            Self::Uniform { variance } => uniform_half_width(*variance),
            Self::Triangular { variance } => triangular_half_width(*variance),
            Self::Laplace { variance } => {
                // the exponential tail needs a wider window than a Gaussian
                variance.sqrt() * multiple * T::lit(4.0)
            }
            Self::Mixture(m) => m.max_variance().sqrt() * multiple,
            Self::Gaussian { variance } => variance.sqrt() * multiple,
        }
    }

    /// `E{exp(j2πXu)}`; real for every law here since all are symmetric.
    pub fn char_function(&self, u: T) -> Complex<T> {
        let two_pi_u = T::TAU() * u;
        let re = match self {
            Self::Gaussian { variance } => (-T::lit(0.5) * *variance * two_pi_u * two_pi_u).exp(),
            Self::Mixture(m) => m
                .components()
                .map(|(w, v)| w * (-T::lit(0.5) * v * two_pi_u * two_pi_u).exp())
                .sum(),
            Self::Laplace { variance } => {
                // b = σ/√2, C = 1/(1 + (2πbu)²)
                T::one() / (T::one() + T::lit(0.5) * *variance * two_pi_u * two_pi_u)
            }
            Self::Uniform { variance } => sinc(two_pi_u * uniform_half_width(*variance)),
            Self::Triangular { variance } => {
                let s = sinc(two_pi_u * uniform_half_width(*variance / T::lit(2.0)));
                s * s
            }
        };
        Complex::new(re, T::zero())
    }

    pub fn char_function_grid(&self, grid: &[T]) -> Vec<Complex<T>> {
        grid.iter().map(|u| self.char_function(*u)).collect()
    }

    /// One variate.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            Self::Gaussian { variance } => T::standard_normal(rng) * variance.sqrt(),
            Self::Mixture(m) => {
                let u = T::standard_uniform(rng);
                let mut acc = T::zero();
                let mut variance = *m.variances().last().expect("non-empty mixture");
                for (w, v) in m.components() {
                    acc = acc + w;
                    if u < acc {
                        variance = v;
                        break;
                    }
                }
                T::standard_normal(rng) * variance.sqrt()
            }
            Self::Laplace { variance } => {
                // inverse CDF on a symmetric uniform
                let u = T::standard_uniform(rng) - T::lit(0.5);
                let b = variance.sqrt() / T::SQRT_2();
                let mag = -(T::one() - (u.abs() + u.abs())).max(T::min_positive_value()).ln();
                b * mag * u.signum()
            }
            Self::Uniform { variance } => {
                let h = uniform_half_width(*variance);
                (T::standard_uniform(rng) * T::lit(2.0) - T::one()) * h
            }
            Self::Triangular { variance } => {
                let h = uniform_half_width(*variance / T::lit(2.0));
                let a = T::standard_uniform(rng) * T::lit(2.0) - T::one();
                let b = T::standard_uniform(rng) * T::lit(2.0) - T::one();
                (a + b) * h
            }
        }
    }
}

fn check_variance<T: Real>(variance: T) -> Result<T> {
    if variance > T::zero() && variance.is_finite() {
        Ok(variance)
    } else {
        Err(invalid("variance", format!("{variance} must be positive and finite")))
    }
}

fn uniform_half_width<T: Real>(variance: T) -> T {
    (T::lit(3.0) * variance).sqrt()
}

fn triangular_half_width<T: Real>(variance: T) -> T {
    (T::lit(6.0) * variance).sqrt()
}

fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::{integrate, QuadratureSettings};

    fn catalog() -> Vec<ScalarDistribution<f64>> {
        vec![
            ScalarDistribution::gaussian(2.0).unwrap(),
            ScalarDistribution::mixture(MixtureSpec::new(vec![0.7, 0.3], vec![0.5, 4.0]).unwrap()),
            ScalarDistribution::class_a(&ClassAParams::new(0.1, 0.1, 1.5)).unwrap(),
            ScalarDistribution::laplace(1.7).unwrap(),
            ScalarDistribution::uniform(0.8).unwrap(),
            ScalarDistribution::triangular(3.0).unwrap(),
        ]
    }

    #[test]
    fn gaussian_peak() {
        let d = ScalarDistribution::gaussian(1.0).unwrap();
        assert!((d.pdf(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_component_mixture_is_gaussian() {
        let m = ScalarDistribution::mixture(MixtureSpec::new(vec![1.0f64], vec![4.0]).unwrap());
        let g = ScalarDistribution::gaussian(4.0).unwrap();
        for x in [0.0, 0.3, -2.5, 7.0] {
            assert!((m.pdf(x) - g.pdf(x)).abs() < 1e-16);
        }
        assert!(m.is_gaussian());
    }

    #[test]
    fn unit_mass_and_variance_by_quadrature() {
        let settings = QuadratureSettings::default();
        for d in catalog() {
            let half = d.support_half_width(12.0);
            let bps = d.breakpoints();
            let mass = integrate(|x| d.pdf(x), -half, half, &bps, &settings).unwrap();
            let second = integrate(|x| x * x * d.pdf(x), -half, half, &bps, &settings).unwrap();
            assert!((mass.value - 1.0).abs() < 1e-8, "{d:?}: mass {}", mass.value);
            assert!(
                (second.value - d.variance()).abs() < 1e-6,
                "{d:?}: second moment {}",
                second.value
            );
        }
    }

    #[test]
    fn triangular_is_uniform_self_convolution() {
        // midpoint-rule convolution of U(σ²/2) with itself
        let variance = 1.0;
        let tri = ScalarDistribution::triangular(variance).unwrap();
        let uni = ScalarDistribution::uniform(variance / 2.0).unwrap();
        let h = uniform_half_width(variance / 2.0);
        let n = 2_000_000;
        let step = 2.0 * h / n as f64;
        for x in [0.0, 0.25, -0.9, 1.7, 2.3, 2.6] {
            let conv: f64 = (0..n)
                .map(|i| {
                    let t = -h + (i as f64 + 0.5) * step;
                    uni.pdf(t) * uni.pdf(x - t)
                })
                .sum::<f64>()
                * step;
            assert!((conv - tri.pdf(x)).abs() < 1e-6, "x={x}: {conv} vs {}", tri.pdf(x));
        }
    }

    #[test]
    fn char_function_closed_forms() {
        let sigma2: f64 = 2.5;
        let g = ScalarDistribution::gaussian(sigma2).unwrap();
        for u in [0.0, 0.05, -0.2, 0.7] {
            let expected = (-2.0 * (std::f64::consts::PI * sigma2.sqrt() * u).powi(2)).exp();
            assert!((g.char_function(u).re - expected).abs() < 1e-15);
        }
        let m = MixtureSpec::new(vec![0.6, 0.4], vec![0.3, 5.0]).unwrap();
        let d = ScalarDistribution::mixture(m.clone());
        let u = 0.13;
        let expected: f64 = m
            .components()
            .map(|(w, v)| w * (-2.0 * (std::f64::consts::PI * u).powi(2) * v).exp())
            .sum();
        assert!((d.char_function(u).re - expected).abs() < 1e-15);
    }

    #[test]
    fn char_function_matches_numerical_transform() {
        let settings = QuadratureSettings::default();
        for d in catalog() {
            let half = d.support_half_width(12.0);
            let bps = d.breakpoints();
            for u in [0.0, 0.1, 0.35] {
                let re = integrate(
                    |x| (std::f64::consts::TAU * x * u).cos() * d.pdf(x),
                    -half,
                    half,
                    &bps,
                    &settings,
                )
                .unwrap()
                .value;
                assert!((d.char_function(u).re - re).abs() < 1e-7, "{d:?} u={u}");
            }
        }
    }

    #[test]
    fn triangular_char_function_is_uniform_squared() {
        let sigma2 = 1.3;
        let tri = ScalarDistribution::triangular(sigma2).unwrap();
        let uni = ScalarDistribution::uniform(sigma2 / 2.0).unwrap();
        for i in -64..=64 {
            let u = i as f64 / 40.0;
            let cu = uni.char_function(u);
            assert!((tri.char_function(u) - cu * cu).norm() < 1e-14);
        }
    }

    #[test]
    fn char_function_bounds() {
        for d in catalog() {
            assert_eq!(d.char_function(0.0).re, 1.0);
            for i in 0..200 {
                let u = i as f64 * 0.037 - 3.0;
                assert!(d.char_function(u).norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn with_variance_keeps_family() {
        for d in catalog() {
            let e = d.with_variance(7.0).unwrap();
            assert!((e.variance() - 7.0).abs() < 1e-12);
            assert_eq!(std::mem::discriminant(&d), std::mem::discriminant(&e));
        }
        assert!(catalog()[0].with_variance(-1.0).is_err());
    }
}
