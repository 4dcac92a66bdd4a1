//! Scalar abstractions.
//!
//! Everything numerical in this crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. The handful of purely algebraic checks
//! (the capacity-bound ordering) are written against [`Field`], which is also
//! implemented by exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Floating point scalar used by distributions, quadrature and Monte Carlo.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform variate on `[0, 1)`.
    fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal; panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
}

/// Ordered field: enough structure for rational inequalities.
pub trait Field: Num + Clone + PartialOrd + Debug {
    /// Lifts an `f64` without rounding when the type is exact.
    fn from_f64_exact(x: f64) -> Option<Self>;
}

impl Field for f64 {
    fn from_f64_exact(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl Field for f32 {
    fn from_f64_exact(x: f64) -> Option<Self> {
        let y = x as f32;
        (y.is_finite() && y as f64 == x).then_some(y)
    }
}

impl Field for BigRational {
    fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
}

/// Exact rational with arbitrary precision.
pub type Rational = BigRational;

/// Builds a rational from a numerator/denominator pair.
pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Decibels to a power ratio.
pub fn db_to_ratio<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Power ratio to decibels.
pub fn ratio_to_db<T: Real>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

/// Natural-log information to bits.
pub fn nats_to_bits<T: Real>(nats: T) -> T {
    nats / T::LN_2()
}

/// Natural log of the zero-mean Gaussian density with the given variance.
#[inline]
pub(crate) fn log_gauss<T: Real>(x: T, variance: T) -> T {
    let half = T::lit(0.5);
    -half * (T::TAU() * variance).ln() - half * x * x / variance
}

#[inline]
pub(crate) fn gauss<T: Real>(x: T, variance: T) -> T {
    log_gauss(x, variance).exp()
}
