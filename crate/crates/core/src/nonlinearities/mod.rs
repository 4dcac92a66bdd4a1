//! Memoryless nonlinearities `g(·)`.

mod blanker;
mod mmse;

pub use blanker::{blanker_mse, optimal_blanker_threshold, BlankerThreshold};
pub use mmse::MixtureMmse;

use std::fmt;

use crate::distributions::MixtureSpec;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Strictly increasing, finite abscissae where `g` or `g'` is discontinuous.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BreakpointSet<T>(Vec<T>);

impl<T: Real> BreakpointSet<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("breakpoints", "must be finite"));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints", "must be strictly increasing"));
        }
        Ok(Self(points))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn points(&self) -> &[T] {
        &self.0
    }

    /// Union of two sets.
    pub fn merge(&self, other: &Self) -> Self {
        let mut all: Vec<T> = self.0.iter().chain(&other.0).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        all.dedup();
        Self(all)
    }

    /// Every point multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|p| *p * factor).collect())
    }
}

/// Piecewise-linear `g` through user-supplied knots. Outside the knot hull the
/// end values are held and the evaluation is flagged as clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T> {
    knots: BreakpointSet<T>,
    values: Vec<T>,
}

impl<T: Real> Tabulated<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("breakpoints", "need at least two knots"));
        }
        if knots.len() != values.len() {
            return Err(invalid("values", "one value per knot"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "must be finite"));
        }
        Ok(Self {
            knots: BreakpointSet::new(knots)?,
            values,
        })
    }

    pub fn knots(&self) -> &BreakpointSet<T> {
        &self.knots
    }

    /// `(g(y), clamped)`.
    pub fn evaluate_flagged(&self, y: T) -> (T, bool) {
        let xs = self.knots.points();
        let n = xs.len();
        if y < xs[0] {
            return (self.values[0], true);
        }
        if y > xs[n - 1] {
            return (self.values[n - 1], true);
        }
        let i = segment(xs, y);
        let t = (y - xs[i]) / (xs[i + 1] - xs[i]);
        (self.values[i] + t * (self.values[i + 1] - self.values[i]), false)
    }

    fn slope(&self, y: T) -> T {
        let xs = self.knots.points();
        if y < xs[0] || y > xs[xs.len() - 1] {
            return T::zero();
        }
        let i = segment(xs, y);
        (self.values[i + 1] - self.values[i]) / (xs[i + 1] - xs[i])
    }
}

fn segment<T: Real>(xs: &[T], y: T) -> usize {
    let i = xs.partition_point(|x| *x <= y);
    i.clamp(1, xs.len() - 1) - 1
}

/// The catalog of nonlinearities.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity<T> {
    Identity,
    Scale(T),
    /// `y` inside `±y_th`, `y_th·sign(y)` outside.
    SoftLimiter { threshold: T },
    /// `y` inside `±y_th`, `0` outside.
    Blanker { threshold: T },
    MixtureMmse(MixtureMmse<T>),
    Tabulated(Tabulated<T>),
}

impl<T: Real> Nonlinearity<T> {
    pub fn soft_limiter(threshold: T) -> Result<Self> {
        check_threshold(threshold).map(|threshold| Self::SoftLimiter { threshold })
    }

    pub fn blanker(threshold: T) -> Result<Self> {
        check_threshold(threshold).map(|threshold| Self::Blanker { threshold })
    }

    pub fn scale(a: T) -> Result<Self> {
        if a.is_finite() {
            Ok(Self::Scale(a))
        } else {
            Err(invalid("a", "scale must be finite"))
        }
    }

    /// Conditional-mean estimator of a `N(0, σ_X²)` source in mixture noise.
    pub fn mixture_mmse(source_variance: T, noise: &MixtureSpec<T>) -> Result<Self> {
        MixtureMmse::new(source_variance, noise).map(Self::MixtureMmse)
    }

    pub fn tabulated(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        Tabulated::new(knots, values).map(Self::Tabulated)
    }

    pub fn evaluate(&self, y: T) -> T {
        match self {
            Self::Identity => y,
            Self::Scale(a) => *a * y,
            Self::SoftLimiter { threshold } => y.max(-*threshold).min(*threshold),
            Self::Blanker { threshold } => {
                if y.abs() < *threshold {
                    y
                } else {
                    T::zero()
                }
            }
            Self::MixtureMmse(m) => m.evaluate(y),
            Self::Tabulated(t) => t.evaluate_flagged(y).0,
        }
    }

    /// Value plus a flag set when a tabulated `g` was clamped.
    pub fn evaluate_flagged(&self, y: T) -> (T, bool) {
        match self {
            Self::Tabulated(t) => t.evaluate_flagged(y),
            _ => (self.evaluate(y), false),
        }
    }

    /// `g'(y)` away from breakpoints.
    pub fn derivative(&self, y: T) -> T {
        match self {
            Self::Identity => T::one(),
            Self::Scale(a) => *a,
            Self::SoftLimiter { threshold } | Self::Blanker { threshold } => {
                if y.abs() < *threshold {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::MixtureMmse(m) => m.derivative(y),
            Self::Tabulated(t) => t.slope(y),
        }
    }

    pub fn breakpoints(&self) -> BreakpointSet<T> {
        match self {
            Self::SoftLimiter { threshold } | Self::Blanker { threshold } => {
                BreakpointSet(vec![-*threshold, *threshold])
            }
            Self::Tabulated(t) => t.knots.clone(),
            _ => BreakpointSet::empty(),
        }
    }

    /// True when `g` itself (not only `g'`) is discontinuous somewhere.
    pub fn has_jumps(&self) -> bool {
        matches!(self, Self::Blanker { .. })
    }

    pub fn threshold(&self) -> Option<T> {
        match self {
            Self::SoftLimiter { threshold } | Self::Blanker { threshold } => Some(*threshold),
            _ => None,
        }
    }

    /// Short label for tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Scale(_) => "scale",
            Self::SoftLimiter { .. } => "soft_limiter",
            Self::Blanker { .. } => "blanker",
            Self::MixtureMmse(_) => "mixture_mmse",
            Self::Tabulated(_) => "tabulated",
        }
    }
}

impl<T: Real> fmt::Display for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scale(a) => write!(f, "scale({a})"),
            Self::SoftLimiter { threshold } => write!(f, "soft_limiter({threshold})"),
            Self::Blanker { threshold } => write!(f, "blanker({threshold})"),
            other => f.write_str(other.label()),
        }
    }
}

fn check_threshold<T: Real>(t: T) -> Result<T> {
    if t > T::zero() && t.is_finite() {
        Ok(t)
    } else {
        Err(invalid("y_th", format!("threshold {t} must be positive")))
    }
}
