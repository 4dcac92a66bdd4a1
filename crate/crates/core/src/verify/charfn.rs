use serde::{Deserialize, Serialize};

use crate::distributions::ScalarDistribution;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Pass threshold on `max |C_X^{1−α} − C_N^α|`.
pub const CHAR_CONDITION_TOLERANCE: f64 = 1e-9;
/// Fewer usable grid points than this makes the check inconclusive.
pub const MIN_USABLE_POINTS: usize = 16;
/// Default grid size, symmetric about zero.
pub const DEFAULT_GRID_POINTS: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharConditionReport {
    /// Usable grid after clipping.
    pub grid: Vec<f64>,
    /// `C_X^{1−α}(u)`.
    pub lhs: Vec<f64>,
    /// `C_N^α(u)`.
    pub rhs: Vec<f64>,
    pub alpha: f64,
    /// `(1 − α)/α`, the exponent in `C_N = C_X^ρ`.
    pub rho: f64,
    pub max_deviation: f64,
    /// Grid points discarded beyond the first non-positive value of either
    /// characteristic function.
    pub clipped_points: usize,
    pub verdict: Verdict,
}

/// Symmetric grid of `points` abscissae on `[−reach, reach]`.
pub fn symmetric_grid(reach: f64, points: usize) -> Vec<f64> {
    let half = (points / 2) as f64;
    (0..points).map(|i| reach * (i as f64 - half) / half).collect()
}

/// Checks `C_X^{1−α}(u) = C_N^α(u)` with `α = P_X/(P_X + P_N)`, the
/// characteristic-function form of `E{X | Y} = αY`.
///
/// Real powers are only taken where both functions are real and positive; the
/// grid is cut symmetrically at the first point where either is not.
pub fn check_char_condition<T: Real>(
    source: &ScalarDistribution<T>,
    noise: &ScalarDistribution<T>,
    grid: &[f64],
) -> Result<CharConditionReport> {
    if grid.is_empty() || grid.iter().any(|u| !u.is_finite()) {
        return Err(invalid("u_grid", "grid must be non-empty and finite"));
    }
    let (px, pn) = (source.variance().as_f64(), noise.variance().as_f64());
    let alpha = px / (px + pn);
    let usable = |u: f64| {
        let cx = source.char_function(T::lit(u));
        let cn = noise.char_function(T::lit(u));
        let ok = |c: num_complex::Complex<T>| c.im == T::zero() && c.re > T::zero();
        ok(cx) && ok(cn)
    };
    let cut = grid
        .iter()
        .filter(|u| !usable(**u))
        .map(|u| u.abs())
        .fold(f64::INFINITY, f64::min);
    let kept: Vec<f64> = grid.iter().copied().filter(|u| u.abs() < cut).collect();
    let clipped_points = grid.len() - kept.len();

    let lhs: Vec<f64> = kept
        .iter()
        .map(|u| source.char_function(T::lit(*u)).re.as_f64().powf(1.0 - alpha))
        .collect();
    let rhs: Vec<f64> = kept
        .iter()
        .map(|u| noise.char_function(T::lit(*u)).re.as_f64().powf(alpha))
        .collect();
    let max_deviation = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let verdict = if kept.len() < MIN_USABLE_POINTS {
        Verdict::Inconclusive
    } else if max_deviation <= CHAR_CONDITION_TOLERANCE {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CharConditionReport {
        grid: kept,
        lhs,
        rhs,
        alpha,
        rho: (1.0 - alpha) / alpha,
        max_deviation,
        clipped_points,
        verdict,
    })
}
