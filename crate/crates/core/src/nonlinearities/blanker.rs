use serde::{Deserialize, Serialize};

use super::Nonlinearity;
use crate::distributions::MixtureSpec;
use crate::error::{invalid, Result};
use crate::expectations::{gaussian_integral, QuadratureSettings};
use crate::metrics::mse;
use crate::scalar::Real;

const GRID_POINTS: usize = 200;
const GRID_LOW: f64 = 1e-3;
const GRID_HIGH: f64 = 10.0;
const RELATIVE_TOLERANCE: f64 = 1e-6;
const PLATEAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlankerThreshold<T> {
    pub threshold: T,
    pub mse: T,
    /// False when the scan minimum sat on the edge of the search range, so no
    /// interior bracket existed and the grid point is returned as is.
    pub confident: bool,
}

/// MSE of the blanker for `X ~ N(0, σ_X²)` in independent mixture noise.
///
/// The blanker satisfies `g² = g·y`, so one integral per component yields both
/// `E{g²}` and `k_x`.
pub fn blanker_mse<T: Real>(
    source_variance: T,
    noise: &MixtureSpec<T>,
    threshold: T,
    settings: &QuadratureSettings<T>,
) -> Result<T> {
    let g = Nonlinearity::blanker(threshold)?;
    let cuts = g.breakpoints();
    let mut e_g2 = T::zero();
    let mut k_x = T::zero();
    for (beta, v) in noise.components().filter(|(b, _)| *b > T::zero()) {
        let s = source_variance + v;
        let inner = gaussian_integral(|y| g.evaluate(y) * y, s, &cuts, settings)?.value;
        e_g2 = e_g2 + beta * inner;
        k_x = k_x + beta * inner / s;
    }
    Ok(mse(e_g2, k_x, source_variance))
}

/// MSE-optimal blanker threshold.
///
/// A 200-point log grid over `[10⁻³σ_Y, 10σ_Y]` brackets the minimum, then
/// golden-section search refines it to relative tolerance `10⁻⁶`.
pub fn optimal_blanker_threshold<T: Real>(
    source_variance: T,
    noise: &MixtureSpec<T>,
    settings: &QuadratureSettings<T>,
) -> Result<BlankerThreshold<T>> {
    if !(source_variance > T::zero()) || !source_variance.is_finite() {
        return Err(invalid("source_variance", "must be positive and finite"));
    }
    let sigma_y = (source_variance + noise.total_variance()).sqrt();
    let (lo, hi) = (T::lit(GRID_LOW) * sigma_y, T::lit(GRID_HIGH) * sigma_y);
    let step = (hi / lo).ln() / T::from_count(GRID_POINTS - 1);
    let objective = |t: T| blanker_mse(source_variance, noise, t, settings);

    let grid: Vec<T> = (0..GRID_POINTS)
        .map(|i| lo * (step * T::from_count(i)).exp())
        .collect();
    let values = grid.iter().map(|t| objective(*t)).collect::<Result<Vec<T>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite MSE"))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    // A minimum indistinguishable from an edge value is a plateau reaching
    // that edge, not an interior optimum.
    let flat = |i: usize| values[i] - values[best] <= T::lit(PLATEAU) * values[best].abs();
    let best = if flat(GRID_POINTS - 1) {
        GRID_POINTS - 1
    } else if flat(0) {
        0
    } else {
        best
    };

    if best == 0 || best == GRID_POINTS - 1 {
        return Ok(BlankerThreshold {
            threshold: grid[best],
            mse: values[best],
            confident: false,
        });
    }

    let (threshold, value) = golden_section(&objective, grid[best - 1], grid[best + 1])?;
    // Guard against a non-unimodal bracket.
    if value > values[best] {
        return Ok(BlankerThreshold {
            threshold: grid[best],
            mse: values[best],
            confident: false,
        });
    }
    Ok(BlankerThreshold {
        threshold,
        mse: value,
        confident: true,
    })
}

fn golden_section<T: Real>(f: &impl Fn(T) -> Result<T>, mut a: T, mut b: T) -> Result<(T, T)> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let tol = T::lit(RELATIVE_TOLERANCE).max(T::epsilon().sqrt());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol * (c.abs() + d.abs()) / T::lit(2.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
