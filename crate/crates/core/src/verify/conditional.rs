use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expectations::{substream, McSettings};
use crate::gains::Scenario;
use crate::scalar::Real;

/// Bins holding fewer samples are dropped from the fit.
pub const MIN_BIN_SAMPLES: usize = 100;
/// Pass threshold for the largest per-bin deviation, in standard errors.
pub const COND_LINEARITY_SE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinMean {
    /// Mean of `Y` over the bin.
    pub center: f64,
    /// Mean of `X` over the bin.
    pub mean: f64,
    /// `E{X − αY}` over the bin, in its own standard errors.
    pub deviation_se: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondLinearityReport {
    /// Slope of bin means on bin centres through the origin.
    pub alpha_hat: f64,
    pub alpha_hat_se: f64,
    /// `E{XY}/E{Y²}` from the scenario's powers.
    pub alpha: f64,
    pub bins: Vec<BinMean>,
    pub dropped_bins: usize,
    /// Largest `|deviation_se|`.
    pub max_deviation_se: f64,
    pub passed: bool,
}

/// Draws `mc.n_samples` pairs, batch `b` from substream `b`.
pub(crate) fn draw_pairs<T: Real>(scenario: &Scenario<T>, mc: &McSettings) -> Result<Vec<(T, T)>> {
    mc.validate()?;
    let chunks: Vec<Vec<(T, T)>> = (0..mc.n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(mc.seed, b as u64);
            (0..mc.batch_len(b)).map(|_| scenario.draw_pair(&mut rng)).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Tests `E{X | Y} = αY` by binning `Y` into equal-probability bins.
///
/// Within a bin, linearity implies `E{X − αY | bin} = 0` exactly, whatever the
/// bin width, so each bin contributes one z-score of the residual mean.
pub fn check_conditional_linearity<T: Real>(
    scenario: &Scenario<T>,
    bins: usize,
    mc: &McSettings,
) -> Result<CondLinearityReport> {
    if scenario.correlation() != T::zero() {
        return Err(invalid("rho_xn", "conditional linearity check needs independent inputs"));
    }
    if bins < 2 {
        return Err(invalid("bins", "need at least two bins"));
    }
    let alpha = (scenario.source_power() / scenario.output_input_power()).as_f64();
    let mut pairs: Vec<(f64, f64)> = draw_pairs(scenario, mc)?
        .into_iter()
        .map(|(x, n)| (x.as_f64(), (x + n).as_f64()))
        .collect();
    pairs.par_sort_by(|a, b| a.1.total_cmp(&b.1));

    let n = pairs.len();
    let mut out = Vec::with_capacity(bins);
    let mut mean_var = Vec::with_capacity(bins);
    let mut dropped = 0;
    for b in 0..bins {
        let chunk = &pairs[b * n / bins..(b + 1) * n / bins];
        if chunk.len() < MIN_BIN_SAMPLES {
            dropped += 1;
            continue;
        }
        let c = chunk.len() as f64;
        let center = chunk.iter().map(|p| p.1).sum::<f64>() / c;
        let mean = chunk.iter().map(|p| p.0).sum::<f64>() / c;
        let resid: Vec<f64> = chunk.iter().map(|(x, y)| x - alpha * y).collect();
        let rm = resid.iter().sum::<f64>() / c;
        let var = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (c - 1.0);
        let se = (var / c).sqrt();
        let sd2 = chunk.iter().map(|p| (p.0 - mean).powi(2)).sum::<f64>() / (c - 1.0);
        mean_var.push(sd2 / c);
        let deviation_se = if se > 0.0 { rm / se } else if rm == 0.0 { 0.0 } else { f64::INFINITY };
        out.push(BinMean {
            center,
            mean,
            deviation_se,
            count: chunk.len(),
        });
    }
    if out.is_empty() {
        return Err(invalid("n_samples", "every bin fell below the minimum count"));
    }

    // Weighted least squares through the origin; bin means carry their own error.
    let (mut num, mut den, mut var) = (0.0, 0.0, 0.0);
    for (bm, v) in out.iter().zip(&mean_var) {
        num += bm.mean * bm.center;
        den += bm.center * bm.center;
        var += bm.center * bm.center * v;
    }
    let max_deviation_se = out.iter().map(|b| b.deviation_se.abs()).fold(0.0, f64::max);
    Ok(CondLinearityReport {
        alpha_hat: num / den,
        alpha_hat_se: var.sqrt() / den,
        alpha,
        bins: out,
        dropped_bins: dropped,
        max_deviation_se,
        passed: max_deviation_se <= COND_LINEARITY_SE,
    })
}
