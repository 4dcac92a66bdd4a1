use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expectations::{substream, BatchMeans, McSettings};
use crate::gains::Scenario;
use crate::scalar::Real;

/// Fewest samples the histogram estimator accepts.
pub const MIN_SAMPLES: usize = 100_000;

/// Which pair is histogrammed: `(X, Y)` or `(X, g(Y))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiTarget {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiSettings {
    pub bins_per_axis: usize,
    /// Each axis spans `±range_multiple` times its sample RMS.
    pub range_multiple: f64,
}

impl Default for MiSettings {
    fn default() -> Self {
        Self {
            bins_per_axis: 512,
            range_multiple: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate<T> {
    /// Plug-in estimate minus the Miller–Madow bias term, in nats.
    pub value: T,
    /// Raw plug-in estimate, in nats.
    pub plug_in: T,
    pub n_samples: usize,
    pub bins_per_axis: usize,
    pub range_multiple: f64,
    /// Samples that fell outside the range and were counted in an edge bin.
    pub clamped: u64,
}

/// Histogram estimate of `I(X; Y)` or `I(X; g(Y))`.
///
/// The first pass measures each axis' RMS; the second pass regenerates the same
/// samples (batch `b` is substream `b`) and counts them. Counts are integers,
/// so the merge across workers is exact and the estimate reproducible.
pub fn mutual_information_histogram<T: Real>(
    scenario: &Scenario<T>,
    target: MiTarget,
    settings: &MiSettings,
    mc: &McSettings,
) -> Result<MiEstimate<T>> {
    mc.validate()?;
    if mc.n_samples < MIN_SAMPLES {
        return Err(invalid("n_samples", format!("histogram MI needs at least {MIN_SAMPLES} samples")));
    }
    if settings.bins_per_axis < 2 {
        return Err(invalid("bins", "need at least two bins per axis"));
    }
    if !(settings.range_multiple > 0.0) {
        return Err(invalid("range_multiple", "must be positive"));
    }
    let g = scenario.nonlinearity();
    let pair = |x: T, n: T| -> (T, T) {
        let y = x + n;
        match target {
            MiTarget::Input => (x, y),
            MiTarget::Output => (x, g.evaluate(y)),
        }
    };

    let power = BatchMeans::<T, 2>::run(
        scenario,
        |&(x, n): &(T, T)| {
            let (a, b) = pair(x, n);
            [a * a, b * b]
        },
        mc,
    )?
    .pooled();
    let half_width = power.map(|p| settings.range_multiple * p.as_f64().sqrt());
    if half_width.iter().any(|w| !(*w > 0.0)) {
        // A constant axis carries no information.
        return Ok(MiEstimate {
            value: T::zero(),
            plug_in: T::zero(),
            n_samples: mc.n_samples,
            bins_per_axis: settings.bins_per_axis,
            range_multiple: settings.range_multiple,
            clamped: 0,
        });
    }

    let k = settings.bins_per_axis;
    let index = |v: f64, w: f64| -> (usize, bool) {
        let pos = ((v + w) / (2.0 * w) * k as f64).floor();
        if pos < 0.0 {
            (0, true)
        } else if pos >= k as f64 {
            (k - 1, v > w)
        } else {
            (pos as usize, false)
        }
    };
    let (counts, clamped) = (0..mc.n_batches)
        .into_par_iter()
        .fold(
            || (vec![0u64; k * k], 0u64),
            |(mut hist, mut clamped), b| {
                let mut rng = substream(mc.seed, b as u64);
                for _ in 0..mc.batch_len(b) {
                    let (x, n) = scenario.draw_pair(&mut rng);
                    let (a, c) = pair(x, n);
                    let (i, ci) = index(a.as_f64(), half_width[0]);
                    let (j, cj) = index(c.as_f64(), half_width[1]);
                    hist[i * k + j] += 1;
                    clamped += u64::from(ci || cj);
                }
                (hist, clamped)
            },
        )
        .reduce(
            || (vec![0u64; k * k], 0u64),
            |(mut a, ca), (b, cb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += *y);
                (a, ca + cb)
            },
        );

    let (plug_in, correction) = plug_in_mi(&counts, k);
    Ok(MiEstimate {
        value: T::lit(plug_in - correction),
        plug_in: T::lit(plug_in),
        n_samples: mc.n_samples,
        bins_per_axis: k,
        range_multiple: settings.range_multiple,
        clamped,
    })
}

/// Plug-in MI of a `k × k` count table and its Miller–Madow bias term
/// `(K_xy − K_x − K_y + 1)/(2n)`, where `K` counts occupied cells.
fn plug_in_mi(counts: &[u64], k: usize) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let mut rows = vec![0u64; k];
    let mut cols = vec![0u64; k];
    for i in 0..k {
        for j in 0..k {
            let c = counts[i * k + j];
            rows[i] += c;
            cols[j] += c;
        }
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..k {
        for j in 0..k {
            let c = counts[i * k + j];
            if c > 0 {
                let c = c as f64;
                mi += c * (c * nf / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let occupied = |v: &[u64]| v.iter().filter(|c| **c > 0).count() as f64;
    let bias = (occupied(counts) - occupied(&rows) - occupied(&cols) + 1.0) / (2.0 * nf);
    (mi / nf, bias)
}
