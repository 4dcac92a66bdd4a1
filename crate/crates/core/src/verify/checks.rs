use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::ScalarDistribution;
use crate::error::{invalid, Result};
use crate::expectations::{substream, BatchMeans, Estimate, FnSampler, McSettings, QuadratureSettings};
use crate::gains::{gains_empirical, gains_mixture, Scenario};
use crate::metrics::snr_bound_dominates;
use crate::nonlinearities::Nonlinearity;
use crate::scalar::{Field, Rational, Real};

/// Two-sided band for the statistical equal-gain checks.
pub const EQUAL_GAIN_SE: f64 = 4.0;
/// Band for the scaling lemmas and analytic-vs-empirical agreement.
pub const LEMMA_SE: f64 = 5.0;
/// Most Gaussian terms [`check_scaling_lemmas`] accepts.
pub const MAX_SCALING_TERMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Largest deviation (in standard errors for statistical checks) or the
    /// violation count for exact checks.
    pub statistic: f64,
    pub tolerance: f64,
    /// Named per-point residuals.
    pub diagnostics: Vec<(String, f64)>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statistic: f64, tolerance: f64, diagnostics: Vec<(String, f64)>) -> Self {
        Self {
            name: name.into(),
            passed: statistic <= tolerance,
            statistic,
            tolerance,
            diagnostics,
        }
    }
}

fn z(e: Estimate<f64>) -> f64 {
    e.z_score(0.0)
}

/// `|k̂_y − k̂_x|` and `|k̂_y − k̂_n|` against the 4·SE band, using the paired
/// standard error of each difference.
pub fn check_equal_gain<T: Real>(name: &str, scenario: &Scenario<T>, mc: &McSettings) -> Result<CheckReport> {
    let e = gains_empirical(scenario, mc)?;
    let f = |est: Estimate<T>| {
        Estimate::new(est.value.as_f64(), est.std_error.as_f64())
    };
    let k = e.gains();
    let px = scenario.source_power();
    let dyx = f(e.diff_yx());
    let dyn_ = f(e.diff_yn());
    // E{W_y X} = (k_x − k_y)P_X, evaluated for the record only
    let residual = f(e.statistic(|m| m.residual_wy_x() - (m.k_x() - m.k_y()) * px));
    Ok(CheckReport::new(
        name,
        z(dyx).max(z(dyn_)),
        EQUAL_GAIN_SE,
        vec![
            ("k_y".into(), k.k_y.value.as_f64()),
            ("k_x".into(), k.k_x.value.as_f64()),
            ("k_n".into(), k.k_n.value.as_f64()),
            ("z_yx".into(), z(dyx)),
            ("z_yn".into(), z(dyn_)),
            ("z_xn".into(), z(f(e.diff_xn()))),
            ("z_residual_wy_x".into(), z(residual)),
        ],
    ))
}

/// `|(1 + ρ_XN)k̂_y − k̂_x| ≤ 4·SE` for a correlated Gaussian pair with
/// `P_X = P_N`.
pub fn check_correlated_gain<T: Real>(name: &str, scenario: &Scenario<T>, mc: &McSettings) -> Result<CheckReport> {
    let rho = scenario.correlation();
    let e = gains_empirical(scenario, mc)?;
    let d = e.statistic(|m| (T::one() + rho) * m.k_y() - m.k_x());
    let d = Estimate::new(d.value.as_f64(), d.std_error.as_f64());
    Ok(CheckReport::new(
        name,
        z(d),
        EQUAL_GAIN_SE,
        vec![
            ("difference".into(), d.value),
            ("std_error".into(), d.std_error),
        ],
    ))
}

/// `Y = Σ α_i X_i` with independent `X_i ~ N(0, σ_i²)`: checks
/// `E{ZY}/E{Y²} = E{ZX_i}/(α_i E{X_i²})` for every term within 5·SE.
/// Two terms give the two-variable lemma, three its generalisation.
pub fn check_scaling_lemmas<T: Real>(
    name: &str,
    alphas: &[T],
    variances: &[T],
    g: &Nonlinearity<T>,
    mc: &McSettings,
) -> Result<CheckReport> {
    let j = alphas.len();
    if j == 0 || j > MAX_SCALING_TERMS || variances.len() != j {
        return Err(invalid("alphas", format!("need 1..={MAX_SCALING_TERMS} terms with matching variances")));
    }
    if alphas.iter().any(|a| *a == T::zero() || !a.is_finite()) {
        return Err(invalid("alphas", "every scale must be non-zero"));
    }
    if variances.iter().any(|v| !(*v > T::zero())) {
        return Err(invalid("variances", "must be positive"));
    }
    let sd: Vec<T> = variances.iter().map(|v| v.sqrt()).collect();
    let sampler = FnSampler(|rng: &mut rand_chacha::ChaCha8Rng| {
        let mut xs = [T::zero(); MAX_SCALING_TERMS];
        for i in 0..j {
            xs[i] = T::standard_normal(rng) * sd[i];
        }
        xs
    });
    let bm = BatchMeans::<T, 8>::run(
        &sampler,
        |xs: &[T; MAX_SCALING_TERMS]| {
            let y = (0..j).fold(T::zero(), |acc, i| acc + alphas[i] * xs[i]);
            let z = g.evaluate(y);
            let mut out = [T::zero(); 8];
            out[0] = z * y;
            out[1] = y * y;
            for i in 0..j {
                out[2 + 2 * i] = z * xs[i];
                out[3 + 2 * i] = xs[i] * xs[i];
            }
            out
        },
        mc,
    )?;
    let mut worst: f64 = 0.0;
    let mut diagnostics = Vec::new();
    for i in 0..j {
        let d = bm.estimate_with(|m| m[0] / m[1] - m[2 + 2 * i] / (alphas[i] * m[3 + 2 * i]));
        let zi = Estimate::new(d.value.as_f64(), d.std_error.as_f64()).z_score(0.0);
        worst = worst.max(zi);
        diagnostics.push((format!("z_term_{i}"), zi));
    }
    diagnostics.push(("k_y".into(), bm.ratio(0, 1).value.as_f64()));
    Ok(CheckReport::new(name, worst, LEMMA_SE, diagnostics))
}

/// Draws `n_trials` triples `(k_x, P_Wx, σ_X²)` and counts violations of
/// `1 + SNR_x ≥ σ_X²/MSE`, decided in exact rational arithmetic.
pub fn check_bound_ordering(name: &str, n_trials: usize, seed: u64) -> Result<CheckReport> {
    if n_trials == 0 {
        return Err(invalid("n_trials", "need at least one trial"));
    }
    let mut rng = substream(seed, 0);
    let exact = |v: f64| Rational::from_f64_exact(v).expect("finite draw");
    let mut violations = 0usize;
    for _ in 0..n_trials {
        let k = rng.random_range(-3.0..=3.0);
        // P and σ² strictly positive, spread over several decades
        let p = 10f64.powf(rng.random_range(-4.0..1.0));
        let s = 10f64.powf(rng.random_range(-4.0..1.0));
        if !snr_bound_dominates(&exact(k), &exact(p), &exact(s)) {
            violations += 1;
        }
    }
    Ok(CheckReport::new(
        name,
        violations as f64,
        0.0,
        vec![("trials".into(), n_trials as f64)],
    ))
}

/// Analytic mixture `k_x` against Monte Carlo within 5·SE, plus the size of
/// the analytic `k_y − k_x` gap in Monte Carlo standard errors.
pub fn check_mixture_consistency<T: Real>(
    name: &str,
    scenario: &Scenario<T>,
    quad: &QuadratureSettings<T>,
    mc: &McSettings,
) -> Result<CheckReport> {
    let analytic = gains_mixture(scenario, quad)?;
    let e = gains_empirical(scenario, mc)?.gains();
    let kx = Estimate::new(e.k_x.value.as_f64(), e.k_x.std_error.as_f64());
    let z_kx = kx.z_score(analytic.k_x.value.as_f64());
    let gap = (analytic.k_y.value - analytic.k_x.value).abs().as_f64() / kx.std_error;
    Ok(CheckReport::new(
        name,
        z_kx,
        LEMMA_SE,
        vec![
            ("k_x_analytic".into(), analytic.k_x.value.as_f64()),
            ("k_x_empirical".into(), kx.value),
            ("k_y_analytic".into(), analytic.k_y.value.as_f64()),
            ("gap_yx_in_se".into(), gap),
        ],
    ))
}

/// `(P_X, P_N)` for total power `P_Y` and power fraction `ρ_p`.
pub fn power_split<T: Real>(p_y: T, rho_p: T) -> (T, T) {
    (rho_p * p_y, (T::one() - rho_p) * p_y)
}

/// Scenario with `X` and `N` drawn from the given families at the split powers.
pub fn split_scenario<T: Real>(
    source: impl Fn(T) -> Result<ScalarDistribution<T>>,
    noise: impl Fn(T) -> Result<ScalarDistribution<T>>,
    p_y: T,
    rho_p: T,
    g: Nonlinearity<T>,
) -> Result<Scenario<T>> {
    let (px, pn) = power_split(p_y, rho_p);
    Ok(Scenario::independent(source(px)?, noise(pn)?, g))
}
