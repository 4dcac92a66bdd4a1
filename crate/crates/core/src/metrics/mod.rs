//! SNR, MSE and capacity lower bounds derived from the regression gains, plus
//! a histogram mutual-information estimator.

mod mi;

pub use mi::{mutual_information_histogram, MiEstimate, MiSettings, MiTarget, MIN_SAMPLES as MIN_MI_SAMPLES};

use serde::{Deserialize, Serialize};

use crate::gains::{GainSet, Scenario};
use crate::scalar::{nats_to_bits, Field, Real};

/// `MSE = E{g²} + (1 − 2k_x)σ_X²`.
pub fn mse<T: Real>(output_power: T, k_x: T, source_power: T) -> T {
    output_power + (T::one() - T::lit(2.0) * k_x) * source_power
}

/// Second-order description of a scenario and its nonlinearity output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    /// `σ_X²`.
    pub source_power: T,
    /// `σ_N²`.
    pub noise_power: T,
    /// `E{XN}`.
    pub cross_power: T,
    pub k_x: T,
    pub k_y: T,
    pub k_n: T,
    /// `E{g²(Y)}`.
    pub output_power: T,
}

impl<T: Real> Moments<T> {
    pub fn new(scenario: &Scenario<T>, gains: &GainSet<T>) -> Self {
        Self {
            source_power: scenario.source_power(),
            noise_power: scenario.noise_power(),
            cross_power: scenario.cross_power(),
            k_x: gains.k_x.value,
            k_y: gains.k_y.value,
            k_n: gains.k_n.value,
            output_power: gains.output_power.value,
        }
    }

    pub fn input_power(&self) -> T {
        self.source_power + self.noise_power + T::lit(2.0) * self.cross_power
    }
}

/// Unit of the capacity fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoUnit {
    Nats,
    Bits,
}

/// Metrics for one scenario. `None` marks a degenerate value (vanishing gain
/// or non-positive error power) rather than an infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet<T> {
    pub snr_x: Option<T>,
    pub snr_y: Option<T>,
    pub mse: T,
    pub mse_u: Option<T>,
    /// `E{W_x²} = E{g²} − k_x²σ_X²`.
    pub residual_power_wx: T,
    pub c_snr_x: Option<T>,
    pub c_snr_y: Option<T>,
    pub c_mse: Option<T>,
    pub c_awgn: T,
    pub e_g2: T,
    pub unit: InfoUnit,
}

impl<T: Real> MetricSet<T> {
    pub fn from_moments(m: &Moments<T>) -> Self {
        let sx2 = m.source_power;
        let e_g2 = m.output_power;
        let half = T::lit(0.5);
        let scale = (e_g2 / sx2).abs().sqrt();
        let usable = |k: T| k.abs() >= T::lit(1e-9) * scale;

        let snr = |k: T| {
            if !usable(k) {
                return None;
            }
            let signal = k * k * sx2;
            let residual = e_g2 - signal;
            (residual > T::zero()).then(|| signal / residual)
        };
        let snr_x = snr(m.k_x);
        let snr_y = snr(m.k_y);
        let mse = mse(e_g2, m.k_x, sx2);
        let mse_u = usable(m.k_x).then(|| e_g2 / (m.k_x * m.k_x) - sx2);
        let cap = |s: T| half * s.ln_1p();
        Self {
            snr_x,
            snr_y,
            mse,
            mse_u,
            residual_power_wx: e_g2 - m.k_x * m.k_x * sx2,
            c_snr_x: snr_x.map(cap),
            c_snr_y: snr_y.map(cap),
            c_mse: (mse > T::zero()).then(|| half * (sx2 / mse).ln()),
            c_awgn: cap(sx2 / m.noise_power),
            e_g2,
            unit: InfoUnit::Nats,
        }
    }

    /// Same metrics with the capacity fields converted to bits.
    pub fn in_bits(&self) -> Self {
        if self.unit == InfoUnit::Bits {
            return *self;
        }
        Self {
            c_snr_x: self.c_snr_x.map(nats_to_bits),
            c_snr_y: self.c_snr_y.map(nats_to_bits),
            c_mse: self.c_mse.map(nats_to_bits),
            c_awgn: nats_to_bits(self.c_awgn),
            unit: InfoUnit::Bits,
            ..*self
        }
    }

    /// Relative residual of `SNR_x·(MSE − (1 − k_x)²σ_X²) = k_x²σ_X²`.
    pub fn snr_mse_link_residual(&self, k_x: T, source_power: T) -> Option<T> {
        let snr = self.snr_x?;
        let one_minus = T::one() - k_x;
        let lhs = snr * (self.mse - one_minus * one_minus * source_power);
        let rhs = k_x * k_x * source_power;
        Some(((lhs - rhs) / rhs).abs())
    }
}

pub fn metric_set<T: Real>(scenario: &Scenario<T>, gains: &GainSet<T>) -> MetricSet<T> {
    MetricSet::from_moments(&Moments::new(scenario, gains))
}

/// `1 + SNR_x ≥ σ_X²/MSE`, i.e. `C^{snr_x} ≥ C^{mse}`, decided in the
/// arithmetic of `F`. With `MSE = P + (1 − k)²σ²` and `SNR_x = k²σ²/P` the
/// difference `(1 + SNR_x)·MSE − σ²` equals `(P − k(1 − k)σ²)²/P`.
pub fn snr_bound_dominates<F: Field>(k_x: &F, residual_power: &F, source_power: &F) -> bool {
    let one = F::one();
    let one_minus = one.clone() - k_x.clone();
    let mse = residual_power.clone() + one_minus.clone() * one_minus * source_power.clone();
    let snr = k_x.clone() * k_x.clone() * source_power.clone() / residual_power.clone();
    (one + snr) * mse >= *source_power
}

/// Best linear estimates of `X`, `N` and `Y` from `Z = g(Y)`, as coefficients
/// on `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearEstimates<T> {
    pub x: T,
    pub n: T,
    pub y: T,
}

/// `None` when `σ_Z² = 0`.
pub fn linear_estimates_from_output<T: Real>(m: &Moments<T>) -> Option<LinearEstimates<T>> {
    let sz2 = m.output_power;
    if !(sz2 > T::zero()) {
        return None;
    }
    // E{ZX} and E{ZN}; with a cross term E{ZY} = E{ZX} + E{ZN} still holds.
    let zx = m.k_x * m.source_power;
    let zn = m.k_n * m.noise_power;
    Some(LinearEstimates {
        x: zx / sz2,
        n: zn / sz2,
        y: m.k_y * m.input_power() / sz2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{MixtureSpec, ScalarDistribution};
    use crate::expectations::QuadratureSettings;
    use crate::gains::gains_mixture;
    use crate::nonlinearities::Nonlinearity;
    use crate::scalar::{rational, Rational};
    use proptest::prelude::*;

    fn analytic(g: Nonlinearity<f64>, sx2: f64, sn2: f64) -> (Moments<f64>, MetricSet<f64>) {
        let s = Scenario::independent(
            ScalarDistribution::gaussian(sx2).unwrap(),
            ScalarDistribution::gaussian(sn2).unwrap(),
            g,
        );
        let k = gains_mixture(&s, &QuadratureSettings::default()).unwrap();
        let m = Moments::new(&s, &k);
        (m, MetricSet::from_moments(&m))
    }

    #[test]
    fn identity_in_awgn_reduces_to_awgn_values() {
        for snr in [0.1, 1.0, 10.0] {
            let (_, m) = analytic(Nonlinearity::Identity, snr, 1.0);
            let c = 0.5 * (1.0 + snr).ln();
            assert!((m.snr_x.unwrap() - snr).abs() < 1e-9 * snr);
            assert!((m.mse - 1.0).abs() < 1e-9);
            for v in [m.c_snr_x.unwrap(), m.c_snr_y.unwrap(), m.c_awgn] {
                assert!((v - c).abs() < 1e-9, "{v} vs {c}");
            }
            // unscaled output: MSE = σ_N², so the MSE bound is ½ln(SNR)
            assert!((m.c_mse.unwrap() - 0.5 * snr.ln()).abs() < 1e-9);
            // the Wiener scaling reaches the AWGN value
            let (_, w) = analytic(Nonlinearity::scale(snr / (1.0 + snr)).unwrap(), snr, 1.0);
            assert!((w.c_mse.unwrap() - c).abs() < 1e-9);
            assert!((w.snr_x.unwrap() - snr).abs() < 1e-9 * snr);
        }
    }

    #[test]
    fn wiener_filter_mse() {
        let (sx2, sn2) = (2.0, 3.0);
        let g = Nonlinearity::mixture_mmse(sx2, &MixtureSpec::gaussian(sn2).unwrap()).unwrap();
        let (_, m) = analytic(g, sx2, sn2);
        assert!((m.mse - sx2 * sn2 / (sx2 + sn2)).abs() < 1e-10);
    }

    #[test]
    fn both_snrs_coincide_for_gaussian_pair() {
        let (mo, m) = analytic(Nonlinearity::soft_limiter(1.0).unwrap(), 4.0, 6.0);
        assert!((m.snr_x.unwrap() - m.snr_y.unwrap()).abs() < 1e-9 * m.snr_x.unwrap());
        assert!(m.snr_mse_link_residual(mo.k_x, 4.0).unwrap() < 1e-9);
    }

    #[test]
    fn degenerate_gain_is_not_infinite() {
        let m = MetricSet::from_moments(&Moments {
            source_power: 1.0,
            noise_power: 1.0,
            cross_power: 0.0,
            k_x: 0.0,
            k_y: 0.0,
            k_n: 0.0,
            output_power: 0.5,
        });
        assert!(m.snr_x.is_none() && m.mse_u.is_none() && m.c_snr_x.is_none());
        assert_eq!(m.mse, 1.5);
    }

    #[test]
    fn bits_conversion() {
        let (_, m) = analytic(Nonlinearity::Identity, 1.0, 1.0);
        let b = m.in_bits();
        assert_eq!(b.unit, InfoUnit::Bits);
        assert!((b.c_awgn - 0.5).abs() < 1e-12);
        assert_eq!(b.in_bits(), b);
    }

    #[test]
    fn linear_estimates_add_up() {
        let (m, _) = analytic(Nonlinearity::soft_limiter(0.8).unwrap(), 1.5, 2.5);
        let e = linear_estimates_from_output(&m).unwrap();
        assert!((e.y - e.x - e.n).abs() < 1e-12 * e.y.abs());
        let (m, _) = analytic(Nonlinearity::Identity, 1.5, 2.5);
        let e = linear_estimates_from_output(&m).unwrap();
        assert!((e.x - 1.5 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn stronger_gain_gives_larger_coefficient() {
        let m = Moments {
            source_power: 1.0,
            noise_power: 1.0,
            cross_power: 0.0,
            k_x: 0.9,
            k_y: 0.7,
            k_n: 0.5,
            output_power: 0.8,
        };
        let e = linear_estimates_from_output(&m).unwrap();
        assert!(e.x > e.n);
        assert!(linear_estimates_from_output(&Moments { output_power: 0.0, ..m }).is_none());
    }

    #[test]
    fn theorem_six_worked_example() {
        // k = 0.5, P = σ² = 1: MSE = 1.25, 1 + SNR = 1.25 ≥ 0.8
        assert!(snr_bound_dominates(&rational(1, 2), &rational(1, 1), &rational(1, 1)));
        // equality case P = k(1 − k)σ²
        let (k, s) = (rational(1, 3), rational(9, 1));
        let p = k.clone() * (rational(1, 1) - k.clone()) * s.clone();
        assert!(snr_bound_dominates(&k, &p, &s));
    }

    proptest! {
        #[test]
        fn theorem_six_holds_exactly(k in -3.0f64..3.0, p in 1e-6f64..10.0, s in 1e-6f64..10.0) {
            let f = |v: f64| Rational::from_f64_exact(v).unwrap();
            prop_assert!(snr_bound_dominates(&f(k), &f(p), &f(s)));
        }

        #[test]
        fn snr_mse_link(k in -3.0f64..3.0, p in 1e-3f64..10.0, s in 1e-3f64..10.0) {
            prop_assume!(k.abs() > 1e-3);
            let m = MetricSet::from_moments(&Moments {
                source_power: s, noise_power: 1.0, cross_power: 0.0,
                k_x: k, k_y: k, k_n: k, output_power: p + k * k * s,
            });
            prop_assert!(m.snr_mse_link_residual(k, s).unwrap() < 1e-9);
        }
    }
}
