//! Linear regression coefficients `k_y`, `k_x`, `k_n` of `Z = g(X + N)`.
//!
//! Analytic routes reduce everything to single-fold Gaussian integrals, one
//! per mixture component. The Monte Carlo route is the brute-force oracle and
//! handles any scenario, including correlated Gaussian pairs.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{MixtureSpec, ScalarDistribution};
use crate::error::{invalid, Error, Result};
use crate::expectations::{gaussian_integral, BatchMeans, Estimate, McSettings, QuadratureSettings, Sampler};
use crate::nonlinearities::Nonlinearity;
use crate::scalar::Real;

/// Largest number of `(l, j)` component pairs the double-mixture route accepts.
pub const MAX_COMPONENT_PAIRS: usize = 10_000;

/// `Y = X + N` passed through `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    source: ScalarDistribution<T>,
    noise: ScalarDistribution<T>,
    correlation: T,
    g: Nonlinearity<T>,
}

impl<T: Real> Scenario<T> {
    /// `correlation` is `ρ_XN`; it must be zero unless both laws are Gaussian.
    pub fn new(
        source: ScalarDistribution<T>,
        noise: ScalarDistribution<T>,
        correlation: T,
        g: Nonlinearity<T>,
    ) -> Result<Self> {
        if !(correlation.abs() < T::one()) {
            return Err(invalid("rho_xn", format!("{correlation} is outside (-1, 1)")));
        }
        if correlation != T::zero()
            && !(matches!(source, ScalarDistribution::Gaussian { .. })
                && matches!(noise, ScalarDistribution::Gaussian { .. }))
        {
            return Err(invalid("rho_xn", "correlation needs Gaussian source and noise"));
        }
        let s = Self {
            source,
            noise,
            correlation,
            g,
        };
        if !(s.output_input_power() > T::zero()) {
            return Err(invalid("rho_xn", "total input power must be positive"));
        }
        Ok(s)
    }

    pub fn independent(source: ScalarDistribution<T>, noise: ScalarDistribution<T>, g: Nonlinearity<T>) -> Self {
        Self {
            source,
            noise,
            correlation: T::zero(),
            g,
        }
    }

    /// Gaussian pair with total power `P_Y`, power fraction `ρ_p = P_X/(P_X + P_N)`
    /// and correlation `ρ_XN`.
    pub fn correlated_gaussian(p_y: T, rho_p: T, rho_xn: T, g: Nonlinearity<T>) -> Result<Self> {
        if !(rho_p > T::zero() && rho_p < T::one()) {
            return Err(invalid("rho_p", format!("{rho_p} is outside (0, 1)")));
        }
        if !(p_y > T::zero()) {
            return Err(invalid("p_y", "must be positive"));
        }
        let cross = T::lit(2.0) * rho_xn * (rho_p * (T::one() - rho_p)).sqrt();
        let sum = p_y / (T::one() + cross);
        Self::new(
            ScalarDistribution::gaussian(rho_p * sum)?,
            ScalarDistribution::gaussian((T::one() - rho_p) * sum)?,
            rho_xn,
            g,
        )
    }

    pub fn source(&self) -> &ScalarDistribution<T> {
        &self.source
    }

    pub fn noise(&self) -> &ScalarDistribution<T> {
        &self.noise
    }

    pub fn correlation(&self) -> T {
        self.correlation
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.g
    }

    pub fn with_nonlinearity(&self, g: Nonlinearity<T>) -> Self {
        Self { g, ..self.clone() }
    }

    /// `P_X`.
    pub fn source_power(&self) -> T {
        self.source.variance()
    }

    /// `P_N`.
    pub fn noise_power(&self) -> T {
        self.noise.variance()
    }

    /// `E{XN} = ρ_XN σ_X σ_N`.
    pub fn cross_power(&self) -> T {
        self.correlation * self.source.std_dev() * self.noise.std_dev()
    }

    /// `P_Y = P_X + P_N + 2E{XN}`.
    pub fn output_input_power(&self) -> T {
        self.source_power() + self.noise_power() + T::lit(2.0) * self.cross_power()
    }

    /// One `(x, n)` draw.
    pub fn draw_pair(&self, rng: &mut ChaCha8Rng) -> (T, T) {
        if self.correlation == T::zero() {
            return (self.source.sample_one(rng), self.noise.sample_one(rng));
        }
        let z1 = T::standard_normal(rng);
        let z2 = T::standard_normal(rng);
        let r = self.correlation;
        let x = self.source.std_dev() * z1;
        let n = self.noise.std_dev() * (r * z1 + (T::one() - r * r).sqrt() * z2);
        (x, n)
    }
}

impl<T: Real> Sampler for Scenario<T> {
    type Output = (T, T);
    fn draw(&self, rng: &mut ChaCha8Rng) -> (T, T) {
        self.draw_pair(rng)
    }
}

/// Gain of one Gaussian component pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentGain<T> {
    /// Source component index `l`.
    pub source_index: usize,
    /// Noise component index `j`.
    pub noise_index: usize,
    /// `β_l γ_j`.
    pub weight: T,
    /// `σ_{X,l}² + σ_{N,j}²`.
    pub output_variance: T,
    /// `k^{(l,j)} = E{g(Y)Y}/σ_Y²` on the component.
    pub gain: T,
    /// `E{g²(Y)}` on the component.
    pub output_power: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet<T> {
    pub k_y: Estimate<T>,
    pub k_x: Estimate<T>,
    pub k_n: Estimate<T>,
    /// `E{g²(Y)}`, carried along for the metrics.
    pub output_power: Estimate<T>,
    /// Per-component gains for the analytic mixture routes, empty otherwise.
    pub per_component: Vec<ComponentGain<T>>,
}

/// `k_y = E{g(Y)Y}/σ_Y²` for `Y ~ N(0, σ_Y²)`.
pub fn gain_gaussian<T: Real>(
    g: &Nonlinearity<T>,
    variance: T,
    settings: &QuadratureSettings<T>,
) -> Result<Estimate<T>> {
    let i = gaussian_integral(|y| g.evaluate(y) * y, variance, &g.breakpoints(), settings)?;
    Ok(Estimate::exact(i.value / variance))
}

/// `E{g'(Y)}` for `Y ~ N(0, σ²)`: an independent route to the Gaussian gain.
/// Refused for `g` with jumps, where the identity needs delta terms.
pub fn gain_derivative_crosscheck<T: Real>(
    g: &Nonlinearity<T>,
    variance: T,
    settings: &QuadratureSettings<T>,
) -> Result<Estimate<T>> {
    if g.has_jumps() {
        return Err(Error::Unsupported(format!(
            "{g} has jump discontinuities; E{{g'(Y)}} misses their delta terms"
        )));
    }
    let i = gaussian_integral(|y| g.derivative(y), variance, &g.breakpoints(), settings)?;
    Ok(Estimate::exact(i.value))
}

/// Analytic gains for a Gaussian source in independent Gaussian-mixture noise.
pub fn gains_mixture<T: Real>(scenario: &Scenario<T>, settings: &QuadratureSettings<T>) -> Result<GainSet<T>> {
    if !scenario.source.is_gaussian() {
        return Err(invalid("source", "analytic mixture gains need a Gaussian source"));
    }
    analytic_pair(scenario, settings)
}

/// Analytic gains whenever both laws are Gaussian or Gaussian mixtures.
pub fn gains_analytic<T: Real>(scenario: &Scenario<T>, settings: &QuadratureSettings<T>) -> Result<GainSet<T>> {
    analytic_pair(scenario, settings)
}

fn analytic_pair<T: Real>(scenario: &Scenario<T>, settings: &QuadratureSettings<T>) -> Result<GainSet<T>> {
    if scenario.correlation != T::zero() {
        return Err(invalid("rho_xn", "analytic mixture gains need independent inputs"));
    }
    let (Some(source), Some(noise)) = (scenario.source.as_mixture(), scenario.noise.as_mixture()) else {
        return Err(invalid("noise", "analytic gains need Gaussian or mixture laws"));
    };
    gains_double_mixture(&source, &noise, &scenario.g, settings)
}

/// Gains for independent mixture source and mixture noise: every quantity is a
/// weighted sum over component pairs of single-fold Gaussian gains.
pub fn gains_double_mixture<T: Real>(
    source: &MixtureSpec<T>,
    noise: &MixtureSpec<T>,
    g: &Nonlinearity<T>,
    settings: &QuadratureSettings<T>,
) -> Result<GainSet<T>> {
    let pairs = source.len() * noise.len();
    if pairs > MAX_COMPONENT_PAIRS {
        return Err(Error::TooManyComponents {
            pairs,
            limit: MAX_COMPONENT_PAIRS,
        });
    }
    settings.validate()?;
    let cuts = g.breakpoints();
    let jobs: Vec<(usize, usize, T, T)> = source
        .components()
        .enumerate()
        .flat_map(|(l, (bx, vx))| {
            noise
                .components()
                .enumerate()
                .map(move |(j, (bn, vn))| (l, j, bx * bn, vx + vn))
        })
        .filter(|(_, _, w, _)| *w > T::zero())
        .collect();
    let per_component = jobs
        .par_iter()
        .map(|&(l, j, weight, s)| {
            let gy = gaussian_integral(|y| g.evaluate(y) * y, s, &cuts, settings)?.value;
            let g2 = gaussian_integral(|y| g.evaluate(y).powi(2), s, &cuts, settings)?.value;
            Ok(ComponentGain {
                source_index: l,
                noise_index: j,
                weight,
                output_variance: s,
                gain: gy / s,
                output_power: g2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (px, pn) = (source.total_variance(), noise.total_variance());
    let (mut gx, mut gn, mut gy, mut g2) = (T::zero(), T::zero(), T::zero(), T::zero());
    for c in &per_component {
        let vx = source.variances()[c.source_index];
        let vn = noise.variances()[c.noise_index];
        let wk = c.weight * c.gain;
        gx = gx + wk * vx;
        gn = gn + wk * vn;
        gy = gy + wk * c.output_variance;
        g2 = g2 + c.weight * c.output_power;
    }
    Ok(GainSet {
        k_y: Estimate::exact(gy / (px + pn)),
        k_x: Estimate::exact(gx / px),
        k_n: Estimate::exact(gn / pn),
        output_power: Estimate::exact(g2),
        per_component,
    })
}

/// Per-sample statistics accumulated by [`gains_empirical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments<T> {
    pub gx: T,
    pub gn: T,
    pub gy: T,
    pub xx: T,
    pub nn: T,
    pub yy: T,
    pub xn: T,
    pub gg: T,
}

impl<T: Real> SampleMoments<T> {
    fn from_array(m: &[T; 8]) -> Self {
        Self {
            gx: m[0],
            gn: m[1],
            gy: m[2],
            xx: m[3],
            nn: m[4],
            yy: m[5],
            xn: m[6],
            gg: m[7],
        }
    }

    pub fn k_x(&self) -> T {
        self.gx / self.xx
    }

    pub fn k_n(&self) -> T {
        self.gn / self.nn
    }

    pub fn k_y(&self) -> T {
        self.gy / self.yy
    }

    /// `E{W_y X}` with `W_y = Z − k_y Y`.
    pub fn residual_wy_x(&self) -> T {
        self.gx - self.k_y() * (self.xx + self.xn)
    }

    /// `E{W_y N}`.
    pub fn residual_wy_n(&self) -> T {
        self.gn - self.k_y() * (self.nn + self.xn)
    }
}

/// Batch-means Monte Carlo gains. Ratios use sample second moments in the
/// denominators, so every coefficient is a pure function of the sample.
#[derive(Debug, Clone)]
pub struct EmpiricalGains<T> {
    batches: BatchMeans<T, 8>,
}

impl<T: Real> EmpiricalGains<T> {
    /// Any function of the pooled moments, with its batch-means error.
    pub fn statistic(&self, h: impl Fn(&SampleMoments<T>) -> T) -> Estimate<T> {
        self.batches.estimate_with(|m| h(&SampleMoments::from_array(m)))
    }

    pub fn moments(&self) -> SampleMoments<T> {
        SampleMoments::from_array(&self.batches.pooled())
    }

    pub fn n_samples(&self) -> usize {
        self.batches.n_samples()
    }

    pub fn gains(&self) -> GainSet<T> {
        GainSet {
            k_y: self.statistic(SampleMoments::k_y),
            k_x: self.statistic(SampleMoments::k_x),
            k_n: self.statistic(SampleMoments::k_n),
            output_power: self.statistic(|m| m.gg),
            per_component: Vec::new(),
        }
    }

    /// `k̂_y − k̂_x` with the paired standard error; the two estimates share
    /// samples, so their errors are strongly correlated.
    pub fn diff_yx(&self) -> Estimate<T> {
        self.statistic(|m| m.k_y() - m.k_x())
    }

    pub fn diff_yn(&self) -> Estimate<T> {
        self.statistic(|m| m.k_y() - m.k_n())
    }

    pub fn diff_xn(&self) -> Estimate<T> {
        self.statistic(|m| m.k_x() - m.k_n())
    }

    pub fn residual_wy_x(&self) -> Estimate<T> {
        self.statistic(SampleMoments::residual_wy_x)
    }

    pub fn residual_wy_n(&self) -> Estimate<T> {
        self.statistic(SampleMoments::residual_wy_n)
    }
}

/// Monte Carlo estimate of the three gains for any scenario.
pub fn gains_empirical<T: Real>(scenario: &Scenario<T>, mc: &McSettings) -> Result<EmpiricalGains<T>> {
    let g = &scenario.g;
    let batches = BatchMeans::run(
        scenario,
        |&(x, n): &(T, T)| {
            let y = x + n;
            let z = g.evaluate(y);
            [z * x, z * n, z * y, x * x, n * n, y * y, x * n, z * z]
        },
        mc,
    )?;
    Ok(EmpiricalGains { batches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{class_a_mixture, ClassAParams};
    use libm::erf;

    fn quad() -> QuadratureSettings<f64> {
        QuadratureSettings::default()
    }

    fn gauss(v: f64) -> ScalarDistribution<f64> {
        ScalarDistribution::gaussian(v).unwrap()
    }

    fn class_a_scenario(g: Nonlinearity<f64>) -> Scenario<f64> {
        let noise = ScalarDistribution::class_a(&ClassAParams::new(0.01, 0.01, 1.0)).unwrap();
        Scenario::independent(gauss(1.0), noise, g)
    }

    #[test]
    fn gaussian_gain_closed_forms() {
        assert!((gain_gaussian(&Nonlinearity::Identity, 3.0, &quad()).unwrap().value - 1.0).abs() < 1e-12);
        let a = gain_gaussian(&Nonlinearity::scale(-0.7).unwrap(), 3.0, &quad()).unwrap();
        assert!((a.value + 0.7).abs() < 1e-12);
        let sl = gain_gaussian(&Nonlinearity::soft_limiter(1.0).unwrap(), 10.0, &quad()).unwrap();
        assert!((sl.value - erf(1.0 / 20f64.sqrt())).abs() < 1e-10, "{}", sl.value);
    }

    #[test]
    fn derivative_route_agrees() {
        for (g, v) in [
            (Nonlinearity::soft_limiter(1.0).unwrap(), 10.0),
            (Nonlinearity::soft_limiter(0.3).unwrap(), 0.5),
            (Nonlinearity::Identity, 2.0),
            (Nonlinearity::scale(4.0).unwrap(), 2.0),
        ] {
            let a = gain_gaussian(&g, v, &quad()).unwrap().value;
            let b = gain_derivative_crosscheck(&g, v, &quad()).unwrap().value;
            assert!((a - b).abs() < 1e-8, "{g}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_route_matches_for_mixture_mmse() {
        let noise = class_a_mixture(&ClassAParams::new(0.1, 0.1, 1.0)).unwrap();
        let g = Nonlinearity::mixture_mmse(1.0, &noise).unwrap();
        let a = gain_gaussian(&g, 2.0, &quad()).unwrap().value;
        let b = gain_derivative_crosscheck(&g, 2.0, &quad()).unwrap().value;
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn derivative_route_refuses_blanker() {
        let g = Nonlinearity::blanker(1.0).unwrap();
        assert!(matches!(
            gain_derivative_crosscheck(&g, 1.0, &quad()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn single_component_mixture_has_equal_gains() {
        let s = Scenario::independent(gauss(3.0), gauss(7.0), Nonlinearity::soft_limiter(1.0).unwrap());
        let k = gains_mixture(&s, &quad()).unwrap();
        assert!((k.k_y.value - k.k_x.value).abs() < 1e-10);
        assert!((k.k_y.value - k.k_n.value).abs() < 1e-10);
    }

    #[test]
    fn class_a_gains_are_distinct() {
        let sigma_y = 2f64.sqrt();
        let k = gains_mixture(&class_a_scenario(Nonlinearity::soft_limiter(sigma_y).unwrap()), &quad()).unwrap();
        assert!((k.k_y.value - k.k_x.value).abs() > 1e-9);
        assert!((k.k_x.value - k.k_n.value).abs() > 1e-9);
        assert!((k.k_n.value - k.k_y.value).abs() > 1e-9);
        // decomposition identity holds exactly for the analytic sums
        let lhs = 2.0 * k.k_y.value;
        assert!((lhs - k.k_x.value - k.k_n.value).abs() < 1e-12);
    }

    #[test]
    fn identity_has_unit_gains_in_any_mixture() {
        let k = gains_mixture(&class_a_scenario(Nonlinearity::Identity), &quad()).unwrap();
        for e in [k.k_y, k.k_x, k.k_n] {
            assert!((e.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_mixtures_give_equal_partial_gains() {
        let m = MixtureSpec::new(vec![0.7, 0.3], vec![0.5, 4.0]).unwrap();
        let k = gains_double_mixture(&m, &m, &Nonlinearity::soft_limiter(0.8).unwrap(), &quad()).unwrap();
        assert!((k.k_x.value - k.k_n.value).abs() < 1e-10);
    }

    #[test]
    fn zero_weight_component_is_inert() {
        let g = Nonlinearity::soft_limiter(1.0).unwrap();
        let noise = MixtureSpec::new(vec![0.9, 0.1], vec![0.5, 10.0]).unwrap();
        let plain = MixtureSpec::gaussian(2.0).unwrap();
        let padded = MixtureSpec::new(vec![1.0, 0.0], vec![2.0, 50.0]).unwrap();
        let a = gains_double_mixture(&plain, &noise, &g, &quad()).unwrap();
        let b = gains_double_mixture(&padded, &noise, &g, &quad()).unwrap();
        assert_eq!(a.k_x, b.k_x);
        assert_eq!(a.k_y, b.k_y);
        assert_eq!(a.k_n, b.k_n);
    }

    #[test]
    fn too_many_pairs_is_an_error() {
        let wide = MixtureSpec::new(vec![0.01; 100], (1..=100).map(f64::from).collect()).unwrap();
        let wider = MixtureSpec::new(vec![1.0 / 101.0; 101], (1..=101).map(f64::from).collect()).unwrap();
        assert!(matches!(
            gains_double_mixture(&wide, &wider, &Nonlinearity::Identity, &quad()),
            Err(Error::TooManyComponents { .. })
        ));
    }

    #[test]
    fn empirical_matches_analytic_for_class_a() {
        let s = class_a_scenario(Nonlinearity::soft_limiter(1.0).unwrap());
        let analytic = gains_mixture(&s, &quad()).unwrap();
        let mc = gains_empirical(&s, &McSettings::new(2_000_000, 3)).unwrap().gains();
        assert!(mc.k_x.within(analytic.k_x.value, 5.0), "{:?} vs {:?}", mc.k_x, analytic.k_x);
        assert!(mc.k_y.within(analytic.k_y.value, 5.0));
        assert!(mc.k_n.within(analytic.k_n.value, 5.0));
    }

    #[test]
    fn empirical_residual_identities() {
        let noise = ScalarDistribution::laplace(3.0).unwrap();
        let s = Scenario::independent(gauss(1.0), noise, Nonlinearity::soft_limiter(1.0).unwrap());
        let e = gains_empirical(&s, &McSettings::new(1_000_000, 4)).unwrap();
        let m = e.moments();
        assert!((m.residual_wy_x() + m.residual_wy_n()).abs() < 1e-12);
        let gap = e.statistic(|m| m.residual_wy_x() - (m.k_x() - m.k_y()) * 1.0);
        assert!(gap.within(0.0, 5.0), "{gap:?}");
        let decomposition = e.statistic(|m| 4.0 * m.k_y() - m.k_x() - 3.0 * m.k_n());
        assert!(decomposition.within(0.0, 5.0), "{decomposition:?}");
    }

    #[test]
    fn correlated_parameterisation() {
        let s = Scenario::correlated_gaussian(10.0f64, 0.5, 0.3, Nonlinearity::Identity).unwrap();
        assert!((s.output_input_power() - 10.0).abs() < 1e-12);
        assert!((s.source_power() - s.noise_power()).abs() < 1e-12);
        let e = gains_empirical(&s, &McSettings::new(500_000, 1)).unwrap();
        let m = e.moments();
        assert!((m.xn / (m.xx * m.nn).sqrt() - 0.3).abs() < 0.01);
    }

    #[test]
    fn correlation_rules() {
        let g = Nonlinearity::Identity;
        assert!(Scenario::new(gauss(1.0), gauss(1.0), 1.0, g.clone()).is_err());
        let lap = ScalarDistribution::laplace(1.0).unwrap();
        assert!(Scenario::new(gauss(1.0), lap, 0.2, g.clone()).is_err());
        assert!(Scenario::correlated_gaussian(10.0, 0.0, 0.0, g.clone()).is_err());
        assert!(Scenario::correlated_gaussian(10.0, 0.5, -0.99, g).is_ok());
    }
}
