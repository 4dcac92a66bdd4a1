use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nonlinearities::BreakpointSet;
use crate::scalar::{gauss, Real};

use super::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings<T> {
    /// Target error relative to `∫|f|`.
    pub relative_tolerance: T,
    /// Gaussian integrals run over `±support_multiple·σ`.
    pub support_multiple: T,
    pub max_panels: usize,
}

impl<T: Real> Default for QuadratureSettings<T> {
    fn default() -> Self {
        Self {
            relative_tolerance: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
            support_multiple: T::lit(10.0),
            max_panels: 1 << 14,
        }
    }
}

impl<T: Real> QuadratureSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > T::zero()) {
            return Err(invalid("relative_tolerance", "must be positive"));
        }
        if !(self.support_multiple >= T::lit(6.0)) {
            return Err(invalid("support_multiple", "must be at least 6"));
        }
        if self.max_panels == 0 {
            return Err(invalid("max_panels", "must be positive"));
        }
        Ok(())
    }
}

/// Converged integral with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
    pub panels: usize,
}

impl<T: Real> From<Integral<T>> for Estimate<T> {
    fn from(i: Integral<T>) -> Self {
        Estimate::exact(i.value)
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1], as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    abs_value: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_abs = fc.abs() * T::lit(WGK[7]);
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let x = half_len * T::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * scale;
    res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        err = res_asc * T::one().min((T::lit(200.0) * err / res_asc).powf(T::lit(1.5)));
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > err {
        err = floor;
    }
    Panel {
        a,
        b,
        value,
        error: err,
        abs_value: res_abs,
    }
}

/// Globally adaptive 7/15-point Gauss–Kronrod quadrature of `f` over `[a, b]`,
/// with initial panels split at every breakpoint inside the interval.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &BreakpointSet<T>,
    settings: &QuadratureSettings<T>,
) -> Result<Integral<T>> {
    settings.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid("interval", "need finite a < b"));
    }
    let mut edges = vec![a];
    edges.extend(breakpoints.points().iter().copied().filter(|p| *p > a && *p < b));
    edges.push(b);

    let mut heap: BinaryHeap<Panel<T>> = edges
        .windows(2)
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();
    let min_width = (b - a) * T::epsilon() * T::lit(1e3);
    let mut settled: Vec<Panel<T>> = Vec::new();

    loop {
        let (value, error, abs_value) = totals(heap.iter().chain(settled.iter()));
        let tol = settings.relative_tolerance * abs_value;
        let panels = heap.len() + settled.len();
        if error <= tol {
            return Ok(Integral {
                value,
                abs_error: error,
                panels,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Err(not_converged(value, error, panels));
            }
        };
        if panels >= settings.max_panels {
            heap.push(worst);
            return Err(not_converged(value, error, panels));
        }
        if worst.b - worst.a < min_width {
            settled.push(worst);
            continue;
        }
        let mid = T::lit(0.5) * (worst.a + worst.b);
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
    }
}

fn totals<'a, T: Real + 'a>(panels: impl Iterator<Item = &'a Panel<T>>) -> (T, T, T) {
    panels.fold((T::zero(), T::zero(), T::zero()), |(v, e, s), p| {
        (v + p.value, e + p.error, s + p.abs_value)
    })
}

fn not_converged<T: Real>(value: T, error: T, panels: usize) -> Error {
    Error::QuadratureNotConverged {
        estimate: value.as_f64(),
        residual: error.as_f64(),
        panels,
    }
}

const SEED_SIGMAS: i32 = 4;

/// `E{φ(Y)}` for `Y ~ N(0, σ²)` with diagnostics.
pub fn gaussian_integral<T: Real, F: Fn(T) -> T>(
    phi: F,
    variance: T,
    breakpoints: &BreakpointSet<T>,
    settings: &QuadratureSettings<T>,
) -> Result<Integral<T>> {
    if !(variance > T::zero()) || !variance.is_finite() {
        return Err(invalid("variance", "must be positive and finite"));
    }
    let sd = variance.sqrt();
    let reach = settings.support_multiple * sd;
    // Seed panels one σ wide across the bulk so narrow features there cannot
    // slip between the first Kronrod nodes.
    let seeds = (-SEED_SIGMAS..=SEED_SIGMAS).map(|k| T::lit(k as f64) * sd).collect();
    let seeds = BreakpointSet::new(seeds).expect("increasing grid");
    integrate(|y| phi(y) * gauss(y, variance), -reach, reach, &breakpoints.merge(&seeds), settings)
}

/// `E{φ(Y)}` for `Y ~ N(0, σ²)`.
pub fn gaussian_expect<T: Real, F: Fn(T) -> T>(
    phi: F,
    variance: T,
    breakpoints: &BreakpointSet<T>,
    settings: &QuadratureSettings<T>,
) -> Result<Estimate<T>> {
    gaussian_integral(phi, variance, breakpoints, settings).map(Estimate::from)
}

/// `E{φ(Y)}` for `Y` a zero-mean Gaussian mixture: `Σ β_l E_l{φ}`.
pub fn mixture_expect<T: Real, F: Fn(T) -> T>(
    phi: F,
    mixture: &crate::distributions::MixtureSpec<T>,
    breakpoints: &BreakpointSet<T>,
    settings: &QuadratureSettings<T>,
) -> Result<Estimate<T>> {
    let mut total = T::zero();
    for (w, v) in mixture.components() {
        if w == T::zero() {
            continue;
        }
        total = total + w * gaussian_integral(&phi, v, breakpoints, settings)?.value;
    }
    Ok(Estimate::exact(total))
}
