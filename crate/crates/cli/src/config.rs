use serde::{Deserialize, Serialize};

use nlt_core::{ClassAParams, MixtureSpec, ScalarDistribution};

use crate::error::{CliError, Result};

/// One experiment: scenario, sweep, engine and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub mi: Option<MiConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: DistConfig,
    pub noise: DistConfig,
    /// Correlation coefficient between `X` and `N`; Gaussian pairs only.
    #[serde(default)]
    pub rho_xn: f64,
    /// Total input power, used by `rho_p` and `y_th` sweeps.
    #[serde(default)]
    pub p_y: Option<f64>,
    /// Power fraction `P_X/(P_X + P_N)` when it is not the swept variable.
    #[serde(default)]
    pub rho_p: Option<f64>,
    /// Nonlinearities evaluated at every grid point, one row each.
    pub nonlinearities: Vec<NonlinearityConfig>,
}

/// Distribution fragment. A missing variance is filled in by the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistConfig {
    Gaussian {
        variance: Option<f64>,
    },
    Laplace {
        variance: Option<f64>,
    },
    Uniform {
        variance: Option<f64>,
    },
    Triangular {
        variance: Option<f64>,
    },
    ClassA {
        #[serde(rename = "A")]
        a: f64,
        gamma: f64,
        variance: Option<f64>,
    },
    Mixture {
        weights: Vec<f64>,
        variances: Vec<f64>,
    },
}

impl DistConfig {
    /// Variance given in the fragment itself.
    pub fn stated_variance(&self) -> Option<f64> {
        match self {
            Self::Gaussian { variance }
            | Self::Laplace { variance }
            | Self::Uniform { variance }
            | Self::Triangular { variance }
            | Self::ClassA { variance, .. } => *variance,
            Self::Mixture { weights, variances } => Some(weights.iter().zip(variances).map(|(w, v)| w * v).sum()),
        }
    }

    /// Builds the law, rescaled to `variance` when one is supplied.
    pub fn build(&self, variance: Option<f64>) -> Result<ScalarDistribution> {
        let v = variance.or(self.stated_variance()).unwrap_or(1.0);
        let d = match self {
            Self::Gaussian { .. } => ScalarDistribution::gaussian(v)?,
            Self::Laplace { .. } => ScalarDistribution::laplace(v)?,
            Self::Uniform { .. } => ScalarDistribution::uniform(v)?,
            Self::Triangular { .. } => ScalarDistribution::triangular(v)?,
            Self::ClassA { a, gamma, .. } => ScalarDistribution::class_a(&ClassAParams::new(*a, *gamma, v))?,
            Self::Mixture { weights, variances } => {
                let spec = MixtureSpec::new(weights.clone(), variances.clone())?;
                ScalarDistribution::mixture(spec.with_total_variance(v)?)
            }
        };
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Identity,
    Scale {
        a: f64,
    },
    SoftLimiter {
        y_th: f64,
    },
    /// Without `y_th` the MSE-optimal threshold is searched at every point.
    Blanker {
        y_th: Option<f64>,
    },
    /// Conditional-mean estimator for the scenario's source and noise.
    MixtureMmse,
    Tabulated {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RhoP,
    SnrDb,
    YTh,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::RhoP => "rho_p",
            Self::SnrDb => "snr_db",
            Self::YTh => "y_th",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    MonteCarlo,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default)]
    pub kind: EngineKind,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_rel_tol")]
    pub relative_tolerance: f64,
    #[serde(default = "default_support")]
    pub support_multiple: f64,
}

fn default_samples() -> usize {
    1_000_000
}
fn default_batches() -> usize {
    100
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_support() -> f64 {
    10.0
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            kind: EngineKind::MonteCarlo,
            samples: default_samples(),
            batches: default_batches(),
            relative_tolerance: default_rel_tol(),
            support_multiple: default_support(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiConfig {
    /// `input` histograms `(X, Y)`, `output` histograms `(X, g(Y))`.
    #[serde(default = "default_target")]
    pub target: nlt_core::MiTarget,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_range")]
    pub range_multiple: f64,
}

fn default_target() -> nlt_core::MiTarget {
    nlt_core::MiTarget::Input
}
fn default_bins() -> usize {
    512
}
fn default_range() -> f64 {
    8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    #[default]
    None,
    Gains,
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub plot: PlotKind,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("`{field}`: {why}")));
        let grid = &self.sweep.grid;
        if grid.is_empty() {
            return bad("sweep.grid", "must not be empty");
        }
        if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep.grid", "must be finite and strictly increasing");
        }
        if self.scenario.nonlinearities.is_empty() {
            return bad("scenario.nonlinearities", "need at least one entry");
        }
        let s = &self.scenario;
        match self.sweep.variable {
            SweepVariable::RhoP => {
                if s.p_y.is_none() {
                    return bad("scenario.p_y", "required for a rho_p sweep");
                }
                if grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return bad("sweep.grid", "rho_p values must lie in (0, 1)");
                }
            }
            SweepVariable::YTh => {
                if s.p_y.is_none() || s.rho_p.is_none() {
                    return bad("scenario", "a y_th sweep needs p_y and rho_p");
                }
                if grid.iter().any(|t| !(*t > 0.0)) {
                    return bad("sweep.grid", "thresholds must be positive");
                }
                let thresholded = s.nonlinearities.iter().all(|g| {
                    matches!(g, NonlinearityConfig::SoftLimiter { .. } | NonlinearityConfig::Blanker { .. })
                });
                if !thresholded {
                    return bad("scenario.nonlinearities", "a y_th sweep needs soft limiters or blankers");
                }
            }
            SweepVariable::SnrDb => {}
        }
        if s.rho_xn != 0.0 {
            let gaussian = |d: &DistConfig| matches!(d, DistConfig::Gaussian { .. });
            if !(gaussian(&s.source) && gaussian(&s.noise)) {
                return bad("scenario.rho_xn", "correlation is only supported for Gaussian pairs");
            }
            if !(s.rho_xn.abs() < 1.0) {
                return bad("scenario.rho_xn", "must lie in (-1, 1)");
            }
        }
        if self.engine.samples < self.engine.batches || self.engine.batches < 2 {
            return bad("engine.samples", "need at least two batches and one sample per batch");
        }
        if let Some(mi) = &self.mi {
            if mi.samples < nlt_core::metrics::MIN_MI_SAMPLES {
                return bad("mi.samples", "histogram MI needs at least 100000 samples");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
[scenario]
source = { kind = "gaussian" }
noise = { kind = "class_a", A = 0.01, gamma = 0.01 }
nonlinearities = [{ kind = "blanker" }, { kind = "mixture_mmse" }]
[sweep]
variable = "snr_db"
grid = [-10.0, 0.0]
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.engine, EngineConfig::default());
        assert_eq!(c.scenario.nonlinearities[0], NonlinearityConfig::Blanker { y_th: None });
        assert!(matches!(c.scenario.noise, DistConfig::ClassA { a, .. } if a == 0.01));
    }

    #[test]
    fn unknown_field_reports_its_name() {
        let err = ExperimentConfig::from_toml(&MINIMAL.replace("grid =", "gird =")).unwrap_err();
        assert!(err.to_string().contains("gird"), "{err}");
    }

    #[test]
    fn unsorted_grid_rejected() {
        let err = ExperimentConfig::from_toml(&MINIMAL.replace("[-10.0, 0.0]", "[0.0, -10.0]")).unwrap_err();
        assert!(err.to_string().contains("sweep.grid"));
    }

    #[test]
    fn correlation_needs_gaussians() {
        let text = MINIMAL.replace("[scenario]", "[scenario]\nrho_xn = 0.3");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn class_a_fragment_keeps_total_variance() {
        let d = DistConfig::ClassA {
            a: 0.01,
            gamma: 0.01,
            variance: None,
        };
        assert!((d.build(Some(4.0)).unwrap().variance() - 4.0).abs() < 1e-12);
        assert!((d.build(None).unwrap().variance() - 1.0).abs() < 1e-12);
    }
}
