use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nlt_core::gains::{gains_analytic, gains_empirical};
use nlt_core::metrics::{metric_set, mutual_information_histogram};
use nlt_core::nonlinearities::optimal_blanker_threshold;
use nlt_core::scalar::{db_to_ratio, nats_to_bits};
use nlt_core::{McSettings, MiSettings, MiTarget, Nonlinearity, QuadratureSettings, Scenario};

use crate::config::{EngineKind, ExperimentConfig, NonlinearityConfig, SweepVariable};
use crate::error::Result;

/// One grid point evaluated for one nonlinearity. Capacities are in bits;
/// `None` is a degenerate or failed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub variable: String,
    pub value: f64,
    pub g: String,
    pub threshold: Option<f64>,
    pub k_y: Option<f64>,
    pub k_y_se: Option<f64>,
    pub k_x: Option<f64>,
    pub k_x_se: Option<f64>,
    pub k_n: Option<f64>,
    pub k_n_se: Option<f64>,
    pub snr_x: Option<f64>,
    pub snr_y: Option<f64>,
    pub mse: Option<f64>,
    pub mse_u: Option<f64>,
    pub c_snr_x: Option<f64>,
    pub c_snr_y: Option<f64>,
    pub c_mse: Option<f64>,
    pub c_awgn: Option<f64>,
    pub mi_histogram: Option<f64>,
    pub flags: Vec<String>,
}

/// CSV column order. Fixed for every experiment.
pub const COLUMNS: [&str; 20] = [
    "variable",
    "value",
    "g",
    "threshold",
    "k_y",
    "k_y_se",
    "k_x",
    "k_x_se",
    "k_n",
    "k_n_se",
    "snr_x",
    "snr_y",
    "mse",
    "mse_u",
    "c_snr_x",
    "c_snr_y",
    "c_mse",
    "c_awgn",
    "mi_histogram",
    "flags",
];

impl ResultRow {
    fn empty(variable: SweepVariable, value: f64, g: String) -> Self {
        Self {
            variable: variable.name().to_string(),
            value,
            g,
            threshold: None,
            k_y: None,
            k_y_se: None,
            k_x: None,
            k_x_se: None,
            k_n: None,
            k_n_se: None,
            snr_x: None,
            snr_y: None,
            mse: None,
            mse_u: None,
            c_snr_x: None,
            c_snr_y: None,
            c_mse: None,
            c_awgn: None,
            mi_histogram: None,
            flags: Vec::new(),
        }
    }

    /// Cells in [`COLUMNS`] order, with `NA` for missing values.
    pub fn cells(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.filter(|x| x.is_finite()).map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut out = vec![self.variable.clone(), self.value.to_string(), self.g.clone()];
        out.extend(
            [
                self.threshold,
                self.k_y,
                self.k_y_se,
                self.k_x,
                self.k_x_se,
                self.k_n,
                self.k_n_se,
                self.snr_x,
                self.snr_y,
                self.mse,
                self.mse_u,
                self.c_snr_x,
                self.c_snr_y,
                self.c_mse,
                self.c_awgn,
                self.mi_histogram,
            ]
            .map(num),
        );
        out.push(self.flags.join(";"));
        out
    }
}

fn quadrature(cfg: &ExperimentConfig) -> QuadratureSettings {
    QuadratureSettings {
        relative_tolerance: cfg.engine.relative_tolerance,
        support_multiple: cfg.engine.support_multiple,
        ..QuadratureSettings::default()
    }
}

/// Scenario at one grid point, with the identity as a placeholder `g`.
pub fn scenario_at(cfg: &ExperimentConfig, value: f64) -> Result<Scenario> {
    let s = &cfg.scenario;
    let rho_p = match cfg.sweep.variable {
        SweepVariable::RhoP => Some(value),
        _ => s.rho_p,
    };
    if cfg.sweep.variable == SweepVariable::SnrDb {
        let pn = s.noise.stated_variance().unwrap_or(1.0);
        let px = db_to_ratio(value) * pn;
        let source = s.source.build(Some(px))?;
        let noise = s.noise.build(Some(pn))?;
        return Ok(Scenario::new(source, noise, s.rho_xn, Nonlinearity::Identity)?);
    }
    let p_y = s.p_y.expect("validated");
    let rho_p = rho_p.expect("validated");
    if s.rho_xn != 0.0 {
        return Ok(Scenario::correlated_gaussian(p_y, rho_p, s.rho_xn, Nonlinearity::Identity)?);
    }
    let source = s.source.build(Some(rho_p * p_y))?;
    let noise = s.noise.build(Some((1.0 - rho_p) * p_y))?;
    Ok(Scenario::independent(source, noise, Nonlinearity::Identity))
}

fn label(g: &NonlinearityConfig) -> &'static str {
    match g {
        NonlinearityConfig::Identity => "identity",
        NonlinearityConfig::Scale { .. } => "scale",
        NonlinearityConfig::SoftLimiter { .. } => "soft_limiter",
        NonlinearityConfig::Blanker { y_th: None } => "blanker_opt",
        NonlinearityConfig::Blanker { .. } => "blanker",
        NonlinearityConfig::MixtureMmse => "mixture_mmse",
        NonlinearityConfig::Tabulated { .. } => "tabulated",
    }
}

/// Instantiates `g` for the scenario; returns it with any flags raised.
fn instantiate(
    cfg: &ExperimentConfig,
    g: &NonlinearityConfig,
    scenario: &Scenario,
    value: f64,
) -> Result<(Nonlinearity, Vec<String>)> {
    let swept = (cfg.sweep.variable == SweepVariable::YTh).then_some(value);
    let mut flags = Vec::new();
    let mixture_noise = || {
        scenario
            .noise()
            .as_mixture()
            .filter(|_| scenario.source().is_gaussian() && scenario.correlation() == 0.0)
            .ok_or_else(|| {
                nlt_core::Error::Unsupported("needs a Gaussian source in independent Gaussian-mixture noise".into())
            })
    };
    let nl = match g {
        NonlinearityConfig::Identity => Nonlinearity::Identity,
        NonlinearityConfig::Scale { a } => Nonlinearity::scale(*a)?,
        NonlinearityConfig::SoftLimiter { y_th } => Nonlinearity::soft_limiter(swept.unwrap_or(*y_th))?,
        NonlinearityConfig::Blanker { y_th } => match swept.or(*y_th) {
            Some(t) => Nonlinearity::blanker(t)?,
            None => {
                let best = optimal_blanker_threshold(scenario.source_power(), &mixture_noise()?, &quadrature(cfg))?;
                if !best.confident {
                    flags.push("threshold_at_search_edge".to_string());
                }
                Nonlinearity::blanker(best.threshold)?
            }
        },
        NonlinearityConfig::MixtureMmse => Nonlinearity::mixture_mmse(scenario.source_power(), &mixture_noise()?)?,
        NonlinearityConfig::Tabulated { knots, values } => Nonlinearity::tabulated(knots.clone(), values.clone())?,
    };
    Ok((nl, flags))
}

fn evaluate(cfg: &ExperimentConfig, scenario: &Scenario, row: &mut ResultRow) -> Result<()> {
    let gains = match cfg.engine.kind {
        EngineKind::MonteCarlo => {
            let mc = McSettings::new(cfg.engine.samples, cfg.seed).with_batches(cfg.engine.batches);
            gains_empirical(scenario, &mc)?.gains()
        }
        EngineKind::Analytic => gains_analytic(scenario, &quadrature(cfg))?,
    };
    let m = metric_set(scenario, &gains).in_bits();
    let se = |e: nlt_core::Estimate| (cfg.engine.kind == EngineKind::MonteCarlo).then_some(e.std_error);
    row.k_y = Some(gains.k_y.value);
    row.k_y_se = se(gains.k_y);
    row.k_x = Some(gains.k_x.value);
    row.k_x_se = se(gains.k_x);
    row.k_n = Some(gains.k_n.value);
    row.k_n_se = se(gains.k_n);
    row.snr_x = m.snr_x;
    row.snr_y = m.snr_y;
    row.mse = Some(m.mse);
    row.mse_u = m.mse_u;
    row.c_snr_x = m.c_snr_x;
    row.c_snr_y = m.c_snr_y;
    row.c_mse = m.c_mse;
    row.c_awgn = Some(m.c_awgn);
    for (name, v) in [("snr_x", m.snr_x), ("snr_y", m.snr_y), ("mse_u", m.mse_u), ("c_mse", m.c_mse)] {
        if v.is_none() {
            row.flags.push(format!("{name}_degenerate"));
        }
    }
    Ok(())
}

fn mutual_information(cfg: &ExperimentConfig, scenario: &Scenario, target: MiTarget) -> Result<(f64, u64)> {
    let mi = cfg.mi.expect("caller checked");
    let settings = MiSettings {
        bins_per_axis: mi.bins,
        range_multiple: mi.range_multiple,
    };
    let mc = McSettings::new(mi.samples, cfg.seed).with_batches(cfg.engine.batches);
    let est = mutual_information_histogram(scenario, target, &settings, &mc)?;
    Ok((nats_to_bits(est.value), est.clamped))
}

fn record_mi(row: &mut ResultRow, mi: &Result<(f64, u64)>) {
    match mi {
        Ok((v, clamped)) => {
            row.mi_histogram = Some(*v);
            if *clamped > 0 {
                row.flags.push(format!("mi_clamped={clamped}"));
            }
        }
        Err(e) => row.flags.push(format!("mi_error: {e}")),
    }
}

/// Rows for one grid point, one per configured nonlinearity.
fn grid_point(cfg: &ExperimentConfig, value: f64) -> Vec<ResultRow> {
    let variable = cfg.sweep.variable;
    let gs = &cfg.scenario.nonlinearities;
    let base = match scenario_at(cfg, value) {
        Ok(s) => s,
        Err(e) => {
            return gs
                .iter()
                .map(|g| {
                    let mut row = ResultRow::empty(variable, value, label(g).to_string());
                    row.flags.push(format!("error: {e}"));
                    row
                })
                .collect();
        }
    };
    // (X, Y) does not depend on g, so its histogram is shared by the rows.
    let shared_mi = cfg
        .mi
        .filter(|m| m.target == MiTarget::Input)
        .map(|_| mutual_information(cfg, &base, MiTarget::Input));

    gs.iter()
        .map(|g| {
            let mut row = ResultRow::empty(variable, value, label(g).to_string());
            let outcome = instantiate(cfg, g, &base, value).and_then(|(nl, flags)| {
                row.threshold = nl.threshold();
                row.flags.extend(flags);
                let s = base.with_nonlinearity(nl);
                evaluate(cfg, &s, &mut row)?;
                Ok(s)
            });
            match outcome {
                Ok(s) => match (&shared_mi, cfg.mi) {
                    (Some(mi), _) => record_mi(&mut row, mi),
                    (None, Some(m)) if m.target == MiTarget::Output => {
                        record_mi(&mut row, &mutual_information(cfg, &s, MiTarget::Output))
                    }
                    _ => {}
                },
                Err(e) => row.flags.push(format!("error: {e}")),
            }
            row
        })
        .collect()
}

/// Evaluates every grid point. Points run in parallel; rows come back in grid
/// order and, within a point, in nonlinearity order. Every point uses the same
/// seed, so neighbouring rows share their random numbers.
pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    cfg.sweep
        .grid
        .par_iter()
        .map(|v| grid_point(cfg, *v))
        .collect::<Vec<_>>()
        .concat()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    const AWGN: &str = r#"
name = "awgn"
[scenario]
source = { kind = "gaussian" }
noise = { kind = "gaussian", variance = 1.0 }
nonlinearities = [{ kind = "identity" }, { kind = "mixture_mmse" }]
[sweep]
variable = "snr_db"
grid = [0.0, 10.0]
[engine]
kind = "analytic"
"#;

    #[test]
    fn analytic_awgn_rows() {
        let rows = run_sweep(&cfg(AWGN));
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].g, "identity");
        assert_eq!(rows[1].g, "mixture_mmse");
        let r = &rows[2];
        assert_eq!(r.value, 10.0);
        assert!((r.snr_x.unwrap() - 10.0).abs() < 1e-9);
        assert!((r.c_awgn.unwrap() - 0.5 * 11f64.log2()).abs() < 1e-12);
        // the Wiener filter reaches the AWGN bound through the MSE route
        assert!((rows[3].c_mse.unwrap() - 0.5 * 11f64.log2()).abs() < 1e-9);
        assert!(r.k_y_se.is_none());
        assert!(r.flags.is_empty(), "{:?}", r.flags);
    }

    #[test]
    fn unsupported_row_is_flagged_and_run_continues() {
        let text = AWGN.replace("kind = \"gaussian\" }\nnoise", "kind = \"laplace\" }\nnoise");
        let rows = run_sweep(&cfg(&text));
        assert_eq!(rows.len(), 4);
        assert!(rows[0].flags.iter().any(|f| f.starts_with("error")));
        assert!(rows[1].flags.iter().any(|f| f.starts_with("error")));
        assert_eq!(rows[1].cells()[4], "NA");
    }

    #[test]
    fn rho_p_sweep_splits_power() {
        let text = r#"
name = "split"
[scenario]
source = { kind = "uniform" }
noise = { kind = "triangular" }
p_y = 10.0
nonlinearities = [{ kind = "soft_limiter", y_th = 1.0 }]
[sweep]
variable = "rho_p"
grid = [0.25]
"#;
        let s = scenario_at(&cfg(text), 0.25).unwrap();
        assert!((s.source_power() - 2.5).abs() < 1e-12);
        assert!((s.noise_power() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_sweep_overrides_limiter() {
        let text = r#"
name = "th"
[scenario]
source = { kind = "gaussian" }
noise = { kind = "gaussian" }
p_y = 10.0
rho_p = 0.5
nonlinearities = [{ kind = "soft_limiter", y_th = 1.0 }]
[sweep]
variable = "y_th"
grid = [0.5, 2.0]
[engine]
kind = "analytic"
"#;
        let rows = run_sweep(&cfg(text));
        assert_eq!(rows[1].threshold, Some(2.0));
        assert!(rows[1].k_y.unwrap() > rows[0].k_y.unwrap());
    }

    #[test]
    fn na_rendering() {
        let row = ResultRow::empty(SweepVariable::RhoP, 0.5, "identity".into());
        let cells = row.cells();
        assert_eq!(cells.len(), COLUMNS.len());
        assert!(cells[3..19].iter().all(|c| c == "NA"));
    }
}
