//! Per-date orchestration of the cosine pipeline: moment pass, support,
//! characteristic function, expansion, metrics, degenerate bypass, and
//! shock-and-revalue sensitivities.

use serde::{Deserialize, Serialize};

use crate::cos::{
    characteristic_function, cos_support, ee, exposure_moments, is_degenerate_sigma, pfe,
    CosExpansion, ExposureTarget, PfeFlag, SpectralFilter,
};
use crate::error::Result;
use crate::instruments::{
    deterministic_set_values, portfolio_value_grid, DateBook, ValuationSlices,
};
use crate::model::{state_distribution, ModelParams, StateDistribution};
use crate::portfolio::Portfolio;
use crate::quadrature::{QuadratureConfig, TensorGrid};
use crate::report::{RiskReport, RiskRow};

/// Absolute 1bp shock on the initial shifted short rates.
pub const RATE_BUMP: f64 = 1e-4;
/// Relative 1% shock on the initial FX rate.
pub const FX_REL_BUMP: f64 = 0.01;

/// Grid size of the CDF clamp-diagnostic scan.
const CDF_SCAN_POINTS: usize = 512;

fn d_terms() -> usize {
    32
}
fn d_quad() -> usize {
    40
}
fn d_quad_mom() -> usize {
    20
}
fn d_tol() -> f64 {
    QuadratureConfig::DEFAULT_TOL
}
fn d_width() -> f64 {
    8.0
}
fn d_alpha() -> f64 {
    0.975
}
fn d_filter() -> u32 {
    2
}
fn d_dates() -> usize {
    20
}

/// Engine settings; the JSON keys follow the settings-block schema
/// {K, J, J_mom, TOL, L, alpha, filter_p, dates}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosSettings {
    #[serde(rename = "K", default = "d_terms")]
    pub terms: usize,
    #[serde(rename = "J", default = "d_quad")]
    pub quad_points: usize,
    #[serde(rename = "J_mom", default = "d_quad_mom")]
    pub quad_points_moments: usize,
    #[serde(rename = "TOL", default = "d_tol")]
    pub tail_tol: f64,
    #[serde(rename = "L", default = "d_width")]
    pub width_mult: f64,
    #[serde(rename = "alpha", default = "d_alpha")]
    pub alpha: f64,
    #[serde(rename = "filter_p", default = "d_filter")]
    pub filter_order: u32,
    #[serde(rename = "dates", default = "d_dates")]
    pub dates: usize,
}

impl Default for CosSettings {
    fn default() -> Self {
        CosSettings {
            terms: d_terms(),
            quad_points: d_quad(),
            quad_points_moments: d_quad_mom(),
            tail_tol: d_tol(),
            width_mult: d_width(),
            alpha: d_alpha(),
            filter_order: d_filter(),
            dates: d_dates(),
        }
    }
}

/// Reporting level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Netting,
    Counterparty,
}

/// Result of building one exposure target at one date.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    /// Exposure is effectively deterministic (t = 0 or vanishing
    /// dispersion); `value` is the netting-set MtM, respectively the
    /// already-floored counterparty exposure.
    Degenerate { value: f64 },
    Cos { expansion: CosExpansion },
}

impl RunOutcome {
    pub fn expansion(&self) -> Option<&CosExpansion> {
        match self {
            RunOutcome::Cos { expansion } => Some(expansion),
            RunOutcome::Degenerate { .. } => None,
        }
    }
}

/// PFE of an outcome. Degenerate netting values floor at zero; the
/// degenerate counterparty value is already an exposure.
pub fn outcome_pfe(outcome: &RunOutcome, alpha: f64) -> Result<(f64, PfeFlag)> {
    match outcome {
        RunOutcome::Degenerate { value } => Ok((value.max(0.0), PfeFlag::Converged)),
        RunOutcome::Cos { expansion } => {
            let out = pfe(expansion, alpha)?;
            Ok((out.value, out.flag))
        }
    }
}

/// EE of an outcome via the closed form; the clamp magnitude reports any
/// tiny negative excursion that was zeroed.
pub fn outcome_ee(outcome: &RunOutcome) -> (f64, f64) {
    match outcome {
        RunOutcome::Degenerate { value } => (value.max(0.0), 0.0),
        RunOutcome::Cos { expansion } => {
            let out = ee(expansion);
            (out.value, out.clamp)
        }
    }
}

/// Everything reusable at one (portfolio, params, t, settings) node:
/// state law, pricing book, grids, and valuation slices for both the
/// moment pass and the main pass.
pub struct DateEngine {
    pub t: f64,
    pub settings: CosSettings,
    pub dist: StateDistribution,
    pub set_ids: Vec<String>,
    /// Deterministic per-set MtM values; present only for degenerate
    /// dates, where grids are skipped entirely.
    det_values: Option<Vec<f64>>,
    grids: Option<Grids>,
    /// Leg-valuation calls of the two grid passes.
    pub pricing_calls: u64,
}

struct Grids {
    main: TensorGrid,
    mom: TensorGrid,
    slices_mom: ValuationSlices,
    slices_main: ValuationSlices,
}

impl DateEngine {
    pub fn new(
        portfolio: &Portfolio,
        params: &ModelParams,
        t: f64,
        settings: &CosSettings,
    ) -> Result<DateEngine> {
        let dist = state_distribution(params, t)?;
        if dist.degenerate {
            let det = deterministic_set_values(portfolio, params, &dist);
            let (set_ids, values): (Vec<_>, Vec<_>) = det.into_iter().unzip();
            return Ok(DateEngine {
                t,
                settings: *settings,
                dist,
                set_ids,
                det_values: Some(values),
                grids: None,
                pricing_calls: 0,
            });
        }
        let main = TensorGrid::build(&QuadratureConfig::new(
            settings.quad_points,
            settings.tail_tol,
        )?)?;
        let mom = TensorGrid::build(&QuadratureConfig::new(
            settings.quad_points_moments,
            settings.tail_tol,
        )?)?;
        let book = DateBook::build(portfolio, params, t);
        let slices_mom = portfolio_value_grid(&book, &dist, &mom);
        let slices_main = portfolio_value_grid(&book, &dist, &main);
        let pricing_calls = slices_mom.pricing_calls + slices_main.pricing_calls;
        Ok(DateEngine {
            t,
            settings: *settings,
            dist,
            set_ids: book.set_ids,
            det_values: None,
            grids: Some(Grids {
                main,
                mom,
                slices_mom,
                slices_main,
            }),
            pricing_calls,
        })
    }

    pub fn is_degenerate_date(&self) -> bool {
        self.det_values.is_some()
    }

    /// Netting-set outcome: expansion of the unfloored MtM.
    pub fn netting_outcome(&self, set: usize) -> Result<RunOutcome> {
        if let Some(det) = &self.det_values {
            return Ok(RunOutcome::Degenerate { value: det[set] });
        }
        let grids = self.grids.as_ref().expect("grids exist for live dates");
        let mom_tensor = grids.slices_mom.net_tensor(set);
        let (mu, sigma) = exposure_moments(&mom_tensor, &grids.mom)?;
        if is_degenerate_sigma(sigma) {
            return Ok(RunOutcome::Degenerate { value: mu });
        }
        let support = cos_support(mu, sigma, self.settings.width_mult, false)?;
        let tensor = grids.slices_main.net_tensor(set);
        let phi = characteristic_function(
            &tensor,
            &grids.main,
            self.settings.terms,
            support.omega_step(),
        )?;
        let expansion = CosExpansion::from_chf(&phi, support, None, ExposureTarget::NettingMtm)?;
        Ok(RunOutcome::Cos { expansion })
    }

    /// Counterparty outcome: filtered expansion of the summed floored
    /// per-set values on a support pinned at a = 0.
    pub fn counterparty_outcome(&self) -> Result<RunOutcome> {
        if let Some(det) = &self.det_values {
            let value = det.iter().map(|v| v.max(0.0)).sum();
            return Ok(RunOutcome::Degenerate { value });
        }
        let grids = self.grids.as_ref().expect("grids exist for live dates");
        let mom_tensor = grids.slices_mom.counterparty_tensor();
        let (mu, sigma) = exposure_moments(&mom_tensor, &grids.mom)?;
        if is_degenerate_sigma(sigma) {
            return Ok(RunOutcome::Degenerate { value: mu });
        }
        let support = cos_support(mu, sigma, self.settings.width_mult, true)?;
        let tensor = grids.slices_main.counterparty_tensor();
        let phi = characteristic_function(
            &tensor,
            &grids.main,
            self.settings.terms,
            support.omega_step(),
        )?;
        let filter = SpectralFilter::exponential(self.settings.filter_order)?;
        let expansion = CosExpansion::from_chf(
            &phi,
            support,
            Some(filter),
            ExposureTarget::CounterpartyExposure,
        )?;
        Ok(RunOutcome::Cos { expansion })
    }

    /// EE per netting set, in `set_ids` order.
    pub fn netting_ees(&self) -> Result<Vec<f64>> {
        (0..self.set_ids.len())
            .map(|s| Ok(outcome_ee(&self.netting_outcome(s)?).0))
            .collect()
    }
}

/// Per-set metrics at one date.
#[derive(Debug, Clone)]
pub struct NettingMetrics {
    pub set_id: String,
    pub pfe: f64,
    pub pfe_flag: PfeFlag,
    pub ee: f64,
    pub ee_clamp: f64,
    /// Largest [0,1]-clamp seen on a scan of the recovered CDF.
    pub cdf_excursion: f64,
}

/// Counterparty metrics at one date. The EE is the sum of per-set EEs.
#[derive(Debug, Clone)]
pub struct CounterpartyMetrics {
    pub pfe: f64,
    pub pfe_flag: PfeFlag,
    pub ee: f64,
    /// Largest [0,1]-clamp seen on a scan of the recovered CDF.
    pub cdf_excursion: f64,
}

pub fn netting_metrics(engine: &DateEngine, alpha: f64) -> Result<Vec<NettingMetrics>> {
    let mut out = Vec::with_capacity(engine.set_ids.len());
    for (s, set_id) in engine.set_ids.iter().enumerate() {
        let outcome = engine.netting_outcome(s)?;
        let (pfe_v, flag) = outcome_pfe(&outcome, alpha)?;
        let (ee_v, clamp) = outcome_ee(&outcome);
        let excursion = outcome
            .expansion()
            .map_or(0.0, |e| e.max_cdf_excursion(CDF_SCAN_POINTS));
        out.push(NettingMetrics {
            set_id: set_id.clone(),
            pfe: pfe_v,
            pfe_flag: flag,
            ee: ee_v,
            ee_clamp: clamp,
            cdf_excursion: excursion,
        });
    }
    Ok(out)
}

pub fn counterparty_metrics(engine: &DateEngine, alpha: f64) -> Result<CounterpartyMetrics> {
    let outcome = engine.counterparty_outcome()?;
    let (pfe_v, flag) = outcome_pfe(&outcome, alpha)?;
    let excursion = outcome
        .expansion()
        .map_or(0.0, |e| e.max_cdf_excursion(CDF_SCAN_POINTS));
    let ee: f64 = engine.netting_ees()?.iter().sum();
    Ok(CounterpartyMetrics {
        pfe: pfe_v,
        pfe_flag: flag,
        ee,
        cdf_excursion: excursion,
    })
}

/// Shock-and-revalue EE sensitivities: forward differences for a 1bp
/// absolute shift of each initial shifted short rate and a 1% relative
/// shift of the initial FX rate. The counterparty sensitivity is the
/// exact sum over netting sets.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub set_ids: Vec<String>,
    /// Per set: [dEE/dx_d0, dEE/dx_f0, dEE/dX0].
    pub per_set: Vec<[f64; 3]>,
    pub counterparty: [f64; 3],
    /// Base per-set EEs (reusable by callers that also report EE).
    pub base_ee: Vec<f64>,
}

pub fn ee_sensitivities(
    portfolio: &Portfolio,
    params: &ModelParams,
    t: f64,
    settings: &CosSettings,
) -> Result<SensitivityReport> {
    let base_engine = DateEngine::new(portfolio, params, t, settings)?;
    let base_ee = base_engine.netting_ees()?;
    let shifted = [
        params.with_x_d0_bumped(RATE_BUMP),
        params.with_x_f0_bumped(RATE_BUMP),
        params.with_x0_scaled(FX_REL_BUMP),
    ];
    let steps = [RATE_BUMP, RATE_BUMP, FX_REL_BUMP * params.x0];
    let n_sets = base_engine.set_ids.len();
    let mut per_set = vec![[0.0; 3]; n_sets];
    for (which, (p_shift, h)) in shifted.iter().zip(&steps).enumerate() {
        let engine = DateEngine::new(portfolio, p_shift, t, settings)?;
        let ees = engine.netting_ees()?;
        for s in 0..n_sets {
            per_set[s][which] = (ees[s] - base_ee[s]) / h;
        }
    }
    let mut counterparty = [0.0; 3];
    for row in &per_set {
        for (slot, v) in counterparty.iter_mut().zip(row) {
            *slot += v;
        }
    }
    Ok(SensitivityReport {
        set_ids: base_engine.set_ids,
        per_set,
        counterparty,
        base_ee,
    })
}

/// Equidistant exposure dates {0, ..., t_max}.
pub fn date_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "date grid needs at least 2 points");
    (0..n)
        .map(|i| t_max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Which metrics a run should produce.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricRequest {
    pub pfe: bool,
    pub ee: bool,
    pub sens: bool,
}

/// Runs the cosine engine over a date grid and assembles the report.
/// Per-date compute time is recorded; file I/O happens elsewhere.
/// Clamp diagnostics aggregate across dates so callers can warn when an
/// excursion passes 1e-6.
pub fn run_dates(
    portfolio: &Portfolio,
    params: &ModelParams,
    settings: &CosSettings,
    level: Level,
    dates: &[f64],
    req: MetricRequest,
) -> Result<RiskReport> {
    let mut rows = Vec::new();
    let mut max_cdf_excursion = 0.0_f64;
    let mut max_ee_clamp = 0.0_f64;
    for &t in dates {
        let started = std::time::Instant::now();
        let engine = DateEngine::new(portfolio, params, t, settings)?;
        let sens = if req.sens {
            Some(ee_sensitivities(portfolio, params, t, settings)?)
        } else {
            None
        };
        match level {
            Level::Netting => {
                let metrics = netting_metrics(&engine, settings.alpha)?;
                let cpu = started.elapsed().as_secs_f64() / metrics.len().max(1) as f64;
                for (s, m) in metrics.into_iter().enumerate() {
                    max_cdf_excursion = max_cdf_excursion.max(m.cdf_excursion);
                    max_ee_clamp = max_ee_clamp.max(m.ee_clamp);
                    rows.push(RiskRow {
                        t,
                        level: format!("netting:{}", m.set_id),
                        pfe: req.pfe.then_some(m.pfe),
                        ee: req.ee.then_some(m.ee),
                        sens: sens.as_ref().map(|r| r.per_set[s]),
                        cpu_seconds: cpu,
                        method: "COS".into(),
                    });
                }
            }
            Level::Counterparty => {
                let m = counterparty_metrics(&engine, settings.alpha)?;
                max_cdf_excursion = max_cdf_excursion.max(m.cdf_excursion);
                rows.push(RiskRow {
                    t,
                    level: "counterparty".into(),
                    pfe: req.pfe.then_some(m.pfe),
                    ee: req.ee.then_some(m.ee),
                    sens: sens.as_ref().map(|r| r.counterparty),
                    cpu_seconds: started.elapsed().as_secs_f64(),
                    method: "COS".into(),
                });
            }
        }
    }
    Ok(RiskReport {
        rows,
        settings: serde_json::to_value(settings).expect("settings serialize"),
        max_cdf_excursion,
        max_ee_clamp,
    })
}
