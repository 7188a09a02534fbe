//! Linear IR/FX trades decomposed into single-currency deterministic
//! cash-flow legs, plus state and grid valuation.
//!
//! Every product here prices as a signed sum of zero-coupon bonds with an
//! FX conversion for foreign legs:
//!
//! ```text
//! V(t, state) = sum_dom amount * P_d(t, T) + X_t * sum_fgn amount * P_f(t, T)
//! ```
//!
//! Float legs collapse to notional exchanges (single-curve identity), so
//! FRAs, swaps, FX forwards and cross-currency swaps all reduce to fixed
//! flows. Grid valuation exploits the triangular state mapping: domestic
//! legs vary only along the first grid axis, foreign legs along the first
//! two, and the FX factor separates into per-axis exponentials, which
//! keeps the pricing-call count at `N_d J + N_f J^2` instead of
//! `(N_d + N_f) J^3`.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::model::{zcb_ab, Currency, ModelParams, StateDistribution};
use crate::quadrature::TensorGrid;

/// A deterministic payment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CashFlow {
    pub time: f64,
    pub amount: f64,
}

/// Single-currency stream of deterministic payments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub currency: Currency,
    pub flows: Vec<CashFlow>,
}

impl Leg {
    fn validate(&self) -> Result<()> {
        if self.flows.is_empty() {
            return Err(EngineError::InvalidSchedule("leg has no flows".into()));
        }
        let mut prev = 0.0;
        for f in &self.flows {
            if !(f.time > prev) {
                return Err(EngineError::InvalidSchedule(format!(
                    "payment times must be strictly increasing and positive, got {}",
                    f.time
                )));
            }
            if !f.amount.is_finite() {
                return Err(EngineError::InvalidSchedule("non-finite amount".into()));
            }
            prev = f.time;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TradeKind {
    #[serde(rename = "FRA")]
    Fra,
    #[serde(rename = "IRS")]
    Irs,
    #[serde(rename = "FXForward")]
    FxForward,
    #[serde(rename = "CCS")]
    Ccs,
}

impl TradeKind {
    pub fn label(&self) -> &'static str {
        match self {
            TradeKind::Fra => "FRA",
            TradeKind::Irs => "IRS",
            TradeKind::FxForward => "FXForward",
            TradeKind::Ccs => "CCS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Annual,
    Semiannual,
    Quarterly,
}

impl Frequency {
    pub fn year_fraction(&self) -> f64 {
        match self {
            Frequency::Annual => 1.0,
            Frequency::Semiannual => 0.5,
            Frequency::Quarterly => 0.25,
        }
    }
}

/// A booked trade: contractual terms plus the derived cash-flow legs.
///
/// The serialized form carries the terms only; legs are rebuilt
/// deterministically on load, so save/load round-trips are lossless.
/// The sign of `notional` encodes direction: positive means payer-of-fixed
/// (FRA/IRS), long the foreign currency (FXForward), or receive-foreign
/// (CCS).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trade {
    pub id: String,
    pub kind: TradeKind,
    /// Leg currency for FRA/IRS; the foreign notional currency for
    /// FXForward/CCS (which always involve both currencies).
    pub currency: Currency,
    /// Signed notional in `currency` units.
    pub notional: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rate_foreign: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fx_strike: Option<f64>,
    pub start: f64,
    pub maturity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Frequency>,
    pub netting_set: String,
    #[serde(skip)]
    pub legs: Vec<Leg>,
}

/// Fixed-leg payment schedule: `start + i * tau` for i = 1..=n with
/// `start + n * tau = maturity`. Rejects non-aligned maturities.
pub fn payment_schedule(start: f64, maturity: f64, freq: Frequency) -> Result<Vec<f64>> {
    let tau = freq.year_fraction();
    let span = maturity - start;
    if !(span > 0.0) {
        return Err(EngineError::InvalidSchedule(format!(
            "maturity {maturity} must exceed start {start}"
        )));
    }
    let n = (span / tau).round();
    if n < 1.0 || ((span / tau) - n).abs() > 1e-9 {
        return Err(EngineError::InvalidSchedule(format!(
            "span {span} is not a whole number of {tau}-year periods"
        )));
    }
    let n = n as usize;
    let mut times: Vec<f64> = (1..=n).map(|i| start + i as f64 * tau).collect();
    times[n - 1] = maturity;
    Ok(times)
}

impl Trade {
    /// Forward rate agreement on `[start, maturity]` in one currency.
    /// Positive notional pays the fixed rate.
    pub fn fra(
        id: impl Into<String>,
        currency: Currency,
        notional: f64,
        fixed_rate: f64,
        start: f64,
        maturity: f64,
        netting_set: impl Into<String>,
    ) -> Result<Self> {
        Trade {
            id: id.into(),
            kind: TradeKind::Fra,
            currency,
            notional,
            fixed_rate: Some(fixed_rate),
            fixed_rate_foreign: None,
            fx_strike: None,
            start,
            maturity,
            frequency: None,
            netting_set: netting_set.into(),
            legs: Vec::new(),
        }
        .finalized()
    }

    /// Interest rate swap; positive notional pays fixed, receives float.
    #[allow(clippy::too_many_arguments)]
    pub fn irs(
        id: impl Into<String>,
        currency: Currency,
        notional: f64,
        fixed_rate: f64,
        start: f64,
        maturity: f64,
        frequency: Frequency,
        netting_set: impl Into<String>,
    ) -> Result<Self> {
        Trade {
            id: id.into(),
            kind: TradeKind::Irs,
            currency,
            notional,
            fixed_rate: Some(fixed_rate),
            fixed_rate_foreign: None,
            fx_strike: None,
            start,
            maturity,
            frequency: Some(frequency),
            netting_set: netting_set.into(),
            legs: Vec::new(),
        }
        .finalized()
    }

    /// FX forward: positive notional receives `notional` foreign units at
    /// maturity against `notional * fx_strike` domestic units.
    pub fn fx_forward(
        id: impl Into<String>,
        notional_foreign: f64,
        fx_strike: f64,
        maturity: f64,
        netting_set: impl Into<String>,
    ) -> Result<Self> {
        Trade {
            id: id.into(),
            kind: TradeKind::FxForward,
            currency: Currency::Foreign,
            notional: notional_foreign,
            fixed_rate: None,
            fixed_rate_foreign: None,
            fx_strike: Some(fx_strike),
            start: 0.0,
            maturity,
            frequency: None,
            netting_set: netting_set.into(),
            legs: Vec::new(),
        }
        .finalized()
    }

    /// Fixed-fixed cross-currency swap with notional exchange at start and
    /// maturity. Positive notional receives the foreign leg. The domestic
    /// notional is `notional * fx_strike`.
    #[allow(clippy::too_many_arguments)]
    pub fn ccs(
        id: impl Into<String>,
        notional_foreign: f64,
        fx_strike: f64,
        fixed_rate_domestic: f64,
        fixed_rate_foreign: f64,
        start: f64,
        maturity: f64,
        frequency: Frequency,
        netting_set: impl Into<String>,
    ) -> Result<Self> {
        Trade {
            id: id.into(),
            kind: TradeKind::Ccs,
            currency: Currency::Foreign,
            notional: notional_foreign,
            fixed_rate: Some(fixed_rate_domestic),
            fixed_rate_foreign: Some(fixed_rate_foreign),
            fx_strike: Some(fx_strike),
            start,
            maturity,
            frequency: Some(frequency),
            netting_set: netting_set.into(),
            legs: Vec::new(),
        }
        .finalized()
    }

    fn finalized(mut self) -> Result<Self> {
        self.rebuild_legs()?;
        Ok(self)
    }

    /// Rebuilds the cash-flow legs from the contractual terms. Called by
    /// the constructors and after deserialization.
    pub fn rebuild_legs(&mut self) -> Result<()> {
        let n = self.notional;
        let legs = match self.kind {
            TradeKind::Fra => {
                let k = self.fixed_rate.ok_or_else(|| missing(self, "fixed_rate"))?;
                let tau = self.maturity - self.start;
                vec![Leg {
                    currency: self.currency,
                    flows: vec![
                        CashFlow {
                            time: self.start,
                            amount: n,
                        },
                        CashFlow {
                            time: self.maturity,
                            amount: -n * (1.0 + k * tau),
                        },
                    ],
                }]
            }
            TradeKind::Irs => {
                let k = self.fixed_rate.ok_or_else(|| missing(self, "fixed_rate"))?;
                let freq = self.frequency.ok_or_else(|| missing(self, "frequency"))?;
                let times = payment_schedule(self.start, self.maturity, freq)?;
                let tau = freq.year_fraction();
                let float_leg = Leg {
                    currency: self.currency,
                    flows: vec![
                        CashFlow {
                            time: self.start,
                            amount: n,
                        },
                        CashFlow {
                            time: self.maturity,
                            amount: -n,
                        },
                    ],
                };
                let fixed_leg = Leg {
                    currency: self.currency,
                    flows: times
                        .iter()
                        .map(|&t| CashFlow {
                            time: t,
                            amount: -n * k * tau,
                        })
                        .collect(),
                };
                vec![float_leg, fixed_leg]
            }
            TradeKind::FxForward => {
                let strike = self.fx_strike.ok_or_else(|| missing(self, "fx_strike"))?;
                vec![
                    Leg {
                        currency: Currency::Foreign,
                        flows: vec![CashFlow {
                            time: self.maturity,
                            amount: n,
                        }],
                    },
                    Leg {
                        currency: Currency::Domestic,
                        flows: vec![CashFlow {
                            time: self.maturity,
                            amount: -n * strike,
                        }],
                    },
                ]
            }
            TradeKind::Ccs => {
                let k_d = self.fixed_rate.ok_or_else(|| missing(self, "fixed_rate"))?;
                let k_f = self
                    .fixed_rate_foreign
                    .ok_or_else(|| missing(self, "fixed_rate_foreign"))?;
                let strike = self.fx_strike.ok_or_else(|| missing(self, "fx_strike"))?;
                let freq = self.frequency.ok_or_else(|| missing(self, "frequency"))?;
                let times = payment_schedule(self.start, self.maturity, freq)?;
                let tau = freq.year_fraction();
                let n_d = n * strike;
                let mut fgn = vec![CashFlow {
                    time: self.start,
                    amount: -n,
                }];
                let mut dom = vec![CashFlow {
                    time: self.start,
                    amount: n_d,
                }];
                for (i, &t) in times.iter().enumerate() {
                    let last = i + 1 == times.len();
                    let principal_f = if last { n } else { 0.0 };
                    let principal_d = if last { n_d } else { 0.0 };
                    fgn.push(CashFlow {
                        time: t,
                        amount: n * k_f * tau + principal_f,
                    });
                    dom.push(CashFlow {
                        time: t,
                        amount: -(n_d * k_d * tau + principal_d),
                    });
                }
                vec![
                    Leg {
                        currency: Currency::Foreign,
                        flows: fgn,
                    },
                    Leg {
                        currency: Currency::Domestic,
                        flows: dom,
                    },
                ]
            }
        };
        for leg in &legs {
            leg.validate()?;
        }
        self.legs = legs;
        Ok(())
    }

    /// Reporting notional in domestic currency units.
    pub fn notional_domestic(&self, x0: f64) -> f64 {
        match self.kind {
            TradeKind::Fra | TradeKind::Irs => match self.currency {
                Currency::Domestic => self.notional.abs(),
                Currency::Foreign => self.notional.abs() * x0,
            },
            TradeKind::FxForward | TradeKind::Ccs => {
                self.notional.abs() * self.fx_strike.unwrap_or(x0)
            }
        }
    }
}

fn missing(trade: &Trade, field: &str) -> EngineError {
    EngineError::InvalidSchedule(format!(
        "trade {} ({}) lacks required field {field}",
        trade.id,
        trade.kind.label()
    ))
}

/// Domestic value of one trade at state `[x_d, x_f, log X]`, dropping
/// flows that have already paid (time < t).
pub fn value_trade(trade: &Trade, params: &ModelParams, t: f64, state: [f64; 3]) -> f64 {
    let fx = state[2].exp();
    let mut total = 0.0;
    for leg in &trade.legs {
        let (x, conv) = match leg.currency {
            Currency::Domestic => (state[0], 1.0),
            Currency::Foreign => (state[1], fx),
        };
        let mut leg_value = 0.0;
        for flow in &leg.flows {
            if flow.time < t {
                continue;
            }
            let (a, b) = zcb_ab(params, leg.currency, t, flow.time);
            leg_value += flow.amount * a * (-b * x).exp();
        }
        total += conv * leg_value;
    }
    total
}

/// One live cash flow with the bond-price affine terms folded in:
/// value contribution is `coef * exp(-b * x)`.
#[derive(Debug, Clone, Copy)]
pub struct FlowCoef {
    pub coef: f64,
    pub b: f64,
}

/// A leg's live flows at a fixed valuation date.
#[derive(Debug, Clone)]
pub struct PricedLeg {
    pub flows: Vec<FlowCoef>,
}

/// All legs of one netting set at a fixed valuation date, split by
/// currency.
#[derive(Debug, Clone, Default)]
pub struct SetLegs {
    pub dom: Vec<PricedLeg>,
    pub fgn: Vec<PricedLeg>,
}

/// Per-date pricing book: every live leg of the portfolio with its
/// (coef, B) flow terms, grouped per netting set in a deterministic
/// order. Shared by the grid valuation and the Monte Carlo engine.
#[derive(Debug, Clone)]
pub struct DateBook {
    pub t: f64,
    pub set_ids: Vec<String>,
    pub sets: Vec<SetLegs>,
}

impl DateBook {
    pub fn build(
        portfolio: &crate::portfolio::Portfolio,
        params: &ModelParams,
        t: f64,
    ) -> DateBook {
        let groups = portfolio.netting_sets();
        let mut set_ids = Vec::with_capacity(groups.len());
        let mut sets = Vec::with_capacity(groups.len());
        for (set_id, trade_idx) in groups {
            let mut legs = SetLegs::default();
            for &ti in &trade_idx {
                for leg in &portfolio.trades[ti].legs {
                    let flows: Vec<FlowCoef> = leg
                        .flows
                        .iter()
                        .filter(|f| f.time >= t)
                        .map(|f| {
                            let (a, b) = zcb_ab(params, leg.currency, t, f.time);
                            FlowCoef {
                                coef: f.amount * a,
                                b,
                            }
                        })
                        .collect();
                    if flows.is_empty() {
                        continue;
                    }
                    let priced = PricedLeg { flows };
                    match leg.currency {
                        Currency::Domestic => legs.dom.push(priced),
                        Currency::Foreign => legs.fgn.push(priced),
                    }
                }
            }
            set_ids.push(set_id);
            sets.push(legs);
        }
        DateBook { t, set_ids, sets }
    }

    /// Live domestic leg count (N_d).
    pub fn dom_leg_count(&self) -> usize {
        self.sets.iter().map(|s| s.dom.len()).sum()
    }

    /// Live foreign leg count (N_f).
    pub fn fgn_leg_count(&self) -> usize {
        self.sets.iter().map(|s| s.fgn.len()).sum()
    }
}

fn leg_value_at(leg: &PricedLeg, x: f64) -> f64 {
    leg.flows.iter().map(|f| f.coef * (-f.b * x).exp()).sum()
}

/// FX conversion factors on the grid in separable per-axis form:
/// `X_ijk = xu[i] * xv[j] * xw[k]` (the drift is folded into `xu`).
#[derive(Debug, Clone)]
pub struct FxGrid {
    pub xu: Vec<f64>,
    pub xv: Vec<f64>,
    pub xw: Vec<f64>,
}

/// Netting-set MtM values on the quadrature grid in the compressed form
/// dictated by the triangular state mapping: domestic values per first
/// axis, foreign values per first two axes, FX factors separable.
#[derive(Debug, Clone)]
pub struct ValuationSlices {
    pub j: usize,
    pub set_ids: Vec<String>,
    /// Per set: J domestic-leg sums.
    pub dom: Vec<Vec<f64>>,
    /// Per set: J*J foreign-leg sums (row-major over axes (i, j)).
    pub fgn: Vec<Vec<f64>>,
    pub fx: FxGrid,
    /// Leg-valuation calls performed for this grid build.
    pub pricing_calls: u64,
}

/// Values every netting set on the tensor grid. The pricing-call count is
/// exactly `N_d * J + N_f * J^2`.
pub fn portfolio_value_grid(
    book: &DateBook,
    dist: &StateDistribution,
    grid: &TensorGrid,
) -> ValuationSlices {
    let j = grid.len();
    let l = &dist.chol;
    let x_d: Vec<f64> = grid
        .nodes
        .iter()
        .map(|n| dist.mean[0] + dist.scale[0] * l[0][0] * n)
        .collect();
    let mut pricing_calls = 0u64;
    let mut dom = Vec::with_capacity(book.sets.len());
    let mut fgn = Vec::with_capacity(book.sets.len());
    for set in &book.sets {
        let mut d = vec![0.0; j];
        for leg in &set.dom {
            for (slot, &x) in d.iter_mut().zip(&x_d) {
                *slot += leg_value_at(leg, x);
            }
            pricing_calls += j as u64;
        }
        let mut f = vec![0.0; j * j];
        for leg in &set.fgn {
            for (i0, slot_row) in f.chunks_mut(j).enumerate() {
                let base = dist.mean[1] + dist.scale[1] * l[1][0] * grid.nodes[i0];
                for (slot, &n1) in slot_row.iter_mut().zip(&grid.nodes) {
                    let x = base + dist.scale[1] * l[1][1] * n1;
                    *slot += leg_value_at(leg, x);
                }
            }
            pricing_calls += (j * j) as u64;
        }
        dom.push(d);
        fgn.push(f);
    }
    let fx = FxGrid {
        xu: grid
            .nodes
            .iter()
            .map(|n| (dist.mean[2] + dist.scale[2] * l[2][0] * n).exp())
            .collect(),
        xv: grid
            .nodes
            .iter()
            .map(|n| (dist.scale[2] * l[2][1] * n).exp())
            .collect(),
        xw: grid
            .nodes
            .iter()
            .map(|n| (dist.scale[2] * l[2][2] * n).exp())
            .collect(),
    };
    ValuationSlices {
        j,
        set_ids: book.set_ids.clone(),
        dom,
        fgn,
        fx,
        pricing_calls,
    }
}

impl ValuationSlices {
    /// Full J^3 MtM tensor of one netting set, index (i, j, k) at
    /// `(i * J + j) * J + k`.
    pub fn net_tensor(&self, set: usize) -> Vec<f64> {
        let j = self.j;
        let mut out = vec![0.0; j * j * j];
        let d = &self.dom[set];
        let f = &self.fgn[set];
        for i0 in 0..j {
            let xu = self.fx.xu[i0];
            for i1 in 0..j {
                let base = d[i0];
                let fv = f[i0 * j + i1];
                let xuv = xu * self.fx.xv[i1];
                let row = &mut out[(i0 * j + i1) * j..(i0 * j + i1) * j + j];
                for (slot, &xw) in row.iter_mut().zip(&self.fx.xw) {
                    *slot = base + fv * xuv * xw;
                }
            }
        }
        out
    }

    /// Full J^3 counterparty exposure tensor: per-set MtM floored at zero
    /// and summed across netting sets.
    pub fn counterparty_tensor(&self) -> Vec<f64> {
        let j = self.j;
        let mut out = vec![0.0; j * j * j];
        for set in 0..self.set_ids.len() {
            let d = &self.dom[set];
            let f = &self.fgn[set];
            for i0 in 0..j {
                let xu = self.fx.xu[i0];
                for i1 in 0..j {
                    let base = d[i0];
                    let fv = f[i0 * j + i1];
                    let xuv = xu * self.fx.xv[i1];
                    let row = &mut out[(i0 * j + i1) * j..(i0 * j + i1) * j + j];
                    for (slot, &xw) in row.iter_mut().zip(&self.fx.xw) {
                        *slot += (base + fv * xuv * xw).max(0.0);
                    }
                }
            }
        }
        out
    }
}

/// Deterministic per-set MtM values at the mean state; the shared bypass
/// for degenerate exposure dates (t = 0 or vanishing dispersion), used
/// identically by the cosine engine and the Monte Carlo engine.
pub fn deterministic_set_values(
    portfolio: &crate::portfolio::Portfolio,
    params: &ModelParams,
    dist: &StateDistribution,
) -> Vec<(String, f64)> {
    portfolio
        .netting_sets()
        .into_iter()
        .map(|(set_id, idx)| {
            let v = idx
                .iter()
                .map(|&i| value_trade(&portfolio.trades[i], params, dist.t, dist.mean))
                .sum();
            (set_id, v)
        })
        .collect()
}
