//! Monte Carlo baseline and oracle: exact Gaussian sampling of the time-t
//! state, full-portfolio revaluation per path, empirical PFE/EE with
//! standard errors, and order-statistic confidence bands.
//!
//! Sampling at an exposure date is exact (no time stepping): the state law
//! is a closed-form trivariate Gaussian, so discrepancies against the
//! cosine engine attribute to the expansion alone. Path batches run in
//! parallel on per-batch RNG streams derived from the master seed by
//! xoshiro256** jumps; results merge in batch order, so output is
//! identical for any thread count.

use rand::prelude::*;
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use crate::engine::{FX_REL_BUMP, RATE_BUMP};
use crate::error::{EngineError, Result};
use crate::instruments::{deterministic_set_values, DateBook, PricedLeg};
use crate::model::{state_distribution, ModelParams, StateDistribution};
use crate::portfolio::Portfolio;
use crate::quadrature::normal_quantile;

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub n_sim: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_sim: 500_000,
            seed: 1,
            batch_size: 65_536,
        }
    }
}

/// Per-path exposures at one date: floored per netting set, plus their
/// sum (counterparty level).
#[derive(Debug, Clone)]
pub struct ExposurePaths {
    pub t: f64,
    pub set_ids: Vec<String>,
    pub per_set: Vec<Vec<f64>>,
    pub counterparty: Vec<f64>,
    /// Leg valuations performed: (N_d + N_f) * n_sim on live dates.
    pub pricing_calls: u64,
    pub cpu_seconds: f64,
}

fn leg_value(leg: &PricedLeg, x: f64) -> f64 {
    leg.flows.iter().map(|f| f.coef * (-f.b * x).exp()).sum()
}

struct BatchOut {
    per_set: Vec<Vec<f64>>,
    counterparty: Vec<f64>,
    calls: u64,
}

fn simulate_batch(
    book: &DateBook,
    dist: &StateDistribution,
    mut rng: Xoshiro256StarStar,
    n_paths: usize,
) -> BatchOut {
    let n_sets = book.sets.len();
    let mut per_set = vec![Vec::with_capacity(n_paths); n_sets];
    let mut counterparty = Vec::with_capacity(n_paths);
    let mut calls = 0u64;
    let l = &dist.chol;
    for _ in 0..n_paths {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let x_d = dist.mean[0] + dist.scale[0] * l[0][0] * z0;
        let x_f = dist.mean[1] + dist.scale[1] * (l[1][0] * z0 + l[1][1] * z1);
        let fx = (dist.mean[2]
            + dist.scale[2] * (l[2][0] * z0 + l[2][1] * z1 + l[2][2] * z2))
            .exp();
        let mut total = 0.0;
        for (s, set) in book.sets.iter().enumerate() {
            let mut v = 0.0;
            for leg in &set.dom {
                v += leg_value(leg, x_d);
            }
            let mut w = 0.0;
            for leg in &set.fgn {
                w += leg_value(leg, x_f);
            }
            calls += (set.dom.len() + set.fgn.len()) as u64;
            let exposure = (v + fx * w).max(0.0);
            per_set[s].push(exposure);
            total += exposure;
        }
        counterparty.push(total);
    }
    BatchOut {
        per_set,
        counterparty,
        calls,
    }
}

/// Batch boundaries and their jump-derived RNG streams.
fn batch_streams(seed: u64, n_sim: usize, batch_size: usize) -> Vec<(usize, Xoshiro256StarStar)> {
    let mut streams = Vec::new();
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut remaining = n_sim;
    while remaining > 0 {
        let take = remaining.min(batch_size);
        streams.push((take, rng.clone()));
        rng.jump();
        remaining -= take;
    }
    streams
}

/// Draws the exposure distribution at date t. Degenerate dates (t = 0)
/// short-circuit to the shared deterministic valuation, so every path
/// carries the same exposure.
pub fn simulate_exposures(
    portfolio: &Portfolio,
    params: &ModelParams,
    t: f64,
    cfg: &McConfig,
) -> Result<ExposurePaths> {
    if cfg.n_sim == 0 {
        return Err(EngineError::InvalidParameter(
            "n_sim must be positive".into(),
        ));
    }
    if cfg.batch_size == 0 {
        return Err(EngineError::InvalidParameter(
            "batch size must be positive".into(),
        ));
    }
    let started = std::time::Instant::now();
    let dist = state_distribution(params, t)?;
    if dist.degenerate {
        let det = deterministic_set_values(portfolio, params, &dist);
        let set_ids: Vec<String> = det.iter().map(|(id, _)| id.clone()).collect();
        let per_set: Vec<Vec<f64>> = det
            .iter()
            .map(|(_, v)| vec![v.max(0.0); cfg.n_sim])
            .collect();
        let total: f64 = det.iter().map(|(_, v)| v.max(0.0)).sum();
        return Ok(ExposurePaths {
            t,
            set_ids,
            per_set,
            counterparty: vec![total; cfg.n_sim],
            pricing_calls: 0,
            cpu_seconds: started.elapsed().as_secs_f64(),
        });
    }
    let book = DateBook::build(portfolio, params, t);
    let streams = batch_streams(cfg.seed, cfg.n_sim, cfg.batch_size);
    let batches: Vec<BatchOut> = streams
        .into_par_iter()
        .map(|(n, rng)| simulate_batch(&book, &dist, rng, n))
        .collect();
    let n_sets = book.sets.len();
    let mut per_set = vec![Vec::with_capacity(cfg.n_sim); n_sets];
    let mut counterparty = Vec::with_capacity(cfg.n_sim);
    let mut pricing_calls = 0u64;
    for b in batches {
        for (s, v) in b.per_set.into_iter().enumerate() {
            per_set[s].extend(v);
        }
        counterparty.extend(b.counterparty);
        pricing_calls += b.calls;
    }
    Ok(ExposurePaths {
        t,
        set_ids: book.set_ids,
        per_set,
        counterparty,
        pricing_calls,
        cpu_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Empirical metrics of one exposure sample.
#[derive(Debug, Clone, Copy)]
pub struct McResult {
    pub pfe: f64,
    pub ee: f64,
    pub ee_se: f64,
    /// Order-statistic confidence interval for the alpha-quantile at 99%
    /// confidence.
    pub pfe_band: (f64, f64),
    pub cpu_seconds: f64,
}

fn order_stat(sorted_scratch: &mut [f64], one_based: usize) -> f64 {
    let idx = one_based.clamp(1, sorted_scratch.len()) - 1;
    let (_, v, _) = sorted_scratch.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    *v
}

/// PFE as the ceil(alpha n) order statistic, EE as the sample mean with
/// its standard error, and a binomial order-statistic band for the
/// quantile. Requires at least 1000 paths for quantile estimation.
pub fn estimate_metrics(paths: &[f64], alpha: f64) -> Result<McResult> {
    if paths.len() < 1000 {
        return Err(EngineError::InvalidParameter(format!(
            "quantile estimation needs at least 1000 paths, got {}",
            paths.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EngineError::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {alpha}"
        )));
    }
    let started = std::time::Instant::now();
    let n = paths.len();
    let nf = n as f64;
    let mean = paths.iter().sum::<f64>() / nf;
    let var = paths.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let ee_se = (var / nf).sqrt();
    let mut scratch = paths.to_vec();
    let k = (alpha * nf).ceil() as usize;
    let pfe = order_stat(&mut scratch, k);
    let z99 = normal_quantile(0.995)?;
    let half_width = z99 * (nf * alpha * (1.0 - alpha)).sqrt();
    let lo_idx = ((nf * alpha - half_width).ceil() as isize).max(1) as usize;
    let hi_idx = ((nf * alpha + half_width).ceil() as usize).min(n);
    let band_lo = order_stat(&mut scratch, lo_idx);
    let band_hi = order_stat(&mut scratch, hi_idx);
    Ok(McResult {
        pfe,
        ee: mean,
        ee_se,
        pfe_band: (band_lo, band_hi),
        cpu_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Common-random-number EE sensitivities: the three shifted revaluations
/// reuse each path's normal draws, so the finite-difference estimator has
/// the pathwise-difference standard error rather than the difference of
/// two independent errors.
#[derive(Debug, Clone)]
pub struct McSensReport {
    pub set_ids: Vec<String>,
    /// Per set: sensitivity estimates [dEE/dx_d0, dEE/dx_f0, dEE/dX0].
    pub per_set: Vec<[f64; 3]>,
    /// Per set: standard errors of the three estimates.
    pub per_set_se: Vec<[f64; 3]>,
    pub counterparty: [f64; 3],
    pub counterparty_se: [f64; 3],
    pub base_ee: Vec<f64>,
    pub cpu_seconds: f64,
}

struct SensAccum {
    // per set and shift: sum of pathwise diffs and squared diffs
    sum: Vec<[f64; 3]>,
    sum_sq: Vec<[f64; 3]>,
    cpty_sum: [f64; 3],
    cpty_sum_sq: [f64; 3],
    base_sum: Vec<f64>,
}

fn sens_batch(
    books: &[DateBook; 4],
    dists: &[StateDistribution; 4],
    steps: &[f64; 3],
    mut rng: Xoshiro256StarStar,
    n_paths: usize,
) -> SensAccum {
    let n_sets = books[0].sets.len();
    let mut acc = SensAccum {
        sum: vec![[0.0; 3]; n_sets],
        sum_sq: vec![[0.0; 3]; n_sets],
        cpty_sum: [0.0; 3],
        cpty_sum_sq: [0.0; 3],
        base_sum: vec![0.0; n_sets],
    };
    let mut exposures = [[0.0_f64; 4]; 64];
    debug_assert!(n_sets <= 64);
    for _ in 0..n_paths {
        let z = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        for which in 0..4 {
            let dist = &dists[which];
            let l = &dist.chol;
            let x_d = dist.mean[0] + dist.scale[0] * l[0][0] * z[0];
            let x_f = dist.mean[1] + dist.scale[1] * (l[1][0] * z[0] + l[1][1] * z[1]);
            let fx = (dist.mean[2]
                + dist.scale[2] * (l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2]))
                .exp();
            for (s, set) in books[which].sets.iter().enumerate() {
                let mut v = 0.0;
                for leg in &set.dom {
                    v += leg_value(leg, x_d);
                }
                let mut w = 0.0;
                for leg in &set.fgn {
                    w += leg_value(leg, x_f);
                }
                exposures[s][which] = (v + fx * w).max(0.0);
            }
        }
        let mut cpty_diff = [0.0; 3];
        for s in 0..n_sets {
            acc.base_sum[s] += exposures[s][0];
            for shift in 0..3 {
                let d = (exposures[s][shift + 1] - exposures[s][0]) / steps[shift];
                acc.sum[s][shift] += d;
                acc.sum_sq[s][shift] += d * d;
                cpty_diff[shift] += d;
            }
        }
        for shift in 0..3 {
            acc.cpty_sum[shift] += cpty_diff[shift];
            acc.cpty_sum_sq[shift] += cpty_diff[shift] * cpty_diff[shift];
        }
    }
    acc
}

pub fn ee_sensitivities_crn(
    portfolio: &Portfolio,
    params: &ModelParams,
    t: f64,
    cfg: &McConfig,
) -> Result<McSensReport> {
    let started = std::time::Instant::now();
    let shifted = [
        params.clone(),
        params.with_x_d0_bumped(RATE_BUMP),
        params.with_x_f0_bumped(RATE_BUMP),
        params.with_x0_scaled(FX_REL_BUMP),
    ];
    let steps = [RATE_BUMP, RATE_BUMP, FX_REL_BUMP * params.x0];
    let dists = [
        state_distribution(&shifted[0], t)?,
        state_distribution(&shifted[1], t)?,
        state_distribution(&shifted[2], t)?,
        state_distribution(&shifted[3], t)?,
    ];
    if dists.iter().any(|d| d.degenerate) {
        // deterministic date: sensitivities are plain finite differences
        // of the deterministic exposures, with zero standard error
        let values: Vec<Vec<f64>> = shifted
            .iter()
            .zip(&dists)
            .map(|(p, d)| {
                deterministic_set_values(portfolio, p, d)
                    .into_iter()
                    .map(|(_, v)| v.max(0.0))
                    .collect()
            })
            .collect();
        let set_ids: Vec<String> = deterministic_set_values(portfolio, params, &dists[0])
            .into_iter()
            .map(|(id, _)| id)
            .collect();
        let n_sets = set_ids.len();
        let mut per_set = vec![[0.0; 3]; n_sets];
        let mut counterparty = [0.0; 3];
        for s in 0..n_sets {
            for shift in 0..3 {
                per_set[s][shift] = (values[shift + 1][s] - values[0][s]) / steps[shift];
                counterparty[shift] += per_set[s][shift];
            }
        }
        return Ok(McSensReport {
            set_ids,
            per_set_se: vec![[0.0; 3]; n_sets],
            per_set,
            counterparty,
            counterparty_se: [0.0; 3],
            base_ee: values[0].clone(),
            cpu_seconds: started.elapsed().as_secs_f64(),
        });
    }
    let books = [
        DateBook::build(portfolio, &shifted[0], t),
        DateBook::build(portfolio, &shifted[1], t),
        DateBook::build(portfolio, &shifted[2], t),
        DateBook::build(portfolio, &shifted[3], t),
    ];
    let n_sets = books[0].sets.len();
    if n_sets > 64 {
        return Err(EngineError::InvalidParameter(
            "sensitivity engine supports at most 64 netting sets".into(),
        ));
    }
    let streams = batch_streams(cfg.seed, cfg.n_sim, cfg.batch_size);
    let parts: Vec<SensAccum> = streams
        .into_par_iter()
        .map(|(n, rng)| sens_batch(&books, &dists, &steps, rng, n))
        .collect();
    let nf = cfg.n_sim as f64;
    let mut per_set = vec![[0.0; 3]; n_sets];
    let mut per_set_se = vec![[0.0; 3]; n_sets];
    let mut counterparty = [0.0; 3];
    let mut counterparty_se = [0.0; 3];
    let mut base_ee = vec![0.0; n_sets];
    let mut sum = vec![[0.0; 3]; n_sets];
    let mut sum_sq = vec![[0.0; 3]; n_sets];
    let mut cpty_sum = [0.0; 3];
    let mut cpty_sum_sq = [0.0; 3];
    for p in parts {
        for s in 0..n_sets {
            base_ee[s] += p.base_sum[s];
            for k in 0..3 {
                sum[s][k] += p.sum[s][k];
                sum_sq[s][k] += p.sum_sq[s][k];
            }
        }
        for k in 0..3 {
            cpty_sum[k] += p.cpty_sum[k];
            cpty_sum_sq[k] += p.cpty_sum_sq[k];
        }
    }
    for s in 0..n_sets {
        base_ee[s] /= nf;
        for k in 0..3 {
            let mean = sum[s][k] / nf;
            let var = (sum_sq[s][k] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            per_set[s][k] = mean;
            per_set_se[s][k] = (var / nf).sqrt();
            counterparty[k] += mean;
        }
    }
    for k in 0..3 {
        let mean = cpty_sum[k] / nf;
        let var = (cpty_sum_sq[k] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        counterparty_se[k] = (var / nf).sqrt();
        counterparty[k] = mean;
    }
    Ok(McSensReport {
        set_ids: books[0].set_ids.clone(),
        per_set,
        per_set_se,
        counterparty,
        counterparty_se,
        base_ee,
        cpu_seconds: started.elapsed().as_secs_f64(),
    })
}
