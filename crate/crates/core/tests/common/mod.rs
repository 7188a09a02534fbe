//! Shared fixtures for the integration suites: the reference parameter
//! set and the seeded test portfolios.
#![allow(dead_code)] // each suite uses a subset

use ccr_cos::model::{DiscountCurve, ModelParams};
use ccr_cos::portfolio::{generate, GeneratorSpec, PartitionMode, Portfolio};

pub fn reference_params() -> ModelParams {
    ModelParams {
        a_d: 0.01,
        a_f: 0.05,
        sigma_d: 0.007,
        sigma_f: 0.012,
        sigma_x: 0.02,
        mu_x: 0.008,
        rho_df: 0.25,
        rho_dx: -0.15,
        rho_fx: -0.15,
        x0: 105.0,
        curve_d: DiscountCurve::Flat { flat_rate: 0.02 },
        curve_f: DiscountCurve::Flat { flat_rate: 0.05 },
        x_d0: 0.0,
        x_f0: 0.0,
    }
}

/// 100 trades, one netting set.
pub fn book_100() -> Portfolio {
    generate(&GeneratorSpec::default(), &reference_params())
        .expect("generation succeeds")
        .partition_counterparty(PartitionMode::SingleNettingSet)
}

/// 100 trades, one netting set per contract type.
pub fn book_100_by_kind() -> Portfolio {
    generate(&GeneratorSpec::default(), &reference_params())
        .expect("generation succeeds")
        .partition_counterparty(PartitionMode::ByContractType)
}

/// 1000 trades, one netting set.
pub fn book_1000() -> Portfolio {
    generate(
        &GeneratorSpec {
            n_trades: 1000,
            seed: 4242,
            ..Default::default()
        },
        &reference_params(),
    )
    .expect("generation succeeds")
    .partition_counterparty(PartitionMode::SingleNettingSet)
}

/// Least-squares slope of y over x.
pub fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}
