//! Credit-exposure metrics for linear IR/FX derivative portfolios.
//!
//! The library recovers the distribution of netting-set and counterparty
//! level credit exposure by Fourier-cosine expansion of a numerically
//! integrated characteristic function, and derives PFE, EE and EE
//! sensitivities from it. A full Monte Carlo engine over the same model
//! provides the baseline and the statistical oracle for validation.
//!
//! Organization:
//! - [`model`]: Hull-White / GBM parameters, discount curves, the exact
//!   time-t Gaussian law of the state vector, analytic ZCB prices.
//! - [`quadrature`]: Clenshaw-Curtis rules, normal quantile, tensor-product
//!   integration over the three normalized state dimensions.
//! - [`instruments`]: trade decomposition into single-currency cash-flow
//!   legs, state and grid valuation with per-currency aggregation.
//! - [`portfolio`]: seeded random portfolio generation, netting-set
//!   partitioning, JSON persistence.
//! - [`cos`]: characteristic function, cosine coefficients, CDF recovery
//!   (floor transformation or spectral filter), PFE root search, closed-form
//!   EE, truncation-range rule.
//! - [`engine`]: per-date orchestration of the cosine pipeline, degenerate
//!   bypass, shock-and-revalue sensitivities.
//! - [`mc`]: exact Gaussian path sampling, per-path revaluation, empirical
//!   PFE/EE with standard errors and order-statistic bands.
//! - [`report`]: result rows, CSV schema, run manifests.

// NaN-rejecting validation uses negated comparisons throughout
// (`!(x > 0.0)` rejects NaN where `x <= 0.0` lets it through); index
// loops over the fixed 3x3 state matrices stay explicit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cos;
pub mod engine;
pub mod error;
pub mod instruments;
pub mod mc;
pub mod model;
pub mod portfolio;
pub mod quadrature;
pub mod report;

pub use error::{EngineError, Result};
