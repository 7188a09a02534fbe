//! Clenshaw-Curtis quadrature and tensor-product integration over the
//! three normalized state dimensions.
//!
//! The integration range per dimension is the standard-normal quantile
//! interval `[q_lo, q_hi] = [quantile(TOL), quantile(1-TOL)]`, so a rule
//! built here integrates against the standard normal density over a cube
//! that carries `(1 - 2 TOL)^3` of the probability mass. The normal
//! density is folded into the weights once per grid build; the same 1-D
//! rule is reused for all three dimensions.

mod normal;

pub use normal::{erf, erfc, normal_cdf, normal_pdf, normal_quantile};

use crate::error::{EngineError, Result};

/// Points per dimension and tail tolerance of the truncated range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Quadrature points per dimension (J).
    pub points: usize,
    /// Tail probability cut per dimension (TOL).
    pub tail_tol: f64,
}

impl QuadratureConfig {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(points: usize, tail_tol: f64) -> Result<Self> {
        if points < 3 {
            return Err(EngineError::InvalidParameter(format!(
                "quadrature needs at least 3 points per dimension, got {points}"
            )));
        }
        if !(tail_tol > 0.0 && tail_tol < 0.5) {
            return Err(EngineError::InvalidParameter(format!(
                "tail tolerance must lie in (0, 0.5), got {tail_tol}"
            )));
        }
        Ok(Self { points, tail_tol })
    }
}

/// Clenshaw-Curtis nodes and weights on [-1, 1].
///
/// Nodes are the Chebyshev extrema in ascending order. Weights come from
/// the explicit cosine-sum formula (O(J^2)); the rule is exact for
/// polynomials of degree <= J-1, and degree J as well when J-1 is even.
pub fn cc_nodes_weights(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if points < 2 {
        return Err(EngineError::InvalidParameter(format!(
            "Clenshaw-Curtis rule needs at least 2 points, got {points}"
        )));
    }
    let n = points - 1;
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(points);
    let mut weights = Vec::with_capacity(points);
    for j in 0..points {
        let theta = j as f64 * std::f64::consts::PI / nf;
        nodes.push(-theta.cos());
        let mut sum = 0.0;
        for m in 1..=n / 2 {
            let b = if 2 * m == n { 1.0 } else { 2.0 };
            sum += b * (2.0 * m as f64 * theta).cos() / ((4 * m * m - 1) as f64);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        weights.push(c / nf * (1.0 - sum));
    }
    Ok((nodes, weights))
}

/// Per-dimension rule on the truncated normal range, with the standard
/// normal density folded into effective weights. Shared by all three
/// dimensions of the tensor product.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    /// Nodes in [q_lo, q_hi].
    pub nodes: Vec<f64>,
    /// Interval-scaled Clenshaw-Curtis weights; they sum to q_hi - q_lo.
    pub weights: Vec<f64>,
    /// weights[i] * normal_pdf(nodes[i]); these are what the tensor
    /// integration actually uses.
    pub eff_weights: Vec<f64>,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl TensorGrid {
    pub fn build(cfg: &QuadratureConfig) -> Result<Self> {
        let q_lo = normal_quantile(cfg.tail_tol)?;
        let q_hi = -q_lo; // symmetric range
        let (raw_nodes, raw_weights) = cc_nodes_weights(cfg.points)?;
        let half = 0.5 * (q_hi - q_lo);
        let mid = 0.5 * (q_hi + q_lo);
        let nodes: Vec<f64> = raw_nodes.iter().map(|x| mid + half * x).collect();
        let weights: Vec<f64> = raw_weights.iter().map(|w| w * half).collect();
        let eff_weights: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * normal_pdf(*x))
            .collect();
        Ok(Self {
            nodes,
            weights,
            eff_weights,
            q_lo,
            q_hi,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Integrates a 3-D integrand given by its values on the full tensor grid
/// (index order (i, j, k) -> (i * J + j) * J + k) against the product of
/// standard normal densities:
///
/// sum_ijk w_i w_j w_k f(n_i, n_j, n_k) pdf(n_i) pdf(n_j) pdf(n_k)
pub fn tensor_integrate(grid: &TensorGrid, values: &[f64]) -> Result<f64> {
    let j = grid.len();
    let expected = j * j * j;
    if values.len() != expected {
        return Err(EngineError::DimensionMismatch {
            expected,
            got: values.len(),
        });
    }
    let w = &grid.eff_weights;
    let mut total = 0.0;
    for (i0, &wi) in w.iter().enumerate() {
        let mut slice_sum = 0.0;
        for (i1, &wj) in w.iter().enumerate() {
            let row = &values[(i0 * j + i1) * j..(i0 * j + i1) * j + j];
            let mut row_sum = 0.0;
            for (v, &wk) in row.iter().zip(w) {
                row_sum += v * wk;
            }
            slice_sum += wj * row_sum;
        }
        total += wi * slice_sum;
    }
    Ok(total)
}
