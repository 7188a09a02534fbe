//! Model parameters, the exact time-t law of the state vector, and
//! analytic zero-coupon-bond prices under the shifted two-currency
//! Hull-White / GBM setup.
//!
//! State vector: `[x_d(t), x_f(t), log X(t)]` with
//!
//! ```text
//! dx_d = -a_d x_d dt + sigma_d dW_d
//! dx_f = -a_f x_f dt + sigma_f dW_f
//! dX   = mu X dt + sigma_X X dW_X
//! ```
//!
//! and a constant 3x3 Brownian correlation. All marginals and cross
//! covariances at a fixed t are available in closed form, so the law of
//! the state is an exact trivariate Gaussian: `mean + diag(scale) L z`
//! with `L` the Cholesky factor of the correlation of the normalized
//! components.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Currency tag for legs and curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Currency {
    Domestic,
    Foreign,
}

/// Time-0 discount factors P(0, T): either a flat continuously-compounded
/// rate or a tabulated curve with log-linear interpolation in the
/// discount factors (flat-forward extrapolation beyond the last tenor).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiscountCurve {
    Flat { flat_rate: f64 },
    Table { tenors: Vec<f64>, dfs: Vec<f64> },
}

impl DiscountCurve {
    pub fn validate(&self) -> Result<()> {
        match self {
            DiscountCurve::Flat { flat_rate } => {
                if !flat_rate.is_finite() {
                    return Err(EngineError::InvalidParameter(
                        "flat_rate must be finite".into(),
                    ));
                }
            }
            DiscountCurve::Table { tenors, dfs } => {
                if tenors.is_empty() || tenors.len() != dfs.len() {
                    return Err(EngineError::InvalidParameter(
                        "curve table needs equal, nonempty tenors and dfs".into(),
                    ));
                }
                let mut prev = 0.0;
                for (i, (&t, &df)) in tenors.iter().zip(dfs).enumerate() {
                    if !(t > prev) && !(i == 0 && t == 0.0) {
                        return Err(EngineError::InvalidParameter(
                            "curve tenors must be strictly increasing and non-negative".into(),
                        ));
                    }
                    if !(df > 0.0) || !df.is_finite() {
                        return Err(EngineError::InvalidParameter(
                            "curve discount factors must be strictly positive".into(),
                        ));
                    }
                    if t == 0.0 && df != 1.0 {
                        return Err(EngineError::InvalidParameter(
                            "discount factor at tenor 0 must be 1".into(),
                        ));
                    }
                    prev = t;
                }
            }
        }
        Ok(())
    }

    /// P(0, T). P(0, 0) = 1 by construction.
    pub fn df(&self, t: f64) -> f64 {
        match self {
            DiscountCurve::Flat { flat_rate } => (-flat_rate * t).exp(),
            DiscountCurve::Table { tenors, dfs } => {
                if t <= 0.0 {
                    return 1.0;
                }
                // log-linear between pillars, anchored at (0, 1)
                let mut t0 = 0.0;
                let mut l0 = 0.0;
                for (&ti, &dfi) in tenors.iter().zip(dfs) {
                    let li = dfi.ln();
                    if t <= ti {
                        let w = (t - t0) / (ti - t0);
                        return (l0 + w * (li - l0)).exp();
                    }
                    t0 = ti;
                    l0 = li;
                }
                // flat-forward extrapolation from the last segment
                let n = tenors.len();
                let (tl, ll) = (tenors[n - 1], dfs[n - 1].ln());
                let (tp, lp) = if n >= 2 {
                    (tenors[n - 2], dfs[n - 2].ln())
                } else {
                    (0.0, 0.0)
                };
                let slope = (ll - lp) / (tl - tp);
                (ll + slope * (t - tl)).exp()
            }
        }
    }
}

/// All Hull-White / GBM parameters, correlations, initial FX rate and
/// the two discount curves.
///
/// `x_d0` / `x_f0` are the initial values of the shifted short rates;
/// they are zero for a calibration-consistent model and nonzero only
/// under shock-and-revalue scenarios. They are not part of the JSON
/// schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub a_d: f64,
    pub a_f: f64,
    pub sigma_d: f64,
    pub sigma_f: f64,
    #[serde(rename = "sigma_X")]
    pub sigma_x: f64,
    #[serde(rename = "mu_X")]
    pub mu_x: f64,
    pub rho_df: f64,
    #[serde(rename = "rho_dX")]
    pub rho_dx: f64,
    #[serde(rename = "rho_fX")]
    pub rho_fx: f64,
    #[serde(rename = "X0")]
    pub x0: f64,
    pub curve_d: DiscountCurve,
    pub curve_f: DiscountCurve,
    #[serde(skip)]
    pub x_d0: f64,
    #[serde(skip)]
    pub x_f0: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_d", self.a_d),
            ("a_f", self.a_f),
            ("sigma_d", self.sigma_d),
            ("sigma_f", self.sigma_f),
            ("sigma_X", self.sigma_x),
            ("X0", self.x0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        for (name, r) in [
            ("rho_df", self.rho_df),
            ("rho_dX", self.rho_dx),
            ("rho_fX", self.rho_fx),
        ] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must lie in [-1, 1], got {r}"
                )));
            }
        }
        if !self.mu_x.is_finite() || !self.x_d0.is_finite() || !self.x_f0.is_finite() {
            return Err(EngineError::InvalidParameter(
                "drift and initial state values must be finite".into(),
            ));
        }
        self.curve_d.validate()?;
        self.curve_f.validate()?;
        // Brownian correlation must be PSD; the factorization below fails
        // exactly when it is not.
        cholesky3(&self.brownian_corr())?;
        Ok(())
    }

    pub fn brownian_corr(&self) -> [[f64; 3]; 3] {
        [
            [1.0, self.rho_df, self.rho_dx],
            [self.rho_df, 1.0, self.rho_fx],
            [self.rho_dx, self.rho_fx, 1.0],
        ]
    }

    pub fn curve(&self, ccy: Currency) -> &DiscountCurve {
        match ccy {
            Currency::Domestic => &self.curve_d,
            Currency::Foreign => &self.curve_f,
        }
    }

    fn mean_reversion(&self, ccy: Currency) -> f64 {
        match ccy {
            Currency::Domestic => self.a_d,
            Currency::Foreign => self.a_f,
        }
    }

    fn rate_vol(&self, ccy: Currency) -> f64 {
        match ccy {
            Currency::Domestic => self.sigma_d,
            Currency::Foreign => self.sigma_f,
        }
    }

    /// Copy with the initial shifted domestic short rate moved by `bump`.
    pub fn with_x_d0_bumped(&self, bump: f64) -> Self {
        let mut p = self.clone();
        p.x_d0 += bump;
        p
    }

    /// Copy with the initial shifted foreign short rate moved by `bump`.
    pub fn with_x_f0_bumped(&self, bump: f64) -> Self {
        let mut p = self.clone();
        p.x_f0 += bump;
        p
    }

    /// Copy with the initial FX rate scaled by `1 + rel`.
    pub fn with_x0_scaled(&self, rel: f64) -> Self {
        let mut p = self.clone();
        p.x0 *= 1.0 + rel;
        p
    }

    pub fn from_json_str(s: &str, origin: &str) -> Result<Self> {
        let params: ModelParams =
            serde_json::from_str(s).map_err(|e| EngineError::Parse {
                path: origin.to_string(),
                msg: format!("line {}, column {}: {}", e.line(), e.column(), e),
            })?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s, &path.display().to_string())
    }
}

/// (1 - exp(-c t)) / c, stable for small c t.
fn psi(c: f64, t: f64) -> f64 {
    -(-c * t).exp_m1() / c
}

/// Exact Gaussian law of `[x_d(t), x_f(t), log X(t)]`, decomposed as
/// `mean + diag(scale) . L . z` with `z` iid standard normal and
/// `L L^T = corr`.
#[derive(Debug, Clone)]
pub struct StateDistribution {
    pub t: f64,
    pub mean: [f64; 3],
    pub scale: [f64; 3],
    pub corr: [[f64; 3]; 3],
    pub chol: [[f64; 3]; 3],
    /// Set when t = 0 or any scale entry is below 1e-14; callers must
    /// bypass the cosine expansion for such dates.
    pub degenerate: bool,
}

const DEGENERATE_SCALE: f64 = 1e-14;

/// Builds the time-t state law. Requires t >= 0.
pub fn state_distribution(params: &ModelParams, t: f64) -> Result<StateDistribution> {
    if !(t >= 0.0) {
        return Err(EngineError::InvalidParameter(format!(
            "exposure date must be non-negative, got {t}"
        )));
    }
    let mean = [
        params.x_d0 * (-params.a_d * t).exp(),
        params.x_f0 * (-params.a_f * t).exp(),
        params.x0.ln() + (params.mu_x - 0.5 * params.sigma_x * params.sigma_x) * t,
    ];
    if t == 0.0 {
        return Ok(StateDistribution {
            t,
            mean,
            scale: [0.0; 3],
            corr: identity3(),
            chol: identity3(),
            degenerate: true,
        });
    }
    let v_d = psi(2.0 * params.a_d, t);
    let v_f = psi(2.0 * params.a_f, t);
    let scale = [
        params.sigma_d * v_d.sqrt(),
        params.sigma_f * v_f.sqrt(),
        params.sigma_x * t.sqrt(),
    ];
    let degenerate = scale.iter().any(|s| *s < DEGENERATE_SCALE);

    // Correlations of the normalized components, from the Ito isometry
    // applied to the integral solutions of the SDEs.
    let r_df = params.rho_df * psi(params.a_d + params.a_f, t) / (v_d * v_f).sqrt();
    let r_dx = params.rho_dx * psi(params.a_d, t) / (v_d * t).sqrt();
    let r_fx = params.rho_fx * psi(params.a_f, t) / (v_f * t).sqrt();
    let corr = [[1.0, r_df, r_dx], [r_df, 1.0, r_fx], [r_dx, r_fx, 1.0]];
    let chol = cholesky3(&corr)?;
    Ok(StateDistribution {
        t,
        mean,
        scale,
        corr,
        chol,
        degenerate,
    })
}

impl StateDistribution {
    /// Maps independent standard normals to a state vector.
    pub fn state_at(&self, z: [f64; 3]) -> [f64; 3] {
        let l = &self.chol;
        [
            self.mean[0] + self.scale[0] * l[0][0] * z[0],
            self.mean[1] + self.scale[1] * (l[1][0] * z[0] + l[1][1] * z[1]),
            self.mean[2]
                + self.scale[2] * (l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2]),
        ]
    }
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Lower-triangular Cholesky factor of a symmetric 3x3 matrix.
///
/// PSD-but-singular inputs (the |rho| = 1 edge) take a zeroed-column
/// fallback: a vanishing pivot zeroes its column, which keeps the factor
/// lower-triangular in the pinned state ordering. The reconstruction
/// L L^T is verified against the input and indefinite matrices are
/// rejected.
pub fn cholesky3(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let mut l = [[0.0_f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s < -1e-10 {
                    return Err(EngineError::CorrelationNotPsd);
                }
                l[i][i] = if s > 1e-14 { s.sqrt() } else { 0.0 };
            } else {
                l[i][j] = if l[j][j] > 0.0 { s / l[j][j] } else { 0.0 };
            }
        }
    }
    // Reconstruction guard; catches indefinite inputs that slipped
    // through the pivot test via the zeroed-column path.
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let mut r = 0.0;
            for k in 0..3 {
                r += l[i][k] * l[j][k];
            }
            worst = worst.max((r - m[i][j]).abs());
        }
    }
    if worst > 1e-10 {
        return Err(EngineError::CorrelationNotPsd);
    }
    Ok(l)
}

/// Time-t conditional variance of the integrated shifted short rate over
/// [t, T]; depends on the horizon only.
fn integrated_variance(sigma: f64, a: f64, tau: f64) -> f64 {
    sigma * sigma / (a * a) * (tau - 2.0 * psi(a, tau) + psi(2.0 * a, tau))
}

/// B(t, T) of the affine bond-price formula.
pub fn zcb_b(a: f64, tau: f64) -> f64 {
    psi(a, tau)
}

/// (A, B) of `P(t,T) = A exp(-B x)` for one currency; `t <= T` assumed
/// validated by the caller.
pub fn zcb_ab(params: &ModelParams, ccy: Currency, t: f64, big_t: f64) -> (f64, f64) {
    let a = params.mean_reversion(ccy);
    let sigma = params.rate_vol(ccy);
    let curve = params.curve(ccy);
    let tau = big_t - t;
    let b = zcb_b(a, tau);
    let u_tau = integrated_variance(sigma, a, tau);
    let u_big_t = integrated_variance(sigma, a, big_t);
    let u_t = integrated_variance(sigma, a, t);
    let a_factor =
        curve.df(big_t) / curve.df(t) * (0.5 * (u_tau - u_big_t + u_t)).exp();
    (a_factor, b)
}

/// Zero-coupon bond price `P(t, T) = A(t,T) exp(-B(t,T) x)` given the
/// shifted short-rate state `x` of the leg currency. At `t = 0, x = 0`
/// this reproduces the input curve exactly.
pub fn zcb_price(params: &ModelParams, ccy: Currency, t: f64, big_t: f64, x: f64) -> Result<f64> {
    if big_t < t {
        return Err(EngineError::InvalidParameter(format!(
            "bond maturity {big_t} precedes valuation time {t}"
        )));
    }
    let (a_factor, b) = zcb_ab(params, ccy, t, big_t);
    Ok(a_factor * (-b * x).exp())
}
