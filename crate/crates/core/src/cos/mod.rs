//! Fourier-cosine recovery of the exposure distribution: truncation
//! support, coefficient sampling from the characteristic function, CDF
//! and density evaluation (with the floor transformation at netting
//! level and a spectral filter at counterparty level), the closed-form
//! expected exposure, and the safeguarded quantile root search.

mod chf;

pub use chf::{characteristic_function, exposure_moments, is_degenerate_sigma};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Expansion support `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosSupport {
    pub a: f64,
    pub b: f64,
    /// Width multiplier L used to build the support.
    pub width_mult: f64,
    /// First moment of the target variable.
    pub mu: f64,
    /// Standard deviation of the target variable.
    pub sigma: f64,
}

/// Moment-based truncation rule `[mu - L sigma, mu + L sigma]`; with
/// `floor_a_at_zero` the lower bound is pinned at 0 (counterparty-level
/// exposure is nonnegative by definition).
pub fn cos_support(mu: f64, sigma: f64, width_mult: f64, floor_a_at_zero: bool) -> Result<CosSupport> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(EngineError::InvalidParameter(format!(
            "support requires a positive dispersion, got sigma = {sigma}"
        )));
    }
    if !(width_mult > 0.0) {
        return Err(EngineError::InvalidParameter(format!(
            "support width multiplier must be positive, got {width_mult}"
        )));
    }
    let mut a = mu - width_mult * sigma;
    let b = mu + width_mult * sigma;
    if floor_a_at_zero {
        a = 0.0;
    }
    if !(a < b) {
        return Err(EngineError::InvalidParameter(format!(
            "degenerate support [{a}, {b}]"
        )));
    }
    Ok(CosSupport {
        a,
        b,
        width_mult,
        mu,
        sigma,
    })
}

impl CosSupport {
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Frequency spacing pi / (b - a) of the expansion.
    pub fn omega_step(&self) -> f64 {
        std::f64::consts::PI / self.width()
    }
}

/// Frequency-domain damping `sigma(eta) = exp(-alpha eta^p)` with even
/// order p; `sigma(0) = 1` and `sigma(1) = exp(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub order: u32,
    pub alpha: f64,
}

impl SpectralFilter {
    /// Exponential filter with `alpha = -ln(machine epsilon)`, so the
    /// last retained coefficient is damped to machine precision.
    pub fn exponential(order: u32) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(EngineError::InvalidParameter(format!(
                "spectral filter order must be even and positive, got {order}"
            )));
        }
        Ok(SpectralFilter {
            order,
            alpha: -f64::EPSILON.ln(),
        })
    }

    pub fn eval(&self, eta: f64) -> f64 {
        (-self.alpha * eta.abs().powi(self.order as i32)).exp()
    }
}

/// What variable the expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposureTarget {
    /// Unfloored netting-set MtM; the exposure CDF follows by the floor
    /// transformation (0 below zero, the MtM CDF above).
    NettingMtm,
    /// Sum of floored per-set values; recovered directly, filtered.
    CounterpartyExposure,
}

/// Truncated cosine-series representation of the target CDF.
#[derive(Debug, Clone)]
pub struct CosExpansion {
    pub support: CosSupport,
    /// Number of expansion terms K (coefficients 0..=K are stored).
    pub terms: usize,
    /// A_0..A_K.
    pub coeffs: Vec<f64>,
    pub filter: Option<SpectralFilter>,
    pub target: ExposureTarget,
}

/// Samples the cosine coefficients from characteristic-function values at
/// `w_k = k pi / (b - a)`:
///
/// `A_k = 2/(b-a) Re{ phi(w_k) exp(-i k a pi/(b-a)) }`
pub fn cos_coefficients(phi: &[Complex<f64>], support: &CosSupport) -> Vec<f64> {
    let width = support.width();
    let shift = -support.a * std::f64::consts::PI / width;
    phi.iter()
        .enumerate()
        .map(|(k, p)| 2.0 / width * (p * Complex::from_polar(1.0, k as f64 * shift)).re)
        .collect()
}

impl CosExpansion {
    pub fn from_chf(
        phi: &[Complex<f64>],
        support: CosSupport,
        filter: Option<SpectralFilter>,
        target: ExposureTarget,
    ) -> Result<Self> {
        if phi.len() < 2 {
            return Err(EngineError::InvalidParameter(
                "expansion needs at least two characteristic function values".into(),
            ));
        }
        let coeffs = cos_coefficients(phi, &support);
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(EngineError::InvalidParameter(
                "non-finite cosine coefficient".into(),
            ));
        }
        Ok(CosExpansion {
            support,
            terms: phi.len() - 1,
            coeffs,
            filter,
            target,
        })
    }

    /// Same coefficients cut to `k` terms; the filter rescales to the new
    /// truncation order. Used by convergence sweeps, which vary K at
    /// fixed quadrature settings.
    pub fn truncated(&self, k: usize) -> CosExpansion {
        let k = k.min(self.terms);
        CosExpansion {
            support: self.support,
            terms: k,
            coeffs: self.coeffs[..=k].to_vec(),
            filter: self.filter,
            target: self.target,
        }
    }

    fn filter_factor(&self, k: usize) -> f64 {
        match &self.filter {
            Some(f) => f.eval(k as f64 / self.terms as f64),
            None => 1.0,
        }
    }

    /// Raw partial sum of the CDF expansion at `e` clamped into the
    /// support (evaluations outside [a, b] use the nearest endpoint).
    pub fn cdf_raw(&self, e: f64) -> f64 {
        let s = &self.support;
        let e = e.clamp(s.a, s.b);
        let width = s.width();
        let theta = std::f64::consts::PI * (e - s.a) / width;
        let mut acc = 0.5 * self.coeffs[0] * (e - s.a);
        for k in 1..=self.terms {
            let kf = k as f64;
            acc += self.filter_factor(k) * self.coeffs[k] * width / (kf * std::f64::consts::PI)
                * (kf * theta).sin();
        }
        acc
    }

    /// Density expansion (derivative of `cdf_raw`).
    pub fn density(&self, e: f64) -> f64 {
        let s = &self.support;
        let e = e.clamp(s.a, s.b);
        let theta = std::f64::consts::PI * (e - s.a) / s.width();
        let mut acc = 0.5 * self.coeffs[0];
        for k in 1..=self.terms {
            acc += self.filter_factor(k) * self.coeffs[k] * (k as f64 * theta).cos();
        }
        acc
    }

    /// Exposure CDF: zero for e <= 0 (the floor transformation at netting
    /// level; counterparty exposure is nonnegative anyway), otherwise the
    /// partial sum clamped into [0, 1].
    pub fn cdf(&self, e: f64) -> f64 {
        if e <= 0.0 {
            return 0.0;
        }
        self.cdf_raw(e).clamp(0.0, 1.0)
    }

    /// Largest clamp applied on a scan of the raw CDF over an `n`-point
    /// grid; diagnostic for coefficient error. Kept by the engine so
    /// clamping never passes silently.
    pub fn max_cdf_excursion(&self, n: usize) -> f64 {
        let s = &self.support;
        let mut worst = 0.0_f64;
        for i in 0..n {
            let e = s.a + s.width() * i as f64 / (n - 1) as f64;
            let v = self.cdf_raw(e);
            worst = worst.max(-v).max(v - 1.0);
        }
        worst.max(0.0)
    }
}

/// Exposure CDF of a netting-set expansion (floor transformation: zero
/// at and below the origin, the clamped MtM expansion above it).
pub fn cdf_netting(expansion: &CosExpansion, e: f64) -> f64 {
    debug_assert_eq!(expansion.target, ExposureTarget::NettingMtm);
    expansion.cdf(e)
}

/// Exposure CDF of a counterparty-level expansion (filtered partial sum
/// clamped into [0, 1]; the raw sum already vanishes at the support
/// origin a = 0, so inputs below the support evaluate to 0).
pub fn cdf_counterparty(expansion: &CosExpansion, e: f64) -> f64 {
    debug_assert_eq!(expansion.target, ExposureTarget::CounterpartyExposure);
    expansion.cdf(e)
}

/// Why the root search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfeFlag {
    Converged,
    /// The CDF already exceeds alpha at the lower bracket endpoint (the
    /// atom at zero swallows the quantile); the PFE is 0.
    AtomAtZero,
    /// No sign change inside the bracket; the endpoint is returned.
    NoBracket,
}

#[derive(Debug, Clone, Copy)]
pub struct PfeOutcome {
    pub value: f64,
    pub flag: PfeFlag,
}

/// Quantile of the exposure CDF by safeguarded Newton iteration inside
/// `[max(a, 0), b]`, with the density expansion as derivative and
/// bisection whenever a Newton step leaves the bracket (filtered
/// expansions oscillate, so bracketing is mandatory).
pub fn pfe(expansion: &CosExpansion, alpha: f64) -> Result<PfeOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EngineError::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {alpha}"
        )));
    }
    let s = &expansion.support;
    let lo = s.a.max(0.0);
    let hi = s.b;
    if !(hi > lo) {
        // entire support below zero: exposure quantile collapses to 0
        return Ok(PfeOutcome {
            value: 0.0,
            flag: PfeFlag::AtomAtZero,
        });
    }
    let f_lo = expansion.cdf_raw(lo) - alpha;
    if f_lo >= 0.0 {
        return Ok(PfeOutcome {
            value: if lo == 0.0 { 0.0 } else { lo },
            flag: if lo == 0.0 {
                PfeFlag::AtomAtZero
            } else {
                PfeFlag::NoBracket
            },
        });
    }
    let f_hi = expansion.cdf_raw(hi) - alpha;
    if f_hi < 0.0 {
        return Ok(PfeOutcome {
            value: hi,
            flag: PfeFlag::NoBracket,
        });
    }
    let tol = 1e-13 * s.width();
    let mut a_br = lo;
    let mut b_br = hi;
    let mut f_a = f_lo;
    // secant-style initial point
    let mut x = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
    if !(x > a_br && x < b_br) {
        x = 0.5 * (a_br + b_br);
    }
    let mut result = x;
    for _ in 0..200 {
        let fx = expansion.cdf_raw(x) - alpha;
        if fx == 0.0 {
            result = x;
            break;
        }
        if fx.signum() == f_a.signum() {
            a_br = x;
            f_a = fx;
        } else {
            b_br = x;
        }
        if b_br - a_br <= tol {
            result = 0.5 * (a_br + b_br);
            break;
        }
        let d = expansion.density(x);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > a_br && newton < b_br {
            newton
        } else {
            0.5 * (a_br + b_br)
        };
        result = x;
    }
    Ok(PfeOutcome {
        value: result,
        flag: PfeFlag::Converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EeOutcome {
    pub value: f64,
    /// Magnitude clamped away when coefficient error drove the closed
    /// form slightly negative.
    pub clamp: f64,
}

/// Closed-form expected exposure from the MtM expansion: the analytic
/// integral of `max(v, 0)` against the cosine density over [a, b].
pub fn ee(expansion: &CosExpansion) -> EeOutcome {
    let s = &expansion.support;
    let (a, b) = (s.a, s.b);
    let width = s.width();
    let u = b.max(0.0);
    let l = a.max(0.0);
    let mut acc = 0.25 * expansion.coeffs[0] * (u * u - l * l);
    for k in 1..=expansion.terms {
        let kf = k as f64;
        let c = kf * std::f64::consts::PI / width;
        let su = (c * (u - a)).sin();
        let sl = (c * (l - a)).sin();
        let cu = (c * (u - a)).cos();
        let cl = (c * (l - a)).cos();
        acc += expansion.filter_factor(k)
            * expansion.coeffs[k]
            * ((u * su - l * sl) / c + (cu - cl) / (c * c));
    }
    if acc < 0.0 {
        EeOutcome {
            value: 0.0,
            clamp: -acc,
        }
    } else {
        EeOutcome {
            value: acc,
            clamp: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{normal_cdf, normal_pdf, normal_quantile};
    use approx::assert_abs_diff_eq;

    // Exact characteristic function of N(mu, sigma^2); isolates the
    // expansion mechanics from quadrature error.
    fn normal_phi(mu: f64, sigma: f64, k_max: usize, omega_step: f64) -> Vec<Complex<f64>> {
        (0..=k_max)
            .map(|k| {
                let w = k as f64 * omega_step;
                Complex::from_polar((-0.5 * w * w * sigma * sigma).exp(), w * mu)
            })
            .collect()
    }

    fn normal_expansion(mu: f64, sigma: f64, k: usize) -> CosExpansion {
        let support = cos_support(mu, sigma, 8.0, false).unwrap();
        let phi = normal_phi(mu, sigma, k, support.omega_step());
        CosExpansion::from_chf(&phi, support, None, ExposureTarget::NettingMtm).unwrap()
    }

    #[test]
    fn support_rule_examples() {
        let s = cos_support(0.0, 1.0, 8.0, false).unwrap();
        assert_eq!((s.a, s.b), (-8.0, 8.0));
        let s = cos_support(1.0, 2.0, 8.0, true).unwrap();
        assert_eq!(s.a, 0.0);
        assert_eq!(s.b, 17.0);
        assert!(cos_support(0.0, 0.0, 8.0, false).is_err());
        assert!(cos_support(0.0, -1.0, 8.0, false).is_err());
    }

    #[test]
    fn filter_endpoints() {
        let f = SpectralFilter::exponential(2).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        assert_abs_diff_eq!(f.eval(1.0), f64::EPSILON, epsilon = 1e-30);
        assert_eq!(f.eval(0.5), f.eval(-0.5));
        assert!(SpectralFilter::exponential(3).is_err());
        assert!(SpectralFilter::exponential(0).is_err());
    }

    #[test]
    fn leading_coefficient_is_mass_scaled() {
        let e = normal_expansion(0.3, 1.5, 32);
        assert_abs_diff_eq!(e.coeffs[0], 2.0 / e.support.width(), epsilon = 1e-15);
    }

    #[test]
    fn symmetric_density_kills_odd_coefficients() {
        // mu centered in [a, b] by construction of the moment rule
        let e = normal_expansion(0.7, 1.0, 24);
        for k in (1..=24).step_by(2) {
            assert!(
                e.coeffs[k].abs() < 1e-15,
                "odd coefficient {k} = {}",
                e.coeffs[k]
            );
        }
    }

    #[test]
    fn cdf_and_density_reconstruct_the_normal() {
        let (mu, sigma) = (0.5, 1.3);
        let e = normal_expansion(mu, sigma, 64);
        let mut worst_cdf = 0.0_f64;
        let mut worst_pdf = 0.0_f64;
        for i in 0..=400 {
            let x = e.support.a + e.support.width() * i as f64 / 400.0;
            let z = (x - mu) / sigma;
            worst_cdf = worst_cdf.max((e.cdf_raw(x) - normal_cdf(z)).abs());
            worst_pdf = worst_pdf.max((e.density(x) - normal_pdf(z) / sigma).abs());
        }
        assert!(worst_cdf < 1e-9, "cdf sup error {worst_cdf}");
        assert!(worst_pdf < 1e-9, "density sup error {worst_pdf}");
    }

    #[test]
    fn cdf_endpoint_and_floor_behavior() {
        let e = normal_expansion(2.0, 0.5, 48);
        assert_eq!(e.cdf(-1.0), 0.0);
        assert_eq!(e.cdf(0.0), 0.0);
        assert_abs_diff_eq!(e.cdf(e.support.b), 1.0, epsilon = 1e-6);
        // outside-support input evaluates at the clamped endpoint
        assert_abs_diff_eq!(
            e.cdf(e.support.b + 5.0),
            e.cdf(e.support.b),
            epsilon = 0.0
        );
    }

    #[test]
    fn trivial_filter_is_the_identity() {
        let base = normal_expansion(0.2, 1.0, 40);
        let mut filtered = base.clone();
        filtered.filter = Some(SpectralFilter {
            order: 2,
            alpha: 0.0,
        });
        for i in 0..=37 {
            let x = base.support.a + base.support.width() * i as f64 / 37.0;
            assert_eq!(base.cdf_raw(x), filtered.cdf_raw(x));
            assert_eq!(base.density(x), filtered.density(x));
        }
    }

    #[test]
    fn filter_damps_last_coefficient_to_eps() {
        let mut e = normal_expansion(0.2, 1.0, 40);
        e.filter = Some(SpectralFilter::exponential(2).unwrap());
        assert_abs_diff_eq!(e.filter_factor(40), f64::EPSILON, epsilon = 1e-30);
    }

    #[test]
    fn pfe_matches_analytic_normal_quantile() {
        let (mu, sigma) = (1.0, 0.8);
        let e = normal_expansion(mu, sigma, 96);
        let alpha = 0.975;
        let out = pfe(&e, alpha).unwrap();
        assert_eq!(out.flag, PfeFlag::Converged);
        let exact = mu + sigma * normal_quantile(alpha).unwrap();
        assert_abs_diff_eq!(out.value, exact, epsilon = 1e-9);
    }

    #[test]
    fn pfe_atom_at_zero_for_deep_negative_book() {
        let e = normal_expansion(-5.0, 1.0, 96);
        let out = pfe(&e, 0.975).unwrap();
        assert_eq!(out.value, 0.0);
        assert_eq!(out.flag, PfeFlag::AtomAtZero);
    }

    #[test]
    fn pfe_rejects_bad_alpha() {
        let e = normal_expansion(0.0, 1.0, 16);
        assert!(pfe(&e, 0.0).is_err());
        assert!(pfe(&e, 1.0).is_err());
    }

    #[test]
    fn ee_matches_gaussian_expected_positive_part() {
        let (mu, sigma) = (0.4, 1.1);
        let e = normal_expansion(mu, sigma, 64);
        let out = ee(&e);
        let z = mu / sigma;
        let exact = mu * normal_cdf(z) + sigma * normal_pdf(z);
        assert!(
            (out.value - exact).abs() / exact < 1e-9,
            "got {} want {exact}",
            out.value
        );
        assert_eq!(out.clamp, 0.0);
    }

    #[test]
    fn ee_collapses_when_support_is_negative() {
        let e = normal_expansion(-20.0, 1.0, 48);
        assert!(e.support.b < 0.0);
        let out = ee(&e);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn ee_equals_numerical_quadrature_of_floored_density() {
        // independent route: Simpson integration of max(v,0) against the
        // reconstructed density. The integrand vanishes below zero, so
        // integrate on [max(a,0), b] where it is smooth.
        let e = normal_expansion(0.6, 1.4, 64);
        let out = ee(&e);
        let n = 20_000;
        let (a, b) = (e.support.a.max(0.0), e.support.b);
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let v = a + h * i as f64;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * v.max(0.0) * e.density(v);
        }
        acc *= h / 3.0;
        assert!(
            (out.value - acc).abs() / acc.abs() < 1e-8,
            "closed form {} vs quadrature {acc}",
            out.value
        );
    }

    #[test]
    fn truncation_keeps_prefix_coefficients() {
        let e = normal_expansion(0.0, 1.0, 50);
        let t = e.truncated(12);
        assert_eq!(t.terms, 12);
        assert_eq!(t.coeffs.len(), 13);
        assert_eq!(t.coeffs[..], e.coeffs[..13]);
    }

    #[test]
    fn excursion_scan_is_small_for_clean_expansion() {
        let e = normal_expansion(0.0, 1.0, 64);
        assert!(e.max_cdf_excursion(500) < 1e-9);
    }
}
