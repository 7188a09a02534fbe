//! Standard normal density, CDF and quantile.
//!
//! `erf`/`erfc` follow Cody's rational minimax approximations (the CALERF
//! scheme), accurate to close to machine precision over the whole range.
//! The quantile uses Acklam's rational initial guess polished by Newton
//! steps on the tail-appropriate residual, so that `normal_cdf(result)`
//! reproduces `p` to near full relative precision even for p = 1e-12.

// coefficient tables keep their published digits
#![allow(clippy::excessive_precision)]

use crate::error::{EngineError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, computed from `erfc` to keep full relative
/// accuracy in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

// Cody region 1 coefficients, |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_6e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_5e3,
    1.857_777_061_846_031_5e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_1e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_170_6e3,
];

// Cody region 2 coefficients, 0.46875 < |x| <= 4.
const ERF_C: [f64; 9] = [
    5.641_884_969_886_700_9e-1,
    8.883_149_794_388_376e0,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001_3e2,
    8.819_522_212_417_691e2,
    1.712_047_612_634_070_6e3,
    2.051_078_377_826_071_5e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_5e-8,
];
const ERF_D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_098_5e2,
    1.621_389_574_566_690_2e3,
    3.290_799_235_733_459_7e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_4e3,
];

// Cody region 3 coefficients, |x| > 4.
const ERF_P: [f64; 6] = [
    3.053_266_349_612_323_4e-1,
    3.603_448_999_498_044_4e-1,
    1.257_817_261_112_292_4e-1,
    1.608_378_514_874_227_7e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_8e-2,
];
const ERF_Q: [f64; 5] = [
    2.568_520_192_289_822_4e0,
    1.872_952_849_923_460_4e0,
    5.279_051_029_514_284e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];

const INV_SQRT_PI: f64 = 5.641_895_835_477_563e-1;

// erfc(y)*exp(y*y) for y in region 2/3, without the exponential factor.
fn erfcx_tail(y: f64) -> f64 {
    if y <= 4.0 {
        let mut num = ERF_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERF_C[i]) * y;
            den = (den + ERF_D[i]) * y;
        }
        (num + ERF_C[7]) / (den + ERF_D[7])
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = ERF_P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + ERF_P[i]) * ysq;
            den = (den + ERF_Q[i]) * ysq;
        }
        let r = ysq * (num + ERF_P[4]) / (den + ERF_Q[4]);
        (INV_SQRT_PI - r) / y
    }
}

// exp(-y*y) evaluated as exp(-u*u)*exp(-(y-u)(y+u)) with u a 1/16 grid
// point, which preserves relative accuracy of the tiny tail values.
fn exp_neg_sq(y: f64) -> f64 {
    let u = (y * 16.0).trunc() / 16.0;
    let del = (y - u) * (y + u);
    (-u * u).exp() * (-del).exp()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf(x);
    }
    let result = if y > 26.6 {
        0.0
    } else {
        exp_neg_sq(y) * erfcx_tail(y)
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        let z = y * y;
        let mut num = ERF_A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + ERF_A[i]) * z;
            den = (den + ERF_B[i]) * z;
        }
        x * (num + ERF_A[3]) / (den + ERF_B[3])
    } else {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        sign * (1.0 - erfc(y))
    }
}

// Acklam rational approximation constants.
const ACK_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239e0,
];
const ACK_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACK_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838e0,
    -2.549_732_539_343_734e0,
    4.374_664_141_464_968e0,
    2.938_163_982_698_783e0,
];
const ACK_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996e0,
    3.754_408_661_907_416e0,
];

fn acklam_guess(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if (P_LOW..=1.0 - P_LOW).contains(&p) {
        let q = p - 0.5;
        let r = q * q;
        let num = (((((ACK_A[0] * r + ACK_A[1]) * r + ACK_A[2]) * r + ACK_A[3]) * r + ACK_A[4])
            * r
            + ACK_A[5])
            * q;
        let den = ((((ACK_B[0] * r + ACK_B[1]) * r + ACK_B[2]) * r + ACK_B[3]) * r + ACK_B[4]) * r
            + 1.0;
        num / den
    } else {
        let q = if p < P_LOW {
            (-2.0 * p.ln()).sqrt()
        } else {
            (-2.0 * (-p).ln_1p()).sqrt()
        };
        let num = ((((ACK_C[0] * q + ACK_C[1]) * q + ACK_C[2]) * q + ACK_C[3]) * q + ACK_C[4]) * q
            + ACK_C[5];
        let den = (((ACK_D[0] * q + ACK_D[1]) * q + ACK_D[2]) * q + ACK_D[3]) * q + 1.0;
        let x = num / den;
        if p < P_LOW {
            x
        } else {
            -x
        }
    }
}

/// Inverse standard normal CDF.
///
/// Rejects p outside (0, 1). The result z satisfies
/// |normal_cdf(z) - p| < ~1e-15 relative.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EngineError::InvalidParameter(format!(
            "normal_quantile requires 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut z = acklam_guess(p);
    // Newton polish on the residual that avoids cancellation: lower tail
    // uses Phi(z) - p directly, upper tail uses the survival function
    // against q = 1 - p.
    let q = 1.0 - p;
    for _ in 0..3 {
        let pdf = normal_pdf(z);
        if pdf < 1e-300 {
            break;
        }
        let step = if p <= 0.5 {
            (0.5 * erfc(-z / SQRT_2) - p) / pdf
        } else {
            -(0.5 * erfc(z / SQRT_2) - q) / pdf
        };
        z -= step;
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    Ok(z)
}
