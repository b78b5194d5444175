//! Real-argument complete and upper incomplete gamma functions.
//!
//! The complete function uses the Lanczos approximation (g = 7, nine
//! coefficients) with reflection below 1/2. The upper incomplete function
//! picks between a Legendre continued fraction, the lower-gamma series, and
//! a near-zero anchor followed by downward recurrence, depending on where
//! `(a, x)` sits.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Inputs closer than this to a nonpositive integer are treated as poles.
pub const POLE_TOLERANCE: f64 = 1e-9;

const MAX_ITER: usize = 10_000;

// Taylor coefficients of 1/Γ(z) about 0: 1/Γ(z) = Σ_{k≥1} RGAMMA[k−1] z^k.
const RGAMMA: [f64; 24] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_24,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_34,
    -0.009_621_971_527_876_974,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065,
    -0.000_215_241_674_114_951,
    0.000_128_050_282_388_116_2,
    -2.013_485_478_078_824e-5,
    -1.250_493_482_142_670_7e-6,
    1.133_027_231_981_695_9e-6,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_206e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_507e-14,
    -5.348_122_539_423_018e-15,
];

// Above this the upward product is replaced by Lanczos.
const PRODUCT_LIMIT: f64 = 60.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// A finite real argument.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealArg(f64);

impl RealArg {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::NonFinite(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RealArg {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

/// Returns true when `a` lies within [`POLE_TOLERANCE`] of 0, -1, -2, ...
pub fn is_gamma_pole(a: f64) -> bool {
    a <= POLE_TOLERANCE && (a - a.round()).abs() <= POLE_TOLERANCE
}

/// sin(pi x) with the argument reduced to [-1/2, 1/2] first.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

fn lanczos(a: f64) -> f64 {
    let x = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    // w^(x + 1/2) split in two so the power does not overflow before the
    // exponential brings it back down.
    let half = w.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * ((-w).exp() * half) * sum
}

/// 1/Γ(1 + x) for |x| ≤ 1/2.
fn rgamma1p(x: f64) -> f64 {
    RGAMMA.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Γ(a) for a ≥ 1/2.
fn gamma_positive(a: f64) -> f64 {
    if a > PRODUCT_LIMIT {
        return lanczos(a);
    }
    // a = n + x with x ∈ [−1/2, 1/2]: Γ(a) = Γ(1 + x) · Π_{j=1}^{n−1} (j + x)
    let n = a.round();
    let x = a - n;
    let mut value = 1.0 / rgamma1p(x);
    let mut j = 1.0;
    while j < n {
        value *= j + x;
        j += 1.0;
    }
    value
}

/// The complete gamma function Γ(a).
pub fn gamma(a: f64) -> Result<f64> {
    let a = RealArg::new(a)?.value();
    if is_gamma_pole(a) {
        return Err(Error::PoleOfGamma(a));
    }
    if a < 0.5 {
        Ok(PI / (sin_pi(a) * gamma_positive(1.0 - a)))
    } else {
        Ok(gamma_positive(a))
    }
}

/// (Γ(1 + c) − 1) / c for |c| ≤ 1/2, without cancellation near c = 0.
fn gamma1pm1_over(c: f64) -> f64 {
    // 1/Γ(1+c) = 1 + c·T(c), so (Γ(1+c) − 1)/c = −T(c) / (1/Γ(1+c)).
    let tail = RGAMMA[1..].iter().rev().fold(0.0, |acc, k| acc * c + k);
    -tail / rgamma1p(c)
}

/// γ(a, x) by its power series; needs a > 0.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (a * x.ln() - x).exp()
}

/// Γ(a, x) by the Legendre continued fraction (modified Lentz).
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (a * x.ln() - x).exp() * h
}

/// Γ(c, x) for c ∈ [−1/2, 1/2] and small x, stable through c = 0.
fn upper_near_zero(c: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let log_term = if c == 0.0 {
        ln_x
    } else {
        (c * ln_x).exp_m1() / c
    };
    // Σ_{n≥1} (−1)^n x^{c+n} / (n! (c+n))
    let xc = (c * ln_x).exp();
    let mut power = xc;
    let mut sum = 0.0;
    for n in 1..MAX_ITER {
        power *= -x / n as f64;
        let term = power / (c + n as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    gamma1pm1_over(c) - log_term - sum
}

/// The upper incomplete gamma function Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt
/// for any finite real `a` and `x > 0`.
pub fn upper_gamma(a: f64, x: f64) -> Result<f64> {
    let a = RealArg::new(a)?.value();
    let x = RealArg::new(x)?.value();
    if x <= 0.0 {
        return Err(Error::Domain(format!(
            "upper_gamma needs x > 0, got {x}"
        )));
    }
    if x >= 1.5 && x >= a + 1.0 {
        return Ok(upper_continued_fraction(a, x));
    }
    if a >= 0.5 {
        return Ok(gamma_positive(a) - lower_series(a, x));
    }
    // a < 1/2 and x < 3/2: anchor at c = a + n ∈ [−1/2, 1/2], recur down.
    let shift = a.round();
    let c = a - shift;
    let mut value = upper_near_zero(c, x);
    let mut b = c;
    let (ln_x, exp_x) = (x.ln(), (-x).exp());
    for _ in 0..(-shift) as usize {
        // Γ(b − 1, x) = (Γ(b, x) − x^{b−1} e^{−x}) / (b − 1)
        value = (value - ((b - 1.0) * ln_x).exp() * exp_x) / (b - 1.0);
        b -= 1.0;
    }
    Ok(value)
}
