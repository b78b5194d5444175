//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Used as an independent oracle: moment checks for filters and
//! cross-checks of the incomplete gamma function never go through the
//! closed forms they are checking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4_000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol · |I|)`.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, lo, hi);
    let (mut total, mut error) = (first.value, first.error);
    heap.push(first);
    while !(error <= abs_tol.max(rel_tol * total.abs())) {
        if heap.len() >= MAX_SEGMENTS || !total.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure {
                tolerance: abs_tol.max(rel_tol * total.abs()),
                estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // The interval cannot be split further in floating point.
            return Err(Error::QuadratureFailure {
                tolerance: abs_tol.max(rel_tol * total.abs()),
                estimate: error,
            });
        }
        let left = kronrod(&f, worst.lo, mid);
        let right = kronrod(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    if !total.is_finite() || !error.is_finite() {
        return Err(Error::QuadratureFailure {
            tolerance: abs_tol,
            estimate: error,
        });
    }
    // Re-sum the segments so the running updates leave no drift.
    let mut values: Vec<f64> = heap.iter().map(|s| s.value).collect();
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(crate::summation::compensated_sum(values))
}

/// Integrates `f` over `[lo, hi]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    integrate_with(f, lo, hi, 0.0, rel_tol)
}
