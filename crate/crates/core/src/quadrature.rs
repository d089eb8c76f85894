//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

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

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]`.
///
/// Fails with [`Error::Numeric`] when `max_intervals` subdivisions do not
/// bring the summed error estimate below `max(abs_tol, rel_tol·|I|)`, or
/// when the integrand produces a non-finite value.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: QuadratureOptions,
) -> Result<Integral> {
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = kronrod15(&f, lo, hi);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        if !value.is_finite() {
            return Err(Error::Numeric {
                message: "integrand is not finite on the integration range".into(),
                achieved: f64::INFINITY,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Integral { value, error });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Numeric {
                message: format!("quadrature did not converge in {} intervals", opts.max_intervals),
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            return Err(Error::Numeric {
                message: "quadrature interval underflow".into(),
                achieved: error,
            });
        }
        let left = kronrod15(&f, worst.lo, mid);
        let right = kronrod15(&f, mid, worst.hi);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically so the running totals do not drift.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}
