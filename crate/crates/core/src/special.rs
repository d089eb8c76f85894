//! Log-domain special functions used throughout the crate.
//!
//! Gamma-function ratios are evaluated without forming the individual
//! `ln Γ` values once both arguments are large, so that ratios such as
//! `Γ(k + β − 1) / Γ(k + α + β)` stay accurate for `k` far beyond `10^6`.

pub use statrs::function::gamma::ln_gamma;

const STIRLING_MIN: f64 = 30.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// Stirling series correction: ln Γ(z) − [(z − ½) ln z − z + ½ ln 2π].
fn stirling_correction(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln Γ(a) − ln Γ(b)` for `a, b > 0`.
pub fn ln_gamma_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a.min(b) < STIRLING_MIN {
        return ln_gamma(a) - ln_gamma(b);
    }
    // (a − ½) ln a − (b − ½) ln b written around ln b so that the large
    // pieces cancel analytically.
    let delta = a - b;
    delta * b.ln() + (a - 0.5) * (delta / b).ln_1p() - delta + stirling_correction(a)
        - stirling_correction(b)
}

/// `ln Γ(x + a) − ln Γ(x + b)` for `x + a, x + b > 0`.
///
/// Unlike [`ln_gamma_diff`] the offsets are never added to `x` before the
/// logarithm is taken, so they still count when `x` dwarfs them.
pub fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if x + a.min(b) < STIRLING_MIN || x < 4.0 * a.abs().max(b.abs()) {
        return ln_gamma_diff(x + a, x + b);
    }
    // (x + a − ½) ln(x + a) − (x + a) − [same with b], expanded about ln x
    let delta = a - b;
    delta * x.ln() + (x + a - 0.5) * (a / x).ln_1p() - (x + b - 0.5) * (b / x).ln_1p() - delta
        + stirling_correction(x + a)
        - stirling_correction(x + b)
}

/// Logarithm of the rising factorial `x^(n) = Γ(x + n) / Γ(x)`, `x > 0`.
pub fn ln_rising(x: f64, n: f64) -> f64 {
    if x > n {
        ln_gamma_ratio(x, n, 0.0)
    } else {
        ln_gamma_diff(x + n, x)
    }
}

/// Logarithm of the falling factorial `k_(t) = k! / (k − t)!`.
///
/// Continuous in `k` for `k > t − 1`; returns `−∞` when `k < t` for
/// integral arguments.
pub fn ln_falling(k: f64, t: f64) -> f64 {
    if k - t + 1.0 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if k > t {
        ln_gamma_ratio(k, 1.0, 1.0 - t)
    } else {
        ln_gamma_diff(k + 1.0, k - t + 1.0)
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    // ln B(a, b) = ln Γ(a) − ln Γ(a + b) + ln Γ(b), pairing the larger
    // argument with a + b.
    if a >= b {
        ln_gamma_diff(a, a + b) + ln_gamma(b)
    } else {
        ln_gamma_diff(b, a + b) + ln_gamma(a)
    }
}

/// Log density of `N(x | mu, 1 / lambda)`.
#[inline]
pub fn ln_normal_precision(x: f64, mu: f64, lambda: f64) -> f64 {
    let z = x - mu;
    0.5 * lambda.ln() - HALF_LN_2PI - 0.5 * lambda * z * z
}

pub fn half_ln_2pi() -> f64 {
    HALF_LN_2PI
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Streaming log-sum-exp accumulator. Terms are kept relative to a running
/// maximum and summed with compensation.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    scaled: KahanSum,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: KahanSum::new(),
        }
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            let rescale = (self.max - log_term).exp();
            let old = self.scaled.value() * rescale;
            self.scaled = KahanSum::new();
            self.scaled.add(old);
            self.max = log_term;
        }
        self.scaled.add((log_term - self.max).exp());
    }

    pub fn ln_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.value().ln()
        }
    }
}

/// Draws an index with probability proportional to `exp(log_weights[i])`.
///
/// `u` is a uniform variate on `[0, 1)`. Entries equal to `−∞` are never
/// selected. The slice is overwritten with the unnormalized weights.
pub fn sample_log_weights(log_weights: &mut [f64], u: f64) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(max.is_finite(), "no finite weight to sample from");
    let mut total = 0.0;
    for w in log_weights.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in log_weights.iter().enumerate() {
        if *w > 0.0 {
            acc += *w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}
