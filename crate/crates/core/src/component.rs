//! Gaussian component families.
//!
//! Two families are provided. [`ConjugateNormalGamma`] places independent
//! normal-gamma priors on the mean and precision of each coordinate, so the
//! parameters of a cluster integrate out in closed form. The univariate
//! [`RichardsonGreenModel`] uses independent normal and gamma priors with a
//! random gamma rate `b` shared by all components; its parameters stay
//! instantiated and are updated by Gibbs steps.

use crate::error::{Error, Result};
use crate::special::{half_ln_2pi, ln_gamma, ln_gamma_diff, ln_normal_precision};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

/// Per-cluster sufficient statistics.
///
/// Sums are accumulated about a shift (the first point inserted into an
/// empty cluster) to limit cancellation for data far from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    count: usize,
    shift: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl ClusterStats {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            shift: vec![0.0; dim],
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
        }
    }

    pub fn from_points<'a>(dim: usize, points: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut s = Self::new(dim);
        for x in points {
            s.insert(x);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn insert(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        if self.count == 0 {
            self.shift.copy_from_slice(x);
        }
        self.count += 1;
        for j in 0..x.len() {
            let z = x[j] - self.shift[j];
            self.sum[j] += z;
            self.sum_sq[j] += z * z;
        }
    }

    pub fn remove(&mut self, x: &[f64]) {
        assert!(self.count > 0, "removing from an empty cluster");
        self.count -= 1;
        if self.count == 0 {
            self.shift.fill(0.0);
            self.sum.fill(0.0);
            self.sum_sq.fill(0.0);
            return;
        }
        for j in 0..x.len() {
            let z = x[j] - self.shift[j];
            self.sum[j] -= z;
            self.sum_sq[j] -= z * z;
        }
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.shift[j] + self.sum[j] / self.count as f64
    }

    /// `Σ (x_j − x̄_j)²`
    pub fn scatter(&self, j: usize) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.sum_sq[j] - self.sum[j] * self.sum[j] / self.count as f64).max(0.0)
    }

    /// `Σ (x_j − mu)²`
    pub fn scatter_about(&self, j: usize, mu: f64) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let d = self.mean(j) - mu;
        self.scatter(j) + self.count as f64 * d * d
    }

    /// Largest discrepancy in mean and scatter against `other`, relative to
    /// the magnitude of the values compared.
    pub fn max_discrepancy(&self, other: &ClusterStats) -> f64 {
        if self.count != other.count {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            if self.count == 0 {
                break;
            }
            let dm = (self.mean(j) - other.mean(j)).abs() / self.mean(j).abs().max(1.0);
            let ds = (self.scatter(j) - other.scatter(j)).abs() / self.scatter(j).max(1.0);
            worst = worst.max(dm).max(ds);
        }
        worst
    }
}

/// Likelihood families whose cluster parameters integrate out.
pub trait CollapsedLikelihood: Sync {
    /// Per-cluster values that make [`Self::log_predictive_cached`] cheap.
    type Cache: Clone + std::fmt::Debug + Send;

    fn dim(&self) -> usize;

    /// `ln ∫ Π_{i ∈ c} f(x_i | θ) dH(θ)` for a nonempty cluster.
    fn log_marginal(&self, stats: &ClusterStats) -> f64;

    fn cache(&self, stats: &ClusterStats) -> Self::Cache;

    fn log_predictive_cached(&self, cache: &Self::Cache, x: &[f64]) -> f64;

    /// Rebuilds `cache` for `stats`, reusing its storage where possible.
    fn refresh_cache(&self, stats: &ClusterStats, cache: &mut Self::Cache) {
        *cache = self.cache(stats);
    }

    /// `ln m(x | cluster)`; an empty cluster gives the prior predictive.
    fn log_predictive(&self, stats: &ClusterStats, x: &[f64]) -> f64 {
        self.log_predictive_cached(&self.cache(stats), x)
    }
}

/// A likelihood identically equal to one. Under it the sampler targets the
/// prior over partitions.
#[derive(Debug, Clone, Copy)]
pub struct ConstantLikelihood {
    pub dim: usize,
}

impl CollapsedLikelihood for ConstantLikelihood {
    type Cache = ();

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_marginal(&self, _stats: &ClusterStats) -> f64 {
        0.0
    }

    fn cache(&self, _stats: &ClusterStats) {}

    fn log_predictive_cached(&self, _cache: &(), _x: &[f64]) -> f64 {
        0.0
    }
}

/// `λ_j ~ Gamma(shape, rate)`, `μ_j | λ_j ~ N(m0, (w λ_j)^{−1})`,
/// independently for every coordinate `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateNormalGamma {
    pub dim: usize,
    pub m0: f64,
    pub w: f64,
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct NormalGammaCache {
    ln_const: f64,
    exponent: f64,
    centers: Vec<f64>,
    scales: Vec<f64>,
}

impl ConjugateNormalGamma {
    pub fn new(dim: usize, m0: f64, w: f64, shape: f64, rate: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        for (name, v) in [("w", w), ("shape", shape), ("rate", rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !m0.is_finite() {
            return Err(Error::domain("m0 must be finite"));
        }
        Ok(Self {
            dim,
            m0,
            w,
            shape,
            rate,
        })
    }

    /// Unit hyperparameters: `m0 = 0`, `w = shape = rate = 1`.
    pub fn unit(dim: usize) -> Self {
        Self::new(dim, 0.0, 1.0, 1.0, 1.0).expect("valid")
    }

    // (w_n, m_n, b_n) for coordinate j
    fn posterior(&self, stats: &ClusterStats, j: usize) -> (f64, f64, f64) {
        let n = stats.count() as f64;
        if stats.is_empty() {
            return (self.w, self.m0, self.rate);
        }
        let w_n = self.w + n;
        let mean = stats.mean(j);
        let m_n = (self.w * self.m0 + n * mean) / w_n;
        let dev = mean - self.m0;
        let b_n = self.rate + 0.5 * stats.scatter(j) + self.w * n * dev * dev / (2.0 * w_n);
        (w_n, m_n, b_n)
    }
}

impl CollapsedLikelihood for ConjugateNormalGamma {
    type Cache = NormalGammaCache;

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_marginal(&self, stats: &ClusterStats) -> f64 {
        assert!(!stats.is_empty(), "marginal likelihood of an empty cluster");
        let n = stats.count() as f64;
        let a_n = self.shape + 0.5 * n;
        let per_dim_const = -n * half_ln_2pi() + 0.5 * (self.w / (self.w + n)).ln()
            + self.shape * self.rate.ln()
            + ln_gamma_diff(a_n, self.shape);
        (0..self.dim)
            .map(|j| {
                let (_, _, b_n) = self.posterior(stats, j);
                per_dim_const - a_n * b_n.ln()
            })
            .sum()
    }

    fn cache(&self, stats: &ClusterStats) -> NormalGammaCache {
        let mut cache = NormalGammaCache {
            ln_const: 0.0,
            exponent: 0.0,
            centers: Vec::with_capacity(self.dim),
            scales: Vec::with_capacity(self.dim),
        };
        self.refresh_cache(stats, &mut cache);
        cache
    }

    fn refresh_cache(&self, stats: &ClusterStats, cache: &mut NormalGammaCache) {
        let n = stats.count() as f64;
        let a_n = self.shape + 0.5 * n;
        cache.centers.clear();
        cache.scales.clear();
        let mut spread_prod = 1.0;
        if stats.is_empty() {
            let two_b_spread = 2.0 * self.rate * (self.w + 1.0) / self.w;
            for _ in 0..self.dim {
                spread_prod *= std::f64::consts::PI * two_b_spread;
                cache.centers.push(self.m0);
                cache.scales.push(1.0 / two_b_spread);
            }
        } else {
            // same algebra as `posterior`, with the divisions hoisted
            let inv_n = 1.0 / n;
            let w_n = self.w + n;
            let inv_wn = 1.0 / w_n;
            let shrink = 0.5 * self.w * n * inv_wn;
            for j in 0..self.dim {
                let s = stats.sum[j];
                let mean = stats.shift[j] + s * inv_n;
                let scatter = (stats.sum_sq[j] - s * s * inv_n).max(0.0);
                let dev = mean - self.m0;
                let b_n = self.rate + 0.5 * scatter + shrink * dev * dev;
                // Student-t with 2 a_n degrees of freedom, squared scale b_n (w_n + 1) / (a_n w_n)
                let two_b_spread = 2.0 * b_n * (w_n + 1.0) * inv_wn;
                spread_prod *= std::f64::consts::PI * two_b_spread;
                cache.centers.push((self.w * self.m0 + n * mean) * inv_wn);
                cache.scales.push(1.0 / two_b_spread);
            }
        }
        let ln_spread = if spread_prod.is_finite() && spread_prod > 0.0 {
            spread_prod.ln()
        } else {
            cache
                .scales
                .iter()
                .map(|s| (std::f64::consts::PI / s).ln())
                .sum()
        };
        cache.ln_const = self.dim as f64 * ln_gamma_diff(a_n + 0.5, a_n) - 0.5 * ln_spread;
        cache.exponent = a_n + 0.5;
    }

    #[inline]
    fn log_predictive_cached(&self, cache: &NormalGammaCache, x: &[f64]) -> f64 {
        let mut prod = 1.0;
        for j in 0..x.len() {
            let z = x[j] - cache.centers[j];
            prod *= 1.0 + cache.scales[j] * z * z;
        }
        let ln_kernel = if prod.is_finite() {
            prod.ln()
        } else {
            (0..x.len())
                .map(|j| {
                    let z = x[j] - cache.centers[j];
                    (cache.scales[j] * z * z).ln_1p()
                })
                .sum()
        };
        cache.ln_const - cache.exponent * ln_kernel
    }
}

/// Instantiated parameters of one univariate normal component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mu: f64,
    pub lambda: f64,
}

impl NormalParams {
    #[inline]
    pub fn ln_density(&self, x: f64) -> f64 {
        ln_normal_precision(x, self.mu, self.lambda)
    }
}

/// `μ_j ~ N(μ0, σ0²)`, `λ_j ~ Gamma(a, b)` (rate `b`), `b ~ Gamma(a0, b0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonGreenModel {
    pub mu0: f64,
    /// Prior standard deviation of the component means.
    pub sigma0: f64,
    pub a: f64,
    pub a0: f64,
    pub b0: f64,
}

impl RichardsonGreenModel {
    pub fn new(mu0: f64, sigma0: f64, a: f64, a0: f64, b0: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::domain("mu0 must be finite"));
        }
        for (name, v) in [("sigma0", sigma0), ("a", a), ("a0", a0), ("b0", b0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            mu0,
            sigma0,
            a,
            a0,
            b0,
        })
    }

    /// Data-dependent hyperparameters: `μ0` the midrange, `σ0` the range,
    /// `b0 = 10/σ0²`, with `a = 2` and `a0 = 0.2`.
    pub fn from_data(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::domain("data-dependent hyperparameters need at least two points"));
        }
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        if !(range > 0.0) {
            return Err(Error::domain(
                "all observations are identical so the data range is zero; \
                 add jitter or use the conjugate model",
            ));
        }
        Self::new(0.5 * (hi + lo), range, 2.0, 0.2, 10.0 / (range * range))
    }

    fn prior_precision(&self) -> f64 {
        1.0 / (self.sigma0 * self.sigma0)
    }

    pub fn sample_b<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        gamma_draw(self.a0, self.b0, rng)
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, b: f64, rng: &mut R) -> NormalParams {
        let mu = Normal::new(self.mu0, self.sigma0).expect("valid").sample(rng);
        let lambda = gamma_draw(self.a, b, rng);
        NormalParams { mu, lambda }
    }

    /// Mean and variance of `μ | λ, data`.
    pub fn mu_conditional(&self, stats: &ClusterStats, lambda: f64) -> (f64, f64) {
        let n = stats.count() as f64;
        let prec = lambda * n + self.prior_precision();
        let data_term = if stats.is_empty() {
            0.0
        } else {
            lambda * n * stats.mean(0)
        };
        ((data_term + self.mu0 * self.prior_precision()) / prec, 1.0 / prec)
    }

    /// Shape and rate of `λ | μ, b, data`.
    pub fn lambda_conditional(&self, stats: &ClusterStats, mu: f64, b: f64) -> (f64, f64) {
        let n = stats.count() as f64;
        (self.a + 0.5 * n, b + 0.5 * stats.scatter_about(0, mu))
    }

    /// One Gibbs pass over a component's parameters: `μ` given the current
    /// `λ`, then `λ` given the new `μ`.
    pub fn gibbs_update_params<R: Rng + ?Sized>(
        &self,
        stats: &ClusterStats,
        current: NormalParams,
        b: f64,
        rng: &mut R,
    ) -> NormalParams {
        let (m, v) = self.mu_conditional(stats, current.lambda);
        let mu = m + v.sqrt() * standard_normal(rng);
        let (shape, rate) = self.lambda_conditional(stats, mu, b);
        let lambda = gamma_draw(shape, rate, rng);
        NormalParams { mu, lambda }
    }

    /// `b | λ_1..λ_t ~ Gamma(a0 + t·a, b0 + Σ λ_c)`.
    pub fn gibbs_update_b<R: Rng + ?Sized>(&self, lambdas: &[f64], rng: &mut R) -> f64 {
        let shape = self.a0 + lambdas.len() as f64 * self.a;
        let rate = self.b0 + lambdas.iter().sum::<f64>();
        gamma_draw(shape, rate, rng)
    }

    /// Log prior density of one component's parameters given `b`.
    pub fn ln_prior_params(&self, p: &NormalParams, b: f64) -> f64 {
        ln_normal_precision(p.mu, self.mu0, self.prior_precision())
            + ln_gamma_density(p.lambda, self.a, b)
    }

    pub fn ln_prior_b(&self, b: f64) -> f64 {
        ln_gamma_density(b, self.a0, self.b0)
    }
}

pub(crate) fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

pub(crate) fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
    // Tiny shapes can underflow to zero; keep the draw strictly positive.
    g.sample(rng).max(f64::MIN_POSITIVE)
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rand_distr::StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats(points: &[f64]) -> ClusterStats {
        ClusterStats::from_points(1, points.iter().map(std::slice::from_ref))
    }

    // ∫∫ Π N(x_i | μ, 1/λ) N(μ | m0, 1/(wλ)) Gamma(λ | a, b) dμ dλ by nested quadrature.
    fn marginal_by_quadrature(model: &ConjugateNormalGamma, xs: &[f64]) -> f64 {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 4000,
        };
        let inner = |lambda: f64| -> f64 {
            if lambda <= 0.0 {
                return 0.0;
            }
            let sd = 1.0 / (model.w * lambda).sqrt();
            let f = |mu: f64| -> f64 {
                let mut l = ln_normal_precision(mu, model.m0, model.w * lambda);
                for &x in xs {
                    l += ln_normal_precision(x, mu, lambda);
                }
                l.exp()
            };
            let lo = model.m0.min(xs.iter().copied().fold(f64::INFINITY, f64::min)) - 40.0 * sd;
            let hi = model.m0.max(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)) + 40.0 * sd;
            integrate(f, lo, hi, opts).unwrap().value
                * ln_gamma_density(lambda, model.shape, model.rate).exp()
        };
        // λ = s / (1 − s) maps (0, 1) onto (0, ∞)
        let outer = |s: f64| -> f64 {
            let lambda = s / (1.0 - s);
            inner(lambda) / ((1.0 - s) * (1.0 - s))
        };
        integrate(outer, 0.0, 1.0 - 1e-12, opts).unwrap().value.ln()
    }

    #[test]
    fn single_point_marginal_is_student_t() {
        let m = ConjugateNormalGamma::unit(1);
        assert!((m.log_marginal(&stats(&[0.0])) - 0.25f64.ln()).abs() < 1e-14);
        assert!((m.log_predictive(&ClusterStats::new(1), &[0.0]) - 0.25f64.ln()).abs() < 1e-14);
        assert!((marginal_by_quadrature(&m, &[0.0]) - 0.25f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn dimensions_are_independent() {
        let m = ConjugateNormalGamma::unit(2);
        let s = ClusterStats::from_points(2, [&[0.0, 0.0][..]]);
        assert!((m.log_marginal(&s) - 2.0 * 0.25f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn chain_rule_of_marginals() {
        let m = ConjugateNormalGamma::unit(1);
        let x = 0.7;
        let two = m.log_marginal(&stats(&[x, x]));
        let one = m.log_marginal(&stats(&[x]));
        assert!((two - 2.0 * one).abs() > 1e-3);
        let sequential = one + m.log_predictive(&stats(&[x]), &[x]);
        assert!((two - sequential).abs() < 1e-13);
        assert!((two - marginal_by_quadrature(&m, &[x, x])).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_quadrature_on_random_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = ConjugateNormalGamma::new(1, 0.5, 0.8, 1.7, 0.9).unwrap();
        for _ in 0..20 {
            let n = rng.random_range(1..=5);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..3.0)).collect();
            let exact = model.log_marginal(&stats(&xs));
            let quad = marginal_by_quadrature(&model, &xs);
            assert!((exact - quad).abs() < 1e-6, "{xs:?}: {exact} vs {quad}");
        }
    }

    #[test]
    fn predictive_is_marginal_ratio() {
        let model = ConjugateNormalGamma::new(3, -1.0, 0.5, 2.0, 3.0).unwrap();
        let pts = [[0.1, 2.0, -3.0], [1.1, -0.5, 0.0], [0.4, 0.4, 0.4]];
        let mut s = ClusterStats::new(3);
        for p in &pts {
            s.insert(p);
        }
        let x = [0.3, -0.2, 1.9];
        let mut with = s.clone();
        with.insert(&x);
        let lhs = model.log_predictive(&s, &x) + model.log_marginal(&s);
        assert!((lhs - model.log_marginal(&with)).abs() < 1e-10);
    }

    #[test]
    fn translation_invariance() {
        let delta = 1234.5;
        let a = ConjugateNormalGamma::new(1, 0.0, 1.0, 1.0, 1.0).unwrap();
        let b = ConjugateNormalGamma::new(1, delta, 1.0, 1.0, 1.0).unwrap();
        let xs = [0.3, -0.4, 1.2];
        let shifted: Vec<f64> = xs.iter().map(|x| x + delta).collect();
        let pa = a.log_predictive(&stats(&xs), &[0.5]);
        let pb = b.log_predictive(&stats(&shifted), &[0.5 + delta]);
        assert!((pa - pb).abs() < 1e-9);
    }

    #[test]
    fn stats_insert_remove() {
        let pts: Vec<f64> = (0..50).map(|i| 1e4 + (i as f64 * 0.37).sin()).collect();
        let mut s = ClusterStats::new(1);
        for x in &pts {
            s.insert(std::slice::from_ref(x));
        }
        let again = stats(&pts);
        assert_eq!(s, again);
        // remove out of order, then compare with a fresh build
        for x in pts.iter().skip(10).rev() {
            s.remove(std::slice::from_ref(x));
        }
        let fresh = stats(&pts[..10]);
        assert!(s.max_discrepancy(&fresh) < 1e-9);
        for x in pts.iter().take(10) {
            s.remove(std::slice::from_ref(x));
        }
        assert_eq!(s, ClusterStats::new(1));
    }

    #[test]
    fn degenerate_cluster_is_finite() {
        let m = ConjugateNormalGamma::unit(1);
        let v = m.log_marginal(&stats(&[3.0; 40]));
        assert!(v.is_finite());
    }

    #[test]
    fn data_dependent_hyperparameters() {
        let m = RichardsonGreenModel::from_data(&[0.0, 10.0]).unwrap();
        assert_eq!((m.mu0, m.sigma0, m.b0, m.a, m.a0), (5.0, 10.0, 0.1, 2.0, 0.2));
        let m = RichardsonGreenModel::from_data(&[-1.0, 1.0]).unwrap();
        assert_eq!((m.mu0, m.sigma0), (0.0, 2.0));
        assert!((m.b0 - 2.5).abs() < 1e-15);
        assert!(RichardsonGreenModel::from_data(&[3.0, 3.0]).is_err());
        assert!(RichardsonGreenModel::from_data(&[3.0]).is_err());
    }

    #[test]
    fn mu_conditional_concentrates_on_sample_mean() {
        let m = RichardsonGreenModel::new(0.0, 1.0, 2.0, 0.2, 10.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|i| 5.0 + if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (mean, var) = m.mu_conditional(&stats(&xs), 1.0);
        assert!((mean - 5.0).abs() < 1e-3);
        assert!(var < 1e-4);
        let (shape, rate) = m.lambda_conditional(&ClusterStats::new(1), 0.3, 4.0);
        assert_eq!((shape, rate), (m.a, 4.0));
    }

    // Normalise exp(log_unnorm) on a grid and compare with the analytic density.
    fn grid_check(log_unnorm: impl Fn(f64) -> f64, density: impl Fn(f64) -> f64, lo: f64, hi: f64) {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
        let logs: Vec<f64> = xs.iter().map(|&x| log_unnorm(x)).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        // Simpson normalisation
        let mut z = w[0] + w[n];
        for i in 1..n {
            z += if i % 2 == 1 { 4.0 } else { 2.0 } * w[i];
        }
        z *= h / 3.0;
        let worst = xs
            .iter()
            .zip(&w)
            .map(|(&x, &wi)| (wi / z - density(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "max deviation {worst}");
    }

    #[test]
    fn full_conditionals_match_grid_normalisation() {
        let m = RichardsonGreenModel::new(1.0, 3.0, 2.0, 0.2, 10.0 / 9.0).unwrap();
        let xs = [0.2, 1.4, 0.9, 2.2, 1.1];
        let s = stats(&xs);
        let lambda = 1.7;
        let b = 0.8;
        let (mean, var) = m.mu_conditional(&s, lambda);
        grid_check(
            |mu| {
                ln_normal_precision(mu, m.mu0, 1.0 / (m.sigma0 * m.sigma0))
                    + xs.iter().map(|&x| ln_normal_precision(x, mu, lambda)).sum::<f64>()
            },
            |mu| ln_normal_precision(mu, mean, 1.0 / var).exp(),
            mean - 12.0 * var.sqrt(),
            mean + 12.0 * var.sqrt(),
        );
        let mu = 1.05;
        let (shape, rate) = m.lambda_conditional(&s, mu, b);
        grid_check(
            |l| {
                ln_gamma_density(l, m.a, b)
                    + xs.iter().map(|&x| ln_normal_precision(x, mu, l)).sum::<f64>()
            },
            |l| ln_gamma_density(l, shape, rate).exp(),
            1e-9,
            40.0,
        );
    }

    #[test]
    fn b_update_without_clusters_is_prior() {
        let m = RichardsonGreenModel::new(0.0, 1.0, 2.0, 0.2, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| m.gibbs_update_b(&[], &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.02).abs() < 0.02 * 0.03);
        let mean: f64 = (0..n).map(|_| m.gibbs_update_b(&[0.0], &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.2 / 10.0).abs() < 0.22 * 0.02);
    }

    #[test]
    fn alternating_updates_leave_prior_invariant() {
        // No data: (λ, b) chain should have b ~ Gamma(a0, b0) marginally.
        let m = RichardsonGreenModel::new(0.0, 1.0, 2.0, 2.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let empty = ClusterStats::new(1);
        let mut b = m.sample_b(&mut rng);
        let mut p = m.sample_params(b, &mut rng);
        let n = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            p = m.gibbs_update_params(&empty, p, b, &mut rng);
            b = m.gibbs_update_b(&[p.lambda], &mut rng);
            s1 += b;
            s2 += b * b;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.5 * 0.02, "mean {mean}");
        assert!((var - 0.125).abs() < 0.125 * 0.05, "var {var}");
    }
}
