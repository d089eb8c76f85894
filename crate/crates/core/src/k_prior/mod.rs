//! Priors on the number of mixture components `k`.
//!
//! The loss-based prior assigns `P(k) ∝ exp(−c·k)` and, after setting
//! `p = e^{−c}` and placing a beta prior on `p`, becomes the beta-geometric
//! (beta-negative-binomial with one failure) law
//!
//! ```text
//! P(k) = Γ(α+β) / (Γ(α)Γ(β)) · Γ(k+β−1) Γ(α+1) / Γ(k+α+β),   k = 1, 2, …
//! ```
//!
//! In that parametrisation `q = 1 − p` follows a standard `Beta(α, β)`
//! distribution, so `E(k) = E(1/q) = (α+β−1)/(α−1)`. The default choice
//! `α = β = 1` gives `P(k) = 1/(k(k+1))`.

mod finite;
mod parse;
pub use parse::SPEC_FORMS;

pub use finite::finite_support_pmf;

use crate::error::{Error, Result};
use crate::series::{sum_series, SeriesSum, TailRule};
use crate::special::{ln_beta, ln_gamma, ln_gamma_diff, ln_gamma_ratio, KahanSum};
use rand::Rng;
use rand_distr::{Beta, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Parameters of a prior on `k`, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KPriorSpec {
    /// Beta-geometric marginal of the loss-based prior, support `k ≥ 1`.
    LossBased { alpha: f64, beta: f64 },
    /// `P(k) ∝ exp(−c·k)` with the rate held fixed: geometric with `p = e^{−c}`.
    LossBasedFixedRate { c: f64 },
    /// Loss-based prior truncated to `{1, …, max_k}`.
    LossBasedFinite { alpha: f64, beta: f64, max_k: u64 },
    Uniform { max_k: u64 },
    /// Poisson restricted to `k ≥ 1` and renormalised.
    TruncatedPoisson { lambda: f64 },
    /// `k − 1 ~ Poisson(λ)`.
    ShiftedPoisson { lambda: f64 },
    /// `P(k) = p^{k−1}(1 − p)` on `k ≥ 1`.
    Geometric { p: f64 },
}

impl KPriorSpec {
    pub fn loss_based_default() -> Self {
        KPriorSpec::LossBased {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    /// Short column label used in result tables.
    pub fn label(&self) -> String {
        match self {
            KPriorSpec::LossBased { alpha, beta } if *alpha == 1.0 && *beta == 1.0 => "LB".into(),
            KPriorSpec::Uniform { max_k: 50 } => "UN".into(),
            KPriorSpec::TruncatedPoisson { lambda } if *lambda == 1.0 => "PO".into(),
            other => other.to_string(),
        }
    }

    /// File-system friendly identifier.
    pub fn slug(&self) -> String {
        let s = self.to_string();
        let mut out = String::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '(' | ',' => out.push('_'),
                ')' | ' ' => {}
                c => out.push(c),
            }
        }
        out
    }
}

impl fmt::Display for KPriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPriorSpec::LossBased { alpha, beta } if *alpha == 1.0 && *beta == 1.0 => {
                write!(f, "lossbased-default")
            }
            KPriorSpec::LossBased { alpha, beta } => write!(f, "lossbased({alpha},{beta})"),
            KPriorSpec::LossBasedFixedRate { c } => write!(f, "lossbased-rate({c})"),
            KPriorSpec::LossBasedFinite { alpha, beta, max_k } => {
                write!(f, "lossbased-finite({alpha},{beta},{max_k})")
            }
            KPriorSpec::Uniform { max_k } => write!(f, "uniform({max_k})"),
            KPriorSpec::TruncatedPoisson { lambda } => write!(f, "poisson({lambda})"),
            KPriorSpec::ShiftedPoisson { lambda } => write!(f, "poisson-shifted({lambda})"),
            KPriorSpec::Geometric { p } => write!(f, "geometric({p})"),
        }
    }
}

impl std::str::FromStr for KPriorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_prior_spec(s)
    }
}

/// Mean and variance of a prior on `k`; `None` marks a moment that does not
/// exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorMoments {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
}

/// Probabilities `P(1), …, P(k_max)` with a bound on the remaining mass.
#[derive(Debug, Clone)]
pub struct PmfVector {
    pub probs: Vec<f64>,
    /// Upper bound on `P(k > k_max)`; exact when `exact_tail` is set.
    pub tail: f64,
    pub exact_tail: bool,
}

impl PmfVector {
    pub fn k_max(&self) -> u64 {
        self.probs.len() as u64
    }
}

/// A validated prior on the number of components.
///
/// Cheap to clone; finite-support variants share their probability table.
#[derive(Debug, Clone)]
pub struct KPrior {
    spec: KPriorSpec,
    // log-normaliser (loss-based) or log P table (finite variants)
    ln_const: f64,
    table: Option<Arc<[f64]>>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl KPrior {
    pub fn new(spec: KPriorSpec) -> Result<Self> {
        let mut ln_const = 0.0;
        let mut table = None;
        match &spec {
            KPriorSpec::LossBased { alpha, beta } => {
                check_positive("alpha", *alpha)?;
                check_positive("beta", *beta)?;
                ln_const = alpha.ln() + ln_gamma_diff(alpha + beta, *beta);
            }
            KPriorSpec::LossBasedFixedRate { c } => check_positive("c", *c)?,
            KPriorSpec::LossBasedFinite { alpha, beta, max_k } => {
                check_positive("alpha", *alpha)?;
                check_positive("beta", *beta)?;
                if *max_k == 0 {
                    return Err(Error::domain("support bound K must be at least 1"));
                }
                let probs = (1..=*max_k)
                    .map(|k| finite_support_pmf(*alpha, *beta, *max_k, k))
                    .collect::<Result<Vec<_>>>()?;
                let total: f64 = probs.iter().copied().collect::<KahanSum>().value();
                if (total - 1.0).abs() > 1e-6 {
                    return Err(Error::Numeric {
                        message: "finite-support pmf does not normalise".into(),
                        achieved: (total - 1.0).abs(),
                    });
                }
                if probs.iter().any(|&p| !(p > 0.0)) {
                    return Err(Error::Numeric {
                        message: "finite-support pmf underflowed to zero".into(),
                        achieved: 0.0,
                    });
                }
                table = Some(probs.iter().map(|p| (p / total).ln()).collect());
            }
            KPriorSpec::Uniform { max_k } => {
                if *max_k == 0 {
                    return Err(Error::domain("support bound K must be at least 1"));
                }
                ln_const = -(*max_k as f64).ln();
            }
            KPriorSpec::TruncatedPoisson { lambda } => {
                check_positive("lambda", *lambda)?;
                // −λ − ln(1 − e^{−λ})
                ln_const = -lambda - (-(-lambda).exp_m1()).ln();
            }
            KPriorSpec::ShiftedPoisson { lambda } => {
                check_positive("lambda", *lambda)?;
                ln_const = -lambda;
            }
            KPriorSpec::Geometric { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::domain(format!("geometric p must lie in (0, 1), got {p}")));
                }
            }
        }
        Ok(Self {
            spec,
            ln_const,
            table,
        })
    }

    pub fn loss_based(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(KPriorSpec::LossBased { alpha, beta })
    }

    /// `P(k) = 1 / (k (k + 1))`.
    pub fn loss_based_default() -> Self {
        Self::new(KPriorSpec::loss_based_default()).expect("default parameters are valid")
    }

    pub fn fixed_rate(c: f64) -> Result<Self> {
        Self::new(KPriorSpec::LossBasedFixedRate { c })
    }

    pub fn loss_based_finite(alpha: f64, beta: f64, max_k: u64) -> Result<Self> {
        Self::new(KPriorSpec::LossBasedFinite { alpha, beta, max_k })
    }

    pub fn uniform(max_k: u64) -> Result<Self> {
        Self::new(KPriorSpec::Uniform { max_k })
    }

    pub fn truncated_poisson(lambda: f64) -> Result<Self> {
        Self::new(KPriorSpec::TruncatedPoisson { lambda })
    }

    pub fn shifted_poisson(lambda: f64) -> Result<Self> {
        Self::new(KPriorSpec::ShiftedPoisson { lambda })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(KPriorSpec::Geometric { p })
    }

    pub fn spec(&self) -> &KPriorSpec {
        &self.spec
    }

    /// Largest `k` with positive mass, `None` for infinite support.
    pub fn max_k(&self) -> Option<u64> {
        match self.spec {
            KPriorSpec::LossBasedFinite { max_k, .. } | KPriorSpec::Uniform { max_k } => Some(max_k),
            _ => None,
        }
    }

    pub fn in_support(&self, k: u64) -> bool {
        k >= 1 && self.max_k().is_none_or(|m| k <= m)
    }

    pub fn log_pmf(&self, k: u64) -> Result<f64> {
        if !self.in_support(k) {
            return Err(Error::domain(format!("k = {k} is outside the support of {}", self.spec)));
        }
        Ok(self.ln_pmf_at(k as f64))
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        self.log_pmf(k).map(f64::exp)
    }

    /// Log-pmf for `k ≥ 1`, `−∞` off the support. Real-valued `k` is only
    /// meaningful for the loss-based variant, whose pmf extends smoothly.
    pub(crate) fn ln_pmf_at(&self, k: f64) -> f64 {
        if k < 1.0 {
            return f64::NEG_INFINITY;
        }
        match &self.spec {
            KPriorSpec::LossBased { alpha, beta } => {
                self.ln_const + ln_gamma_ratio(k, beta - 1.0, alpha + beta)
            }
            KPriorSpec::LossBasedFixedRate { c } => {
                // p^{k−1}(1−p), p = e^{−c}
                -c * (k - 1.0) + (-(-c).exp_m1()).ln()
            }
            KPriorSpec::Geometric { p } => (k - 1.0) * p.ln() + (-p).ln_1p(),
            KPriorSpec::LossBasedFinite { max_k, .. } => {
                if k > *max_k as f64 {
                    f64::NEG_INFINITY
                } else {
                    self.table.as_ref().expect("finite table")[k as usize - 1]
                }
            }
            KPriorSpec::Uniform { max_k } => {
                if k > *max_k as f64 {
                    f64::NEG_INFINITY
                } else {
                    self.ln_const
                }
            }
            KPriorSpec::TruncatedPoisson { lambda } => {
                self.ln_const + k * lambda.ln() - ln_gamma(k + 1.0)
            }
            KPriorSpec::ShiftedPoisson { lambda } => {
                self.ln_const + (k - 1.0) * lambda.ln() - ln_gamma(k)
            }
        }
    }

    // Upper bound on P(j+1)/P(j) over all j ≥ k, for exponentially decaying priors.
    fn ratio_bound(&self, k: u64) -> Option<f64> {
        match &self.spec {
            KPriorSpec::LossBasedFixedRate { c } => Some((-c).exp()),
            KPriorSpec::Geometric { p } => Some(*p),
            KPriorSpec::TruncatedPoisson { lambda } => Some(lambda / (k as f64 + 1.0)),
            KPriorSpec::ShiftedPoisson { lambda } => Some(lambda / k as f64),
            _ => None,
        }
    }

    /// `ln Σ_{k ≥ start} P(k)·F(k)` for a positive weight `F`.
    ///
    /// `ln_weight` must extend smoothly to real `k` (used for polynomially
    /// decaying priors) and `weight_ratio(k)` must bound `F(j+1)/F(j)` for
    /// every `j ≥ k` (used for exponentially decaying priors).
    pub(crate) fn weighted_sum(
        &self,
        start: u64,
        ln_weight: &dyn Fn(f64) -> f64,
        weight_ratio: &dyn Fn(u64) -> f64,
        rel_tol: f64,
    ) -> Result<SeriesSum> {
        let start = start.max(1);
        let term = |k: f64| self.ln_pmf_at(k) + ln_weight(k);
        if let Some(last) = self.max_k() {
            return sum_series(&term, start, TailRule::Finite { last }, rel_tol);
        }
        if matches!(self.spec, KPriorSpec::LossBased { .. }) {
            return sum_series(&term, start, TailRule::Smooth, rel_tol);
        }
        let bound = |k: u64| self.ratio_bound(k).expect("ratio prior") * weight_ratio(k);
        sum_series(&term, start, TailRule::Ratio(&bound), rel_tol)
    }

    /// `P(k > k_max)`.
    pub fn tail_mass(&self, k_max: u64) -> f64 {
        match &self.spec {
            KPriorSpec::LossBased { alpha, beta } => {
                // E[p^K] with 1 − p ~ Beta(α, β)
                (ln_beta(beta + k_max as f64, *alpha) - ln_beta(*beta, *alpha)).exp()
            }
            KPriorSpec::LossBasedFixedRate { c } => (-c * k_max as f64).exp(),
            KPriorSpec::Geometric { p } => p.powf(k_max as f64),
            KPriorSpec::LossBasedFinite { max_k, .. } | KPriorSpec::Uniform { max_k } => {
                if k_max >= *max_k {
                    0.0
                } else {
                    (k_max + 1..=*max_k).map(|k| self.ln_pmf_at(k as f64).exp()).sum()
                }
            }
            KPriorSpec::TruncatedPoisson { .. } | KPriorSpec::ShiftedPoisson { .. } => self
                .weighted_sum(k_max + 1, &|_| 0.0, &|_| 1.0, 1e-14)
                .map(|s| s.ln_value.exp())
                .unwrap_or(f64::NAN),
        }
    }

    pub fn moments(&self) -> Result<PriorMoments> {
        if let KPriorSpec::LossBased { alpha, beta } = self.spec {
            return Ok(loss_based_moments(alpha, beta));
        }
        let tol = 1e-14;
        let m1 = self.weighted_sum(1, &|k| k.ln(), &|k| (k as f64 + 1.0) / k as f64, tol)?;
        let m2 = self.weighted_sum(
            1,
            &|k| 2.0 * k.ln(),
            &|k| ((k as f64 + 1.0) / k as f64).powi(2),
            tol,
        )?;
        let mean = m1.ln_value.exp();
        let var = m2.ln_value.exp() - mean * mean;
        Ok(PriorMoments {
            mean: Some(mean),
            variance: Some(var.max(0.0)),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.spec {
            KPriorSpec::LossBased { alpha, beta } => {
                // q = 1 − p ~ Beta(α, β), then k | p geometric
                let q = Beta::new(*alpha, *beta).expect("validated").sample(rng);
                geometric_draw(1.0 - q, rng)
            }
            KPriorSpec::LossBasedFixedRate { c } => geometric_draw((-c).exp(), rng),
            KPriorSpec::Geometric { p } => geometric_draw(*p, rng),
            KPriorSpec::Uniform { max_k } => rng.random_range(1..=*max_k),
            KPriorSpec::LossBasedFinite { .. } => {
                let table = self.table.as_ref().expect("finite table");
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, lp) in table.iter().enumerate() {
                    acc += lp.exp();
                    if u < acc {
                        return i as u64 + 1;
                    }
                }
                table.len() as u64
            }
            KPriorSpec::TruncatedPoisson { lambda } => {
                if *lambda >= 0.5 {
                    let dist = Poisson::new(*lambda).expect("validated");
                    loop {
                        let k = dist.sample(rng) as u64;
                        if k >= 1 {
                            return k;
                        }
                    }
                }
                self.sample_by_inversion(rng)
            }
            KPriorSpec::ShiftedPoisson { lambda } => {
                1 + Poisson::new(*lambda).expect("validated").sample(rng) as u64
            }
        }
    }

    fn sample_by_inversion<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = 1u64;
        loop {
            acc += self.ln_pmf_at(k as f64).exp();
            if u < acc || acc >= 1.0 - 1e-16 {
                return k;
            }
            k += 1;
        }
    }

    /// `P(1), …, P(k_max)` with `P(k > k_max) ≤ tail_epsilon`.
    pub fn pmf_vector(&self, tail_epsilon: f64) -> Result<PmfVector> {
        if !(tail_epsilon > 0.0 && tail_epsilon < 1.0) {
            return Err(Error::domain("tail_epsilon must lie in (0, 1)"));
        }
        const K_LIMIT: u64 = 50_000_000;
        let (k_max, tail, exact) = match &self.spec {
            KPriorSpec::LossBased { alpha, beta } if *alpha == 1.0 && *beta == 1.0 => {
                // tail beyond K is 1/(K + 1)
                let k = ((1.0 / tail_epsilon).ceil() as u64).saturating_sub(1).max(1);
                (k, 1.0 / (k as f64 + 1.0), true)
            }
            KPriorSpec::LossBased { .. } => {
                let mut hi = 1u64;
                while self.tail_mass(hi) > tail_epsilon {
                    hi *= 2;
                    if hi > K_LIMIT {
                        return Err(Error::domain(format!(
                            "tail of {} is too heavy for epsilon {tail_epsilon}",
                            self.spec
                        )));
                    }
                }
                let mut lo = hi / 2;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.tail_mass(mid) > tail_epsilon {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let k = hi.max(1);
                (k, self.tail_mass(k), true)
            }
            KPriorSpec::LossBasedFinite { max_k, .. } | KPriorSpec::Uniform { max_k } => {
                (*max_k, 0.0, true)
            }
            KPriorSpec::LossBasedFixedRate { .. } | KPriorSpec::Geometric { .. } => {
                let mut k = 1;
                while self.tail_mass(k) > tail_epsilon {
                    k += 1;
                }
                (k, self.tail_mass(k), true)
            }
            KPriorSpec::TruncatedPoisson { .. } | KPriorSpec::ShiftedPoisson { .. } => {
                let mut k = 1u64;
                loop {
                    let r = self.ratio_bound(k).expect("ratio prior");
                    if r < 1.0 {
                        let bound = self.ln_pmf_at(k as f64).exp() * r / (1.0 - r);
                        if bound <= tail_epsilon {
                            break (k, bound, false);
                        }
                    }
                    k += 1;
                }
            }
        };
        let probs = (1..=k_max).map(|k| self.ln_pmf_at(k as f64).exp()).collect();
        Ok(PmfVector {
            probs,
            tail,
            exact_tail: exact,
        })
    }
}

impl fmt::Display for KPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

/// Number of trials up to and including the first success, success
/// probability `1 − p`: `P(k) = p^{k−1}(1 − p)`.
fn geometric_draw<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let failures = (u.ln() / p.ln()).floor();
    if failures >= (u64::MAX - 1) as f64 {
        u64::MAX - 1
    } else {
        1 + failures as u64
    }
}

fn loss_based_moments(alpha: f64, beta: f64) -> PriorMoments {
    let mean = (alpha > 1.0).then(|| (alpha + beta - 1.0) / (alpha - 1.0));
    let variance = (alpha > 2.0).then(|| {
        alpha * beta * (alpha + beta - 1.0) / ((alpha - 2.0) * (alpha - 1.0) * (alpha - 1.0))
    });
    PriorMoments { mean, variance }
}

/// `P(k | p) = p^{k−1}(1 − p)`: the geometric law of `k` given the rate.
pub fn conditional_geometric_pmf(k: u64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    Ok(p.powf((k - 1) as f64) * (1.0 - p))
}

/// Free functional form of [`KPrior::moments`].
pub fn prior_moments(prior: &KPrior) -> Result<PriorMoments> {
    prior.moments()
}

/// The `β` giving the loss-based prior mean `target_mean` for a fixed `α > 1`.
pub fn elicit_beta(target_mean: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must exceed 1 for a finite mean, got {alpha}")));
    }
    if !(target_mean > 1.0 && target_mean.is_finite()) {
        return Err(Error::domain(format!(
            "prior mean of k must exceed 1, got {target_mean}"
        )));
    }
    Ok((target_mean - 1.0) * (alpha - 1.0))
}
