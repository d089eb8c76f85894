use crate::error::{Error, Result};
use crate::k_prior::KPrior;
use crate::special::{ln_falling, ln_rising};
use rand::Rng;

/// Coefficients `V_n(t) = Σ_k P(k) · k_(t) / (γk)^(n)` of the partition law
/// induced by a prior on the number of components, in the log domain.
///
/// Entries are computed lazily up to the largest `t` requested, since
/// chains on large data sets rarely visit more than a few dozen clusters.
#[derive(Debug, Clone)]
pub struct VnTable {
    prior: KPrior,
    n: usize,
    gamma: f64,
    tol: f64,
    // index t; entry 0 unused
    ln_v: Vec<f64>,
    rel_error: Vec<f64>,
}

const INITIAL_ENTRIES: usize = 16;

impl VnTable {
    pub fn new(prior: &KPrior, n: usize, gamma: f64, tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("V-table needs n >= 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::domain("tolerance must lie in (0, 1)"));
        }
        let mut table = Self {
            prior: prior.clone(),
            n,
            gamma,
            tol,
            ln_v: vec![f64::NAN],
            rel_error: vec![0.0],
        };
        table.ensure(INITIAL_ENTRIES.min(n))?;
        if table.ln_v[1] == f64::NEG_INFINITY {
            return Err(Error::Internal("V_n(1) vanished for a proper prior".into()));
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn prior(&self) -> &KPrior {
        &self.prior
    }

    /// Number of entries available without further computation.
    pub fn computed(&self) -> usize {
        self.ln_v.len() - 1
    }

    /// Extends the table to cover `1..=t` (capped at `n`).
    pub fn ensure(&mut self, t: usize) -> Result<()> {
        let t = t.min(self.n);
        while self.computed() < t {
            let next = self.computed() + 1;
            let (lv, err) = self.compute(next)?;
            self.ln_v.push(lv);
            self.rel_error.push(err);
        }
        Ok(())
    }

    fn compute(&self, t: usize) -> Result<(f64, f64)> {
        if self.prior.max_k().is_some_and(|m| (t as u64) > m) {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        let (n, g, tf) = (self.n as f64, self.gamma, t as f64);
        let ln_weight = move |k: f64| ln_falling(k, tf) - ln_rising(g * k, n);
        // F(k+1)/F(k) = (k+1)/(k+1−t) · Π_i (γk+i)/(γk+γ+i) ≤ (k+1)/(k+1−t)
        let ratio = move |k: u64| (k as f64 + 1.0) / (k as f64 + 1.0 - tf);
        let s = self.prior.weighted_sum(t as u64, &ln_weight, &ratio, self.tol)?;
        Ok((s.ln_value, s.rel_error))
    }

    /// `ln V_n(t)`; `t` must already be covered by [`Self::ensure`].
    #[inline]
    pub fn ln_v(&self, t: usize) -> f64 {
        self.ln_v[t]
    }

    /// `ln V_n(t+1) − ln V_n(t)`, or `−∞` when `t = n` or `V_n(t+1) = 0`.
    #[inline]
    pub fn ln_ratio(&self, t: usize) -> f64 {
        if t >= self.n {
            return f64::NEG_INFINITY;
        }
        self.ln_v[t + 1] - self.ln_v[t]
    }

    pub fn rel_error(&self, t: usize) -> f64 {
        self.rel_error[t]
    }

    /// `ln p(k | t) = ln P(k) + ln k_(t) − ln (γk)^(n) − ln V_n(t)`.
    pub fn ln_k_given_t(&self, k: u64, t: usize) -> f64 {
        if (k as usize) < t || !self.prior.in_support(k) {
            return f64::NEG_INFINITY;
        }
        let kf = k as f64;
        self.prior.ln_pmf_at(kf) + ln_falling(kf, t as f64)
            - ln_rising(self.gamma * kf, self.n as f64)
            - self.ln_v[t]
    }

    /// `p(k | t)` for `k = 1..=k_max`, followed by the mass above `k_max`.
    pub fn k_given_t_pmf(&self, t: usize, k_max: u64) -> (Vec<f64>, f64) {
        let probs: Vec<f64> = (1..=k_max).map(|k| self.ln_k_given_t(k, t).exp()).collect();
        let total: f64 = probs.iter().sum();
        (probs, (1.0 - total).max(0.0))
    }

    /// Exact draw from `p(k | t)` by inversion.
    pub fn sample_k<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<u64> {
        if t == 0 || t > self.computed() {
            return Err(Error::domain(format!("t = {t} is outside the computed table")));
        }
        if self.ln_v[t] == f64::NEG_INFINITY {
            return Err(Error::domain(format!("the prior puts no mass on k >= {t}")));
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        const LINEAR_STEPS: u64 = 100_000;
        let first = t as u64;
        for k in first..first + LINEAR_STEPS {
            let p = self.ln_k_given_t(k, t).exp();
            acc += p;
            if u < acc {
                return Ok(k);
            }
            if self.prior.max_k().is_some_and(|m| k >= m) {
                return Ok(k);
            }
        }
        // Far tail: bisect on the remaining mass, which is cheap to evaluate.
        let remaining = 1.0 - u;
        let tail_from = |j: u64| -> Result<f64> { self.tail_from(j, t) };
        let mut lo = first + LINEAR_STEPS - 1;
        let mut hi = lo * 2;
        while tail_from(hi + 1)? > remaining {
            lo = hi;
            hi = hi.checked_mul(2).ok_or_else(|| Error::Numeric {
                message: "k draw ran past the representable range".into(),
                achieved: hi as f64,
            })?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if tail_from(mid + 1)? > remaining {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    // P(k ≥ j | t)
    fn tail_from(&self, j: u64, t: usize) -> Result<f64> {
        let (n, g, tf) = (self.n as f64, self.gamma, t as f64);
        let ln_weight = move |k: f64| ln_falling(k, tf) - ln_rising(g * k, n);
        let ratio = move |k: u64| (k as f64 + 1.0) / (k as f64 + 1.0 - tf);
        let s = self.prior.weighted_sum(j, &ln_weight, &ratio, 1e-10)?;
        Ok((s.ln_value - self.ln_v[t]).exp())
    }
}

/// Builds the table for every `t = 1..=n`.
pub fn build_vn_table(prior: &KPrior, n: usize, gamma: f64, tol: f64) -> Result<VnTable> {
    let mut table = VnTable::new(prior, n, gamma, tol)?;
    table.ensure(n)?;
    Ok(table)
}
