use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Posterior over the number of components.
///
/// `pmf[k − 1]` is the mass at `k` for `k = 1..=k_max`; mass above `k_max`
/// is kept in `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPosterior {
    pub pmf: Vec<f64>,
    pub overflow: f64,
    pub mode: u64,
    /// Central 95% interval. An upper end of `k_max + 1` means the bound
    /// falls in the overflow bin.
    pub interval: (u64, u64),
    /// Posterior over the number of occupied clusters, `t_pmf[t − 1]`.
    pub t_pmf: Vec<f64>,
    pub t_draws: Vec<usize>,
    pub k_draws: Vec<u64>,
}

impl KPosterior {
    pub fn from_pmf(pmf: Vec<f64>, overflow: f64) -> Self {
        let mode = posterior_mode(&pmf);
        let interval = credible_interval(&pmf, 0.95);
        Self {
            pmf,
            overflow,
            mode,
            interval,
            t_pmf: Vec::new(),
            t_draws: Vec::new(),
            k_draws: Vec::new(),
        }
    }

    pub fn k_max(&self) -> u64 {
        self.pmf.len() as u64
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.pmf.get(k as usize - 1).copied().unwrap_or(0.0)
    }

    /// Histogram of the recorded `k` draws on the same bins as `pmf`.
    pub fn empirical_pmf(&self) -> (Vec<f64>, f64) {
        let mut counts = vec![0.0; self.pmf.len()];
        let mut over = 0.0;
        let n = self.k_draws.len().max(1) as f64;
        for &k in &self.k_draws {
            match counts.get_mut(k as usize - 1) {
                Some(c) => *c += 1.0 / n,
                None => over += 1.0 / n,
            }
        }
        (counts, over)
    }
}

/// Smallest `k` among the maximizers of the pmf.
pub fn posterior_mode(pmf: &[f64]) -> u64 {
    let mut best = 0;
    for (i, &p) in pmf.iter().enumerate() {
        if p > pmf[best] {
            best = i;
        }
    }
    best as u64 + 1
}

/// Central credible interval: the smallest `k` whose cumulative mass reaches
/// `(1 − level)/2`, and the smallest whose cumulative mass reaches
/// `(1 + level)/2`. Returns `pmf.len() + 1` when a bound is not reached.
pub fn credible_interval(pmf: &[f64], level: f64) -> (u64, u64) {
    // slack for rounding in cumulative sums such as 39 × (1/40)
    const SLACK: f64 = 1e-9;
    let lo_target = 0.5 * (1.0 - level) - SLACK;
    let hi_target = 0.5 * (1.0 + level) - SLACK;
    let beyond = pmf.len() as u64 + 1;
    let (mut lo, mut hi) = (beyond, beyond);
    let mut cum = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        cum += p;
        let k = i as u64 + 1;
        if lo == beyond && cum >= lo_target {
            lo = k;
        }
        if cum >= hi_target {
            hi = k;
            break;
        }
    }
    (lo, hi)
}

/// Half the L1 distance; missing entries count as zero.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    0.5 * (0..len)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Effective sample size from Geyer's initial monotone sequence estimator.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (n as f64 * c0)
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = acf(2 * m) + acf(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0);
    n as f64 / tau
}

/// Checks that a pmf is a probability vector to within `tol`.
pub fn check_normalised(pmf: &[f64], overflow: f64, tol: f64) -> Result<()> {
    if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain("pmf has negative or non-finite entries"));
    }
    let total: f64 = pmf.iter().sum::<f64>() + overflow;
    if (total - 1.0).abs() > tol {
        return Err(Error::domain(format!(
            "pmf sums to {total}, not 1 within {tol}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        let mut point = vec![0.0; 10];
        point[2] = 1.0;
        assert_eq!(credible_interval(&point, 0.95), (3, 3));
        let uniform = vec![1.0 / 40.0; 40];
        assert_eq!(credible_interval(&uniform, 0.95), (1, 39));
        let lb = [0.0, 0.0, 0.18, 0.24, 0.22, 0.16, 0.10, 0.05, 0.03, 0.01];
        let lb: Vec<f64> = lb.iter().map(|p| p / 0.99).collect();
        assert_eq!(credible_interval(&lb, 0.95), (3, 9));
    }

    #[test]
    fn mode_prefers_smallest() {
        assert_eq!(posterior_mode(&[0.1, 0.4, 0.4, 0.1]), 2);
        assert_eq!(posterior_mode(&[1.0]), 1);
    }

    #[test]
    fn tv() {
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!((tv_distance(&[1.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ess_of_independent_and_sticky_series() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let iid: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let e = effective_sample_size(&iid);
        assert!(e > 8_000.0 && e < 12_000.0, "{e}");
        let sticky: Vec<f64> = (0..10_000).map(|i| (i / 100) as f64 % 2.0).collect();
        assert!(effective_sample_size(&sticky) < 500.0);
    }
}
