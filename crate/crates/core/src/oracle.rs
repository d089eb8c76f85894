//! Exact posteriors for tiny data sets by enumerating every set partition.

use crate::component::{ClusterStats, CollapsedLikelihood};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::k_prior::KPrior;
use crate::mfm::{build_vn_table, VnTable};
use crate::special::{ln_rising, KahanSum};

/// Largest data set the enumeration accepts.
pub const MAX_ORACLE_N: usize = 10;

/// Set partitions of `{0..n}` as restricted growth strings, in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Partitions {
    current: Vec<usize>,
    // running maximum of current[..=i]
    max_so_far: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        // advance: rightmost position that can still grow
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] <= self.max_so_far[i - 1] {
                self.current[i] += 1;
                self.max_so_far[i] = self.max_so_far[i - 1].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.max_so_far[j] = self.max_so_far[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// All set partitions of `n` labelled items. Refuses `n > 10`.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > MAX_ORACLE_N {
        return Err(Error::domain(format!(
            "enumeration supports 1 <= n <= {MAX_ORACLE_N} (got {n}); \
             Bell({n}) partitions would be needed, use the sampler instead"
        )));
    }
    Ok(Partitions {
        current: vec![0; n],
        max_so_far: vec![0; n],
        done: false,
    })
}

/// Number of set partitions of `n` items.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &v in &row {
            let last = *next.last().expect("nonempty");
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Exact posterior over partitions and its summaries.
#[derive(Debug, Clone)]
pub struct PartitionPosterior {
    pub n: usize,
    /// Partitions as restricted growth strings.
    pub partitions: Vec<Vec<u8>>,
    pub probs: Vec<f64>,
    /// `t_pmf[t − 1] = P(t clusters | x)`.
    pub t_pmf: Vec<f64>,
    /// `ln Σ_C V_n(|C|) Π_c γ^(|c|) m(x_c)`.
    pub ln_evidence: f64,
    vn: VnTable,
}

impl PartitionPosterior {
    /// `P(k | x)` for `k = 1..=k_max`, and the mass above `k_max`.
    pub fn k_pmf(&self, k_max: u64) -> (Vec<f64>, f64) {
        let mut pmf = vec![0.0; k_max as usize];
        for (t0, &pt) in self.t_pmf.iter().enumerate() {
            if pt == 0.0 {
                continue;
            }
            let (cond, _) = self.vn.k_given_t_pmf(t0 + 1, k_max);
            for (p, c) in pmf.iter_mut().zip(cond) {
                *p += pt * c;
            }
        }
        let total: f64 = pmf.iter().sum();
        (pmf, (1.0 - total).max(0.0))
    }

    /// Posterior probability that observations `i` and `j` share a cluster.
    pub fn co_cluster_prob(&self, i: usize, j: usize) -> f64 {
        self.partitions
            .iter()
            .zip(&self.probs)
            .filter(|(p, _)| p[i] == p[j])
            .map(|(_, &w)| w)
            .sum()
    }
}

// Row order used to make per-block statistics independent of labels.
fn cmp_rows(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Exact posterior of the partition given the data under a collapsed model.
///
/// Every partition `C` has weight `V_n(|C|) Π_c γ^(|c|) m(x_c)`. Block
/// terms and partition weights are summed in sorted order, so relabelling
/// the observations leaves the posterior over `t` and `k` bitwise unchanged.
pub fn exact_posterior<L: CollapsedLikelihood>(
    data: &Dataset,
    model: &L,
    prior: &KPrior,
    gamma: f64,
) -> Result<PartitionPosterior> {
    let n = data.len();
    let parts = enumerate_partitions(n)?;
    if model.dim() != data.dim() {
        return Err(Error::domain("model and data dimensions differ"));
    }
    let vn = build_vn_table(prior, n, gamma, 1e-13)?;

    // ln γ^(|S|) + ln m(x_S) for every nonempty subset S
    let mut block = vec![f64::NAN; 1 << n];
    for mask in 1usize..1 << n {
        let mut rows: Vec<&[f64]> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| data.row(i)).collect();
        rows.sort_by(|a, b| cmp_rows(a, b));
        let stats = ClusterStats::from_points(data.dim(), rows);
        block[mask] = ln_rising(gamma, stats.count() as f64) + model.log_marginal(&stats);
    }

    let mut partitions = Vec::with_capacity(bell_number(n) as usize);
    let mut log_w = Vec::with_capacity(partitions.capacity());
    let mut masks = Vec::with_capacity(n);
    let mut terms = Vec::with_capacity(n);
    for rgs in parts {
        let t = rgs.iter().copied().max().expect("n >= 1") + 1;
        masks.clear();
        masks.resize(t, 0usize);
        for (i, &c) in rgs.iter().enumerate() {
            masks[c] |= 1 << i;
        }
        terms.clear();
        terms.extend(masks.iter().map(|&m| block[m]));
        terms.sort_by(f64::total_cmp);
        let lw = vn.ln_v(t) + terms.iter().sum::<f64>();
        log_w.push(lw);
        partitions.push(rgs.iter().map(|&c| c as u8).collect::<Vec<u8>>());
    }

    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Internal("every partition has zero weight".into()));
    }
    let mut by_t: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (p, &lw) in partitions.iter().zip(&log_w) {
        let t = *p.iter().max().expect("n >= 1") as usize + 1;
        by_t[t - 1].push((lw - max).exp());
    }
    let mut t_mass = Vec::with_capacity(n);
    for ws in &mut by_t {
        ws.sort_by(f64::total_cmp);
        let mut acc = KahanSum::new();
        for &w in ws.iter() {
            acc.add(w);
        }
        t_mass.push(acc.value());
    }
    let z: f64 = t_mass.iter().sum();
    let t_pmf = t_mass.iter().map(|m| m / z).collect();
    let probs = log_w.iter().map(|lw| (lw - max).exp() / z).collect();
    Ok(PartitionPosterior {
        n,
        partitions,
        probs,
        t_pmf,
        ln_evidence: max + z.ln(),
        vn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::{ConjugateNormalGamma, ConstantLikelihood};

    #[test]
    fn counts_match_bell_numbers() {
        let bell = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(bell_number(n), b);
            if n >= 1 {
                assert_eq!(enumerate_partitions(n).unwrap().count() as u128, b);
            }
        }
        assert!(enumerate_partitions(11).is_err());
    }

    #[test]
    fn restricted_growth_order() {
        let all: Vec<_> = enumerate_partitions(3).unwrap().collect();
        assert_eq!(
            all,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1], vec![0, 1, 2]]
        );
    }

    #[test]
    fn constant_likelihood_recovers_prior() {
        let prior = KPrior::loss_based_default();
        let data = Dataset::from_column(&[0.0; 5]).unwrap();
        let post = exact_posterior(&data, &ConstantLikelihood { dim: 1 }, &prior, 1.0).unwrap();
        assert!(post.ln_evidence.abs() < 1e-10);
        let (pmf, _) = post.k_pmf(30);
        for (k, p) in pmf.iter().enumerate() {
            let want = prior.pmf(k as u64 + 1).unwrap();
            assert!((p - want).abs() < 1e-10, "k = {}", k + 1);
        }
    }

    #[test]
    fn two_coincident_points() {
        let prior = KPrior::loss_based_default();
        let model = ConjugateNormalGamma::unit(1);
        let data = Dataset::from_column(&[0.4, 0.4]).unwrap();
        let post = exact_posterior(&data, &model, &prior, 1.0).unwrap();
        let vn = build_vn_table(&prior, 2, 1.0, 1e-13).unwrap();
        let s = |xs: &[f64]| ClusterStats::from_points(1, xs.iter().map(std::slice::from_ref));
        let together = vn.ln_v(1) + ln_rising(1.0, 2.0) + model.log_marginal(&s(&[0.4, 0.4]));
        let apart = vn.ln_v(2) + 2.0 * model.log_marginal(&s(&[0.4]));
        let direct = 1.0 / (1.0 + (apart - together).exp());
        assert!((post.co_cluster_prob(0, 1) - direct).abs() < 1e-14);
    }

    #[test]
    fn separated_triplets() {
        let prior = KPrior::loss_based_default();
        let data = Dataset::from_column(&[-10.2, -10.0, -9.7, 9.8, 10.0, 10.3]).unwrap();
        // A mean prior tied to unit precision pulls both triplets towards
        // zero, so one wide cluster wins.
        let unit = exact_posterior(&data, &ConjugateNormalGamma::unit(1), &prior, 1.0).unwrap();
        assert!((unit.t_pmf[0] - 0.845_515_669_599).abs() < 1e-9, "{:?}", unit.t_pmf);
        let diffuse = ConjugateNormalGamma::new(1, 0.0, 0.01, 2.0, 0.1).unwrap();
        let post = exact_posterior(&data, &diffuse, &prior, 1.0).unwrap();
        assert!((post.t_pmf[1] - 0.994_690_003_202).abs() < 1e-9, "{:?}", post.t_pmf);
    }

    #[test]
    fn relabelling_is_bitwise_invariant() {
        let prior = KPrior::truncated_poisson(1.0).unwrap();
        let model = ConjugateNormalGamma::unit(1);
        let xs = [0.3, -1.2, 2.2, 0.9, 5.0, 4.1, -0.4];
        let mut rev = xs;
        rev.reverse();
        let a = exact_posterior(&Dataset::from_column(&xs).unwrap(), &model, &prior, 1.0).unwrap();
        let b = exact_posterior(&Dataset::from_column(&rev).unwrap(), &model, &prior, 1.0).unwrap();
        assert_eq!(a.t_pmf, b.t_pmf);
        assert_eq!(a.k_pmf(15), b.k_pmf(15));
    }
}
