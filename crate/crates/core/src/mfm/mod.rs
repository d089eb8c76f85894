//! Partition-based MCMC for mixtures of finite mixtures.
//!
//! The sampler works on the partition of the observations into occupied
//! clusters. The number of components `k` enters only through the
//! coefficients `V_n(t)` of the induced partition law, and is recovered
//! afterwards from its conditional given the number of clusters `t`.
//!
//! The reported pmf over `k` averages `p(k | t)` over the retained states,
//! which has lower variance than a histogram of `k` draws. The draws are
//! still recorded for the trace.

mod auxiliary;
mod collapsed;
mod posterior;
mod state;
mod vn;

pub use auxiliary::{aux_allocation_sweep, aux_split_merge_move, initial_auxiliary_state};
pub use collapsed::{gibbs_allocation_sweep, initial_collapsed_state, split_merge_move, SplitMergeOutcome};
pub use posterior::{
    check_normalised, credible_interval, effective_sample_size, posterior_mode, tv_distance,
    KPosterior,
};
pub use state::{partition_log_prior, partition_log_prior_sizes, AllocationState, Cluster};
pub use vn::{build_vn_table, VnTable};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::component::{
    ClusterStats, CollapsedLikelihood, ConjugateNormalGamma, NormalParams, RichardsonGreenModel,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::k_prior::KPrior;

/// Run length, move schedule and reporting options for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Symmetric Dirichlet parameter of the mixture weights.
    pub gamma: f64,
    pub sweeps_per_iteration: usize,
    pub split_merge_per_iteration: usize,
    pub restricted_scans: usize,
    pub aux_components: usize,
    /// Largest `k` reported individually; larger values share one bin.
    pub k_report_max: u64,
    pub seed: u64,
    pub vn_tol: f64,
    /// Recompute cluster statistics every this many iterations and fail on
    /// drift above `1e-9`; zero disables the check.
    pub stats_check_interval: usize,
    pub record_trace: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl SamplerConfig {
    /// 20,000 iterations, second half retained with thinning 2.
    pub fn desk() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 2,
            gamma: 1.0,
            sweeps_per_iteration: 1,
            split_merge_per_iteration: 1,
            restricted_scans: 5,
            aux_components: 3,
            k_report_max: 50,
            seed: 1,
            vn_tol: 1e-12,
            stats_check_interval: 0,
            record_trace: true,
        }
    }

    /// 100,000 iterations keeping the last 1,000.
    pub fn full() -> Self {
        Self {
            iterations: 100_000,
            burn_in: 99_000,
            thin: 1,
            ..Self::desk()
        }
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(Error::config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thinning must be at least 1"));
        }
        if self.retained() == 0 {
            return Err(Error::config("no iterations are retained after burn-in and thinning"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.sweeps_per_iteration == 0 && self.split_merge_per_iteration == 0 {
            return Err(Error::config("the move schedule is empty"));
        }
        if self.aux_components == 0 {
            return Err(Error::config("at least one auxiliary component is required"));
        }
        if self.k_report_max == 0 {
            return Err(Error::config("k_report_max must be at least 1"));
        }
        if !(self.vn_tol > 0.0 && self.vn_tol < 1e-3) {
            return Err(Error::config("vn_tol must lie in (0, 1e-3)"));
        }
        Ok(())
    }

    fn keeps(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in).is_multiple_of(self.thin)
    }
}

/// Component family used by [`run_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelChoice {
    Conjugate(ConjugateNormalGamma),
    RichardsonGreen(RichardsonGreenModel),
}

/// One retained state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub t: usize,
    pub k: u64,
    pub log_joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub retained: usize,
    pub split_merge_attempts: usize,
    pub split_merge_accepted: usize,
    pub split_merge_acceptance: f64,
    pub mean_t: f64,
    pub ess_t: f64,
    pub max_t: usize,
    /// Largest estimated relative error among the V-table entries used.
    pub vn_max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub posterior: KPosterior,
    pub trace: Vec<TraceRow>,
    pub diagnostics: Diagnostics,
}

/// Runs one chain with the chosen component family.
pub fn run_chain(
    data: &Dataset,
    model: &ModelChoice,
    prior: &KPrior,
    config: &SamplerConfig,
) -> Result<ChainOutput> {
    match model {
        ModelChoice::Conjugate(m) => run_collapsed_chain(data, m, prior, config),
        ModelChoice::RichardsonGreen(m) => run_auxiliary_chain(data, m, prior, config),
    }
}

// Accumulates retained states into a posterior.
struct Recorder {
    t_counts: Vec<usize>,
    t_draws: Vec<usize>,
    k_draws: Vec<u64>,
    trace: Vec<TraceRow>,
}

impl Recorder {
    fn new(n: usize, retained: usize) -> Self {
        Self {
            t_counts: vec![0; n + 1],
            t_draws: Vec::with_capacity(retained),
            k_draws: Vec::with_capacity(retained),
            trace: Vec::new(),
        }
    }

    fn record(&mut self, t: usize, k: u64) {
        if k < t as u64 {
            unreachable!("k draw below the number of clusters");
        }
        self.t_counts[t] += 1;
        self.t_draws.push(t);
        self.k_draws.push(k);
    }

    fn finish(self, vn: &VnTable, config: &SamplerConfig, sm: (usize, usize)) -> ChainOutput {
        let total = self.t_draws.len() as f64;
        let k_max = config.k_report_max;
        let mut pmf = vec![0.0; k_max as usize];
        let mut overflow = 0.0;
        for (t, &count) in self.t_counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let w = count as f64 / total;
            let (cond, over) = vn.k_given_t_pmf(t, k_max);
            for (p, c) in pmf.iter_mut().zip(&cond) {
                *p += w * c;
            }
            overflow += w * over;
        }
        let max_t = self.t_counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        let t_pmf = self.t_counts[1..=max_t.max(1)]
            .iter()
            .map(|&c| c as f64 / total)
            .collect();
        let ts: Vec<f64> = self.t_draws.iter().map(|&t| t as f64).collect();
        let vn_max_rel_error = (1..=vn.computed()).map(|t| vn.rel_error(t)).fold(0.0, f64::max);
        let mut posterior = KPosterior::from_pmf(pmf, overflow);
        posterior.t_pmf = t_pmf;
        posterior.t_draws = self.t_draws;
        posterior.k_draws = self.k_draws;
        let diagnostics = Diagnostics {
            iterations: config.iterations,
            retained: ts.len(),
            split_merge_attempts: sm.0,
            split_merge_accepted: sm.1,
            split_merge_acceptance: if sm.0 == 0 { 0.0 } else { sm.1 as f64 / sm.0 as f64 },
            mean_t: ts.iter().sum::<f64>() / total,
            ess_t: effective_sample_size(&ts),
            max_t,
            vn_max_rel_error,
        };
        ChainOutput {
            posterior,
            trace: self.trace,
            diagnostics,
        }
    }
}

fn check_stats<P>(state: &AllocationState<P>, data: &Dataset, iteration: usize) -> Result<()> {
    match state.stats_discrepancy(data) {
        Some(d) if d <= 1e-9 => Ok(()),
        Some(d) => Err(Error::Internal(format!(
            "cluster statistics drifted by {d:e} at iteration {iteration}"
        ))),
        None => Err(Error::Internal(format!(
            "allocation bookkeeping inconsistent at iteration {iteration}"
        ))),
    }
}

fn check_data(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::domain("the data set is empty"));
    }
    Ok(())
}

/// Collapsed Gibbs sweeps interleaved with split-merge moves.
pub fn run_collapsed_chain<L: CollapsedLikelihood>(
    data: &Dataset,
    model: &L,
    prior: &KPrior,
    config: &SamplerConfig,
) -> Result<ChainOutput> {
    config.validate()?;
    check_data(data)?;
    if model.dim() != data.dim() {
        return Err(Error::domain(format!(
            "model dimension {} does not match data dimension {}",
            model.dim(),
            data.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vn = VnTable::new(prior, data.len(), config.gamma, config.vn_tol)?;
    let mut state = initial_collapsed_state(data, model);
    let mut rec = Recorder::new(data.len(), config.retained());
    let (mut attempts, mut accepted) = (0, 0);
    for it in 1..=config.iterations {
        for _ in 0..config.sweeps_per_iteration {
            gibbs_allocation_sweep(&mut state, data, &mut vn, model, &mut rng)?;
        }
        for _ in 0..config.split_merge_per_iteration {
            let out = split_merge_move(&mut state, data, &mut vn, model, &mut rng, config.restricted_scans)?;
            attempts += out.attempted as usize;
            accepted += out.accepted as usize;
        }
        if config.stats_check_interval > 0 && it % config.stats_check_interval == 0 {
            check_stats(&state, data, it)?;
        }
        if config.keeps(it) {
            let t = state.num_clusters();
            let k = vn.sample_k(t, &mut rng)?;
            rec.record(t, k);
            if config.record_trace {
                let log_joint = partition_log_prior(&state, &vn)
                    + state.clusters().map(|c| model.log_marginal(&c.stats)).sum::<f64>();
                rec.trace.push(TraceRow {
                    iteration: it,
                    t,
                    k,
                    log_joint,
                });
            }
        }
    }
    Ok(rec.finish(&vn, config, (attempts, accepted)))
}

/// Auxiliary-component allocation sweeps with instantiated parameters.
pub fn run_auxiliary_chain(
    data: &Dataset,
    model: &RichardsonGreenModel,
    prior: &KPrior,
    config: &SamplerConfig,
) -> Result<ChainOutput> {
    config.validate()?;
    check_data(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vn = VnTable::new(prior, data.len(), config.gamma, config.vn_tol)?;
    let mut state = initial_auxiliary_state(data, model, &mut rng)?;
    let mut rec = Recorder::new(data.len(), config.retained());
    let (mut attempts, mut accepted) = (0, 0);
    for it in 1..=config.iterations {
        for _ in 0..config.split_merge_per_iteration {
            let out = aux_split_merge_move(&mut state, data, &mut vn, model, &mut rng, config.restricted_scans)?;
            attempts += out.attempted as usize;
            accepted += out.accepted as usize;
        }
        // parameters and b are refreshed here, so every iteration sweeps once
        for _ in 0..config.sweeps_per_iteration.max(1) {
            aux_allocation_sweep(&mut state, data, &mut vn, model, &mut rng, config.aux_components)?;
        }
        if config.stats_check_interval > 0 && it % config.stats_check_interval == 0 {
            check_stats(&state, data, it)?;
        }
        if config.keeps(it) {
            let t = state.num_clusters();
            let k = vn.sample_k(t, &mut rng)?;
            rec.record(t, k);
            if config.record_trace {
                let log_joint = auxiliary_log_joint(&state, data, &vn, model);
                rec.trace.push(TraceRow {
                    iteration: it,
                    t,
                    k,
                    log_joint,
                });
            }
        }
    }
    Ok(rec.finish(&vn, config, (attempts, accepted)))
}

fn auxiliary_log_joint(
    state: &AllocationState<NormalParams>,
    data: &Dataset,
    vn: &VnTable,
    model: &RichardsonGreenModel,
) -> f64 {
    let b = state.shared_rate.unwrap_or(f64::NAN);
    let mut lj = partition_log_prior(state, vn) + model.ln_prior_b(b);
    for c in state.clusters() {
        lj += model.ln_prior_params(&c.payload, b);
    }
    for i in 0..state.n() {
        lj += state.cluster(state.label(i)).payload.ln_density(data.row(i)[0]);
    }
    lj
}

/// Draw from `p(k | t)` for data of size `n`.
pub fn sample_k_given_t<R: rand::Rng + ?Sized>(
    prior: &KPrior,
    t: usize,
    n: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<u64> {
    if t == 0 || t > n {
        return Err(Error::domain(format!("need 1 <= t <= n, got t = {t}, n = {n}")));
    }
    let mut vn = VnTable::new(prior, n, gamma, 1e-12)?;
    vn.ensure(t)?;
    vn.sample_k(t, rng)
}

/// Statistics of a cluster built from the given observation indices.
pub fn stats_of(data: &Dataset, members: &[usize]) -> ClusterStats {
    ClusterStats::from_points(data.dim(), members.iter().map(|&i| data.row(i)))
}
