use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioSpec;
use crate::component::{ConjugateNormalGamma, RichardsonGreenModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::k_prior::{KPrior, KPriorSpec};
use crate::mfm::{run_chain, ModelChoice, SamplerConfig};
use crate::seed::{derive_seed, text_key};

/// Component family for grid runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Richardson-Green for univariate data, unit conjugate otherwise.
    #[default]
    Auto,
    /// Conjugate normal-gamma with unit hyperparameters.
    Conjugate,
    /// Richardson-Green with hyperparameters set from the data range.
    RichardsonGreen,
}

impl ModelKind {
    pub fn resolve(self, data: &Dataset) -> Result<ModelChoice> {
        let rg = || -> Result<ModelChoice> {
            if data.dim() != 1 {
                return Err(Error::domain("the Richardson-Green model is univariate"));
            }
            Ok(ModelChoice::RichardsonGreen(RichardsonGreenModel::from_data(&data.column(0))?))
        };
        match self {
            ModelKind::Auto if data.dim() == 1 => rg(),
            ModelKind::Auto | ModelKind::Conjugate => {
                Ok(ModelChoice::Conjugate(ConjugateNormalGamma::unit(data.dim())))
            }
            ModelKind::RichardsonGreen => rg(),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(ModelKind::Auto),
            "conjugate" => Ok(ModelKind::Conjugate),
            "richardson-green" | "rg" => Ok(ModelKind::RichardsonGreen),
            other => Err(Error::config(format!(
                "unknown model '{other}'; expected auto, conjugate or richardson-green"
            ))),
        }
    }
}

/// A grid of scenarios, sample sizes and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub scenarios: Vec<String>,
    pub sample_sizes: Vec<usize>,
    /// Prior specification strings such as `lossbased-default`.
    pub priors: Vec<String>,
    pub replicates: usize,
    pub model: ModelKind,
    pub master_seed: u64,
    pub sampler: SamplerConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            scenarios: vec!["M_2a".into()],
            sample_sizes: vec![50, 100, 500, 2000],
            priors: default_priors(),
            replicates: 10,
            model: ModelKind::Auto,
            master_seed: 1,
            sampler: SamplerConfig::desk(),
        }
    }
}

/// The three priors compared in the tables.
pub fn default_priors() -> Vec<String> {
    vec!["lossbased-default".into(), "uniform(50)".into(), "poisson(1)".into()]
}

impl GridConfig {
    /// All built-in scenarios at full replication and run length.
    pub fn full_scale() -> Self {
        Self {
            scenarios: super::scenario::BUILTIN_IDS.iter().map(|s| s.to_string()).collect(),
            replicates: 100,
            sampler: SamplerConfig::full(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        if self.scenarios.is_empty() || self.sample_sizes.is_empty() || self.priors.is_empty() {
            return Err(Error::config("scenarios, sample sizes and priors must be nonempty"));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::config("sample sizes must be positive"));
        }
        for s in &self.scenarios {
            ScenarioSpec::builtin(s)?;
        }
        for p in &self.priors {
            KPrior::new(p.parse()?)?;
        }
        self.sampler.validate()
    }
}

/// One replicate chain of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub data_seed: u64,
    pub chain_seed: u64,
    pub mode: u64,
    pub lo: u64,
    pub hi: u64,
    pub mean_t: f64,
    pub pmf: Vec<f64>,
    pub overflow: f64,
}

/// A replicate that did not produce a posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub message: String,
}

/// Averages over the replicates of one (scenario, n, prior) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub n: usize,
    /// Column label, e.g. `LB`.
    pub prior: String,
    /// Full prior specification.
    pub prior_spec: String,
    pub replicates: usize,
    pub failures: usize,
    pub avg_mode: f64,
    pub avg_lo: f64,
    pub avg_hi: f64,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
    #[serde(skip)]
    pub failed: Vec<ReplicateFailure>,
}

impl CellSummary {
    /// Aggregates successful replicates; the result does not depend on
    /// their order.
    pub fn from_records(
        scenario: &str,
        n: usize,
        prior: &KPriorSpec,
        mut records: Vec<ReplicateRecord>,
        mut failed: Vec<ReplicateFailure>,
    ) -> Self {
        records.sort_by_key(|r| r.replicate);
        failed.sort_by_key(|f| f.replicate);
        let avg = |f: &dyn Fn(&ReplicateRecord) -> f64| sorted_mean(records.iter().map(f).collect());
        Self {
            scenario: scenario.to_string(),
            n,
            prior: prior.label(),
            prior_spec: prior.to_string(),
            replicates: records.len(),
            failures: failed.len(),
            avg_mode: avg(&|r| r.mode as f64),
            avg_lo: avg(&|r| r.lo as f64),
            avg_hi: avg(&|r| r.hi as f64),
            records,
            failed,
        }
    }
}

// Mean summed in sorted order, so equal multisets give equal bits.
fn sorted_mean(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Cell summaries of a grid run, ordered by scenario, `n` and prior.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub cells: Vec<CellSummary>,
}

impl AggregateSummary {
    pub fn cell(&self, scenario: &str, n: usize, prior: &str) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.n == n && (c.prior == prior || c.prior_spec == prior))
    }

    pub fn scenarios(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.scenario) {
                out.push(c.scenario.clone());
            }
        }
        out
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }
}

/// Seed of the simulated data set for a replicate. Priors share data so
/// that they are compared on identical samples.
pub fn data_seed(master: u64, scenario: &str, n: usize, replicate: usize) -> u64 {
    derive_seed(master, &[text_key(scenario), n as u64, replicate as u64])
}

/// Seed of the chain for a replicate under one prior.
pub fn chain_seed(master: u64, scenario: &str, n: usize, prior: &KPriorSpec, replicate: usize) -> u64 {
    derive_seed(
        master,
        &[text_key(scenario), n as u64, text_key(&prior.to_string()), replicate as u64],
    )
}

/// Simulates the data for one replicate and runs its chain.
pub fn run_replicate(
    scenario: &ScenarioSpec,
    n: usize,
    prior: &KPriorSpec,
    replicate: usize,
    model: ModelKind,
    sampler: &SamplerConfig,
    master_seed: u64,
) -> Result<ReplicateRecord> {
    let ds = data_seed(master_seed, &scenario.id, n, replicate);
    let cs = chain_seed(master_seed, &scenario.id, n, prior, replicate);
    let data = scenario.generate(n, &mut ChaCha8Rng::seed_from_u64(ds));
    let choice = model.resolve(&data)?;
    let config = SamplerConfig {
        seed: cs,
        record_trace: false,
        ..sampler.clone()
    };
    let out = run_chain(&data, &choice, &KPrior::new(prior.clone())?, &config)?;
    let post = out.posterior;
    Ok(ReplicateRecord {
        replicate,
        data_seed: ds,
        chain_seed: cs,
        mode: post.mode,
        lo: post.interval.0,
        hi: post.interval.1,
        mean_t: out.diagnostics.mean_t,
        pmf: post.pmf,
        overflow: post.overflow,
    })
}

/// Runs every replicate of every cell in parallel and aggregates per cell.
///
/// Failed replicates are excluded from the averages, counted in the cell
/// and reported on standard error.
pub fn run_grid(config: &GridConfig) -> Result<AggregateSummary> {
    config.validate()?;
    let scenarios: Vec<ScenarioSpec> = config
        .scenarios
        .iter()
        .map(|s| ScenarioSpec::builtin(s))
        .collect::<Result<_>>()?;
    let priors: Vec<KPriorSpec> = config.priors.iter().map(|p| p.parse()).collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (si, _) in scenarios.iter().enumerate() {
        for &n in &config.sample_sizes {
            for (pi, _) in priors.iter().enumerate() {
                for r in 0..config.replicates {
                    jobs.push((si, n, pi, r));
                }
            }
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(si, n, pi, r)| {
            let out = run_replicate(
                &scenarios[si],
                n,
                &priors[pi],
                r,
                config.model,
                &config.sampler,
                config.master_seed,
            );
            ((si, n, pi), r, out)
        })
        .collect();

    type Bucket = (Vec<ReplicateRecord>, Vec<ReplicateFailure>);
    let mut buckets: BTreeMap<(usize, usize, usize), Bucket> = BTreeMap::new();
    for (key, r, out) in results {
        let entry = buckets.entry(key).or_default();
        match out {
            Ok(rec) => entry.0.push(rec),
            Err(e) => {
                let (si, n, pi) = key;
                eprintln!(
                    "warning: replicate {r} of {} n={n} {} failed and is excluded: {e}",
                    scenarios[si].id, priors[pi]
                );
                entry.1.push(ReplicateFailure {
                    replicate: r,
                    message: e.to_string(),
                });
            }
        }
    }
    let cells = buckets
        .into_iter()
        .map(|((si, n, pi), (records, failed))| {
            CellSummary::from_records(&scenarios[si].id, n, &priors[pi], records, failed)
        })
        .collect();
    Ok(AggregateSummary { cells })
}
