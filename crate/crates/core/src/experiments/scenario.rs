use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// One Gaussian term with covariance `variance · I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
}

/// A simulation scenario: a Gaussian mixture and the run grid for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub true_k: usize,
    pub dim: usize,
    pub terms: Vec<MixtureTerm>,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
}

pub const BUILTIN_IDS: [&str; 11] = [
    "M_1", "M_2a", "M_2b", "M_2c", "M_4a", "M_4b", "M_6", "M_12", "MV_d4", "MV_d8", "MV_d12",
];

const DEFAULT_SIZES: [usize; 4] = [50, 100, 500, 2000];
const DEFAULT_REPLICATES: usize = 100;

fn uni(weight: f64, mean: f64, variance: f64) -> MixtureTerm {
    MixtureTerm {
        weight,
        mean: vec![mean],
        variance,
    }
}

fn normalise_id(id: &str) -> String {
    id.chars()
        .filter(|c| !matches!(c, '_' | '-' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

impl ScenarioSpec {
    fn new(id: &str, terms: Vec<MixtureTerm>) -> Self {
        Self {
            id: id.to_string(),
            true_k: terms.len(),
            dim: terms[0].mean.len(),
            terms,
            sample_sizes: DEFAULT_SIZES.to_vec(),
            replicates: DEFAULT_REPLICATES,
        }
    }

    /// A built-in scenario. Matching ignores case, `_` and `-`, so `m2a`
    /// and `mv-d12` are accepted.
    pub fn builtin(id: &str) -> Result<Self> {
        let key = normalise_id(id);
        let spec = match key.as_str() {
            "m1" => Self::new("M_1", vec![uni(1.0, 0.0, 1.0)]),
            "m2a" => Self::new("M_2a", vec![uni(0.5, 0.0, 1.0), uni(0.5, 6.0, 1.0)]),
            "m2b" => Self::new("M_2b", vec![uni(2.0 / 3.0, 0.0, 1.0), uni(1.0 / 3.0, 6.0, 1.0)]),
            "m2c" => Self::new("M_2c", vec![uni(0.5, 0.0, 1.0), uni(0.5, 0.0, 0.15)]),
            "m4a" => Self::new(
                "M_4a",
                [1.5, -1.5, 4.5, -4.5].iter().map(|&m| uni(0.25, m, 1.0)).collect(),
            ),
            "m4b" => Self::new(
                "M_4b",
                vec![
                    uni(0.125, -3.0, 1.0),
                    uni(0.125, 3.0, 1.0),
                    uni(0.5, 0.0, 0.1),
                    uni(0.25, 6.0, 2.0),
                ],
            ),
            "m6" => Self::new("M_6", (0..6).map(|j| uni(1.0 / 6.0, 3.0 * j as f64, 1.0)).collect()),
            "m12" => Self::new(
                "M_12",
                (0..12).map(|j| uni(1.0 / 12.0, 3.0 * j as f64, 1.0)).collect(),
            ),
            "mvd4" => Self::multivariate(4),
            "mvd8" => Self::multivariate(8),
            "mvd12" => Self::multivariate(12),
            _ => {
                return Err(Error::domain(format!(
                    "unknown scenario '{id}'; available: {}",
                    BUILTIN_IDS.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    /// `⅓ N(m, I) + ⅓ N(0, I) + ⅓ N(−m, I)` with `m = (3/√d, …, 3/√d)`.
    pub fn multivariate(d: usize) -> Self {
        let c = 3.0 / (d as f64).sqrt();
        let term = |s: f64| MixtureTerm {
            weight: 1.0 / 3.0,
            mean: vec![s * c; d],
            variance: 1.0,
        };
        Self::new(&format!("MV_d{d}"), vec![term(1.0), term(0.0), term(-1.0)])
    }

    pub fn all_builtin() -> Vec<Self> {
        BUILTIN_IDS.iter().map(|id| Self::builtin(id).expect("builtin")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() || self.dim == 0 {
            return Err(Error::domain(format!("scenario {} has no terms", self.id)));
        }
        if self.terms.iter().any(|t| !(t.weight > 0.0) || !(t.variance > 0.0) || t.mean.len() != self.dim) {
            return Err(Error::domain(format!(
                "scenario {}: weights and variances must be positive and means of length {}",
                self.id, self.dim
            )));
        }
        let total: f64 = self.terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("scenario {}: weights sum to {total}", self.id)));
        }
        Ok(())
    }

    /// Mixture mean and variance of every coordinate.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = (0..self.dim)
            .map(|j| self.terms.iter().map(|t| t.weight * t.mean[j]).sum())
            .collect();
        let var = (0..self.dim)
            .map(|j| {
                self.terms
                    .iter()
                    .map(|t| t.weight * (t.variance + (t.mean[j] - mean[j]).powi(2)))
                    .sum()
            })
            .collect();
        (mean, var)
    }

    /// `n` independent draws from the mixture.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let mut values = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut term = self.terms.last().expect("nonempty");
            for t in &self.terms {
                acc += t.weight;
                if u < acc {
                    term = t;
                    break;
                }
            }
            let sd = term.variance.sqrt();
            for &m in &term.mean {
                let z: f64 = StandardNormal.sample(rng);
                values.push(m + sd * z);
            }
        }
        Dataset::new(n, self.dim, values).expect("finite draws")
    }
}

pub fn generate_scenario<R: Rng + ?Sized>(spec: &ScenarioSpec, n: usize, rng: &mut R) -> Dataset {
    spec.generate(n, rng)
}
