//! Bayesian inference on the number of components of a finite Gaussian
//! mixture.
//!
//! The crate provides priors over the component count `k` (including the
//! beta-geometric loss-based prior), Gaussian component families, a
//! partition-based sampler for mixtures of finite mixtures, an exhaustive
//! enumeration engine for tiny data sets, and a harness for replicated
//! simulation experiments.

pub mod component;
pub mod data;
pub mod error;
pub mod experiments;
pub mod k_prior;
pub mod mfm;
pub mod oracle;
pub mod quadrature;
pub mod seed;
pub mod series;
pub mod special;

pub use component::{
    ClusterStats, CollapsedLikelihood, ConjugateNormalGamma, ConstantLikelihood, NormalParams,
    RichardsonGreenModel,
};
pub use data::Dataset;
pub use error::{Error, Result};
pub use experiments::ScenarioSpec;
pub use k_prior::{KPrior, KPriorSpec, PmfVector, PriorMoments};
