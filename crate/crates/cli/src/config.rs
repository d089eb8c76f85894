//! Run configuration: built-in defaults, then an optional TOML file, then
//! command-line flags, with later sources winning.
//!
//! A run file looks like
//!
//! ```toml
//! data = "galaxy"            # CSV path or the bundled "galaxy"
//! prior = "lossbased-default"
//! model = "richardson-green" # or "conjugate" / "auto"
//! out = "fit-output"
//! scale = "desk"             # preset the [sampler] table starts from
//!
//! [conjugate]                # used when model = "conjugate"
//! m0 = 0.0
//! w = 1.0
//! shape = 1.0
//! rate = 1.0
//!
//! [sampler]
//! iterations = 20000
//! burn_in = 10000
//! thin = 2
//! gamma = 1.0
//! seed = 1
//! ```
//!
//! Every key is optional. `mfm fit` writes the fully resolved file as
//! `config.toml` next to its outputs.

use std::path::{Path, PathBuf};

use mfm_core::experiments::ModelKind;
use mfm_core::mfm::SamplerConfig;
use mfm_core::{ConjugateNormalGamma, KPrior, KPriorSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Run-length preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// 20,000 iterations, 5,000 retained; 10 replicates per table cell.
    #[default]
    Desk,
    /// 100,000 iterations keeping the last 1,000; 100 replicates per cell.
    Full,
}

impl Scale {
    pub fn sampler(self) -> SamplerConfig {
        match self {
            Scale::Desk => SamplerConfig::desk(),
            Scale::Full => SamplerConfig::full(),
        }
    }

    pub fn replicates(self) -> usize {
        match self {
            Scale::Desk => 10,
            Scale::Full => 100,
        }
    }
}

/// Hyperparameters of the conjugate normal-gamma model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjugateHyper {
    pub m0: f64,
    pub w: f64,
    pub shape: f64,
    pub rate: f64,
}

impl Default for ConjugateHyper {
    fn default() -> Self {
        Self {
            m0: 0.0,
            w: 1.0,
            shape: 1.0,
            rate: 1.0,
        }
    }
}

impl ConjugateHyper {
    pub fn model(&self, dim: usize) -> Result<ConjugateNormalGamma> {
        Ok(ConjugateNormalGamma::new(dim, self.m0, self.w, self.shape, self.rate)?)
    }
}

/// Everything `mfm fit` needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// CSV path, or `galaxy` for the bundled data.
    pub data: String,
    pub prior: String,
    /// `auto` picks Richardson-Green for univariate data with at least two
    /// distinct values and the conjugate model otherwise.
    pub model: ModelKind,
    pub conjugate: ConjugateHyper,
    pub out: PathBuf,
    pub scale: Scale,
    pub sampler: SamplerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: crate::ingest::GALAXY.into(),
            prior: "lossbased-default".into(),
            model: ModelKind::Auto,
            conjugate: ConjugateHyper::default(),
            out: PathBuf::from("fit-output"),
            scale: Scale::Desk,
            sampler: SamplerConfig::desk(),
        }
    }
}

impl RunConfig {
    pub fn prior(&self) -> Result<KPrior> {
        let spec: KPriorSpec = self.prior.parse()?;
        Ok(KPrior::new(spec)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.prior()?;
        self.conjugate.model(1)?;
        self.sampler.validate()?;
        if self.data.trim().is_empty() {
            return Err(CliError::Config("data must name a file or 'galaxy'".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Reads a TOML file into a table.
pub fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

// Overlays `top` on `base`, descending into tables present in both.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `defaults` with the keys of `file` laid over it.
pub fn layered<T: Serialize + DeserializeOwned + Clone>(defaults: &T, file: Option<toml::Table>) -> Result<T> {
    let Some(file) = file else {
        return Ok(defaults.clone());
    };
    let mut base = toml::Table::try_from(defaults).map_err(|e| CliError::Config(e.to_string()))?;
    merge(&mut base, file);
    base.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Scale named on the command line, else in the file, else desk.
pub fn pick_scale(flag: Option<Scale>, file: Option<&toml::Table>) -> Result<Scale> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match file.and_then(|t| t.get("scale")) {
        None => Ok(Scale::Desk),
        Some(v) => v
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("scale: {e}"))),
    }
}
