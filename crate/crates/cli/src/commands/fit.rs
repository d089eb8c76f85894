use std::fmt::Write as _;

use mfm_core::experiments::{posterior_svg, ModelKind, PmfSeries};
use mfm_core::mfm::{run_chain, ChainOutput, ModelChoice};
use mfm_core::{Dataset, RichardsonGreenModel};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::load_data;
use crate::output::OutputSet;

/// Model actually used for `data` under `config`.
pub fn resolve_model(config: &RunConfig, data: &Dataset) -> Result<ModelChoice> {
    let rg = || -> Result<ModelChoice> {
        if data.dim() != 1 {
            return Err(CliError::Config(format!(
                "the richardson-green model needs one column, the data has {}",
                data.dim()
            )));
        }
        Ok(ModelChoice::RichardsonGreen(RichardsonGreenModel::from_data(&data.column(0))?))
    };
    let conjugate = || -> Result<ModelChoice> { Ok(ModelChoice::Conjugate(config.conjugate.model(data.dim())?)) };
    match config.model {
        ModelKind::RichardsonGreen => rg(),
        ModelKind::Conjugate => conjugate(),
        // the data-scaled hyperparameters need a nonzero range
        ModelKind::Auto => rg().or_else(|_| conjugate()),
    }
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    data: &'a str,
    n: usize,
    dim: usize,
    prior: &'a str,
    model: &'a ModelChoice,
    mode: u64,
    interval: (u64, u64),
    overflow: f64,
    #[serde(flatten)]
    chain: &'a mfm_core::mfm::Diagnostics,
}

pub fn posterior_csv(out: &ChainOutput) -> String {
    let mut s = String::from("k,probability\n");
    for (i, p) in out.posterior.pmf.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, p);
    }
    let _ = writeln!(s, "overflow,{}", out.posterior.overflow);
    s
}

fn trace_csv(out: &ChainOutput) -> String {
    let mut s = String::from("iteration,t,k,log_joint\n");
    for r in &out.trace {
        let _ = writeln!(s, "{},{},{},{}", r.iteration, r.t, r.k, r.log_joint);
    }
    s
}

/// Runs one chain and writes `posterior.csv`, `trace.csv`,
/// `diagnostics.json`, `posterior.svg` and `config.toml` into `config.out`.
pub fn fit(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let data = load_data(&config.data)?;
    let prior = config.prior()?;
    let model = resolve_model(config, &data)?;
    let out = run_chain(&data, &model, &prior, &config.sampler)?;

    let diag = DiagnosticsFile {
        data: &config.data,
        n: data.len(),
        dim: data.dim(),
        prior: &config.prior,
        model: &model,
        mode: out.posterior.mode,
        interval: out.posterior.interval,
        overflow: out.posterior.overflow,
        chain: &out.diagnostics,
    };
    let json = serde_json::to_string_pretty(&diag).map_err(|e| CliError::Config(e.to_string()))?;
    let k_plot = out.posterior.pmf.len().min(15);
    let svg = posterior_svg(
        &[PmfSeries {
            label: prior.spec().label(),
            pmf: out.posterior.pmf.clone(),
            overflow: out.posterior.overflow,
        }],
        k_plot,
        &format!("Posterior over k, {}", config.data),
    )?;

    let mut files = OutputSet::create(&config.out)?;
    files.write("posterior.csv", &posterior_csv(&out))?;
    files.write("trace.csv", &trace_csv(&out))?;
    files.write("diagnostics.json", &(json + "\n"))?;
    files.write("posterior.svg", &svg)?;
    files.write("config.toml", &config.to_toml()?)?;
    let dir = files.dir().display().to_string();
    files.commit();

    let model_name = match model {
        ModelChoice::Conjugate(_) => "conjugate",
        ModelChoice::RichardsonGreen(_) => "richardson-green",
    };
    let mut report = String::new();
    let _ = writeln!(report, "data: {} (n = {}, d = {})", config.data, data.len(), data.dim());
    let _ = writeln!(report, "prior: {}  model: {model_name}  seed: {}", config.prior, config.sampler.seed);
    let _ = writeln!(
        report,
        "posterior mode {}, 95% interval [{}, {}]",
        out.posterior.mode, out.posterior.interval.0, out.posterior.interval.1
    );
    let _ = writeln!(report, "mean clusters {:.3}, split-merge acceptance {:.3}", out.diagnostics.mean_t, out.diagnostics.split_merge_acceptance);
    let shown = out.posterior.pmf.len().min(10);
    let ks: Vec<String> = (1..=shown).map(|k| format!("{k:>5}")).collect();
    let ps: Vec<String> = out.posterior.pmf[..shown].iter().map(|p| format!("{p:>5.2}")).collect();
    let _ = writeln!(report, "k    {}", ks.join(" "));
    let _ = writeln!(report, "P    {}", ps.join(" "));
    let _ = writeln!(report, "outputs written to {dir}");
    Ok(report)
}
