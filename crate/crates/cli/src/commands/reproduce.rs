use std::fmt::Write as _;
use std::path::Path;

use mfm_core::experiments::{
    galaxy, galaxy_comparison, posterior_svg, reference_table, run_grid, scenario_comparison,
    scenario_table, write_results, GridConfig, PmfSeries, ScenarioSpec, BUILTIN_IDS,
    GALAXY_INTERVALS,
};
use mfm_core::mfm::{run_auxiliary_chain, SamplerConfig};
use mfm_core::seed::{derive_seed, text_key};
use mfm_core::{KPrior, KPriorSpec, RichardsonGreenModel};

use crate::config::{layered, Scale};
use crate::error::{CliError, Result};
use crate::output::OutputSet;

pub fn targets() -> Vec<String> {
    let mut t = vec!["galaxy".to_string(), "all".to_string()];
    t.extend(BUILTIN_IDS.iter().map(|s| s.to_string()));
    t
}

fn unknown(target: &str) -> CliError {
    CliError::Usage(format!(
        "unknown target '{target}'; available: {}",
        targets().join(", ")
    ))
}

/// Sampler settings for the galaxy run at each scale.
pub fn galaxy_sampler(scale: Scale, seed: u64) -> SamplerConfig {
    let base = match scale {
        Scale::Desk => SamplerConfig::desk(),
        Scale::Full => SamplerConfig {
            iterations: 100_000,
            burn_in: 10_000,
            thin: 10,
            ..SamplerConfig::desk()
        },
    };
    SamplerConfig {
        seed,
        record_trace: false,
        ..base
    }
}

/// Posterior over `k` for the galaxy data under the three compared priors.
pub fn reproduce_galaxy(scale: Scale, seed: u64, out: &Path) -> Result<String> {
    let data = galaxy();
    let model = RichardsonGreenModel::from_data(&data.column(0))?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut summary = String::new();
    for spec in mfm_core::experiments::default_priors() {
        let spec: KPriorSpec = spec.parse()?;
        let prior = KPrior::new(spec.clone())?;
        let config = galaxy_sampler(scale, derive_seed(seed, &[text_key(&spec.to_string())]));
        let chain = run_auxiliary_chain(&data, &model, &prior, &config)?;
        let post = chain.posterior;
        let label = spec.label();
        let reference = GALAXY_INTERVALS.iter().find(|(l, _)| *l == label).map(|(_, iv)| *iv);
        let _ = write!(
            summary,
            "{label}: mode {}, 95% interval [{}, {}]",
            post.mode, post.interval.0, post.interval.1
        );
        if let Some((lo, hi)) = reference {
            let _ = write!(summary, " (reference [{lo}, {hi}])");
        }
        summary.push('\n');
        rows.push((label.clone(), post.pmf.clone()));
        series.push(PmfSeries {
            label,
            pmf: post.pmf,
            overflow: post.overflow,
        });
    }
    let table = galaxy_comparison(&rows);
    let mut csv = String::from("k");
    for s in &series {
        csv.push(',');
        csv.push_str(&s.label);
    }
    csv.push('\n');
    for k in 0..series[0].pmf.len() {
        let _ = write!(csv, "{}", k + 1);
        for s in &series {
            let _ = write!(csv, ",{}", s.pmf[k]);
        }
        csv.push('\n');
    }
    let svg = posterior_svg(&series, 15, "Posterior over k, galaxy data")?;
    let mut files = OutputSet::create(out)?;
    files.write("galaxy/posterior.csv", &csv)?;
    files.write("galaxy/table.txt", &table)?;
    files.write("galaxy/posterior.svg", &svg)?;
    files.commit();
    Ok(format!(
        "Posterior probabilities for k = 1..10, galaxy data\n{table}\n{summary}outputs written to {}\n",
        out.join("galaxy").display()
    ))
}

/// Replicated simulation tables for one scenario, or all with `all`.
pub fn reproduce_tables(
    target: &str,
    scale: Scale,
    seed: Option<u64>,
    replicates: Option<usize>,
    file: Option<toml::Table>,
    out: &Path,
) -> Result<String> {
    let scenarios: Vec<String> = if target.eq_ignore_ascii_case("all") {
        BUILTIN_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        vec![ScenarioSpec::builtin(target).map_err(|_| unknown(target))?.id]
    };
    let defaults = GridConfig {
        scenarios,
        replicates: scale.replicates(),
        sampler: scale.sampler(),
        ..GridConfig::default()
    };
    let mut grid = layered(&defaults, file)?;
    if let Some(r) = replicates {
        grid.replicates = r;
    }
    if let Some(s) = seed {
        grid.master_seed = s;
    }
    grid.validate()?;
    let guard = OutputSet::create(out)?;
    let summary = run_grid(&grid)?;
    write_results(&summary, out)?;
    guard.commit();

    let mut report = String::new();
    for id in summary.scenarios() {
        match reference_table(&id) {
            Some(r) => report.push_str(&scenario_comparison(&summary, &r)),
            None => report.push_str(&scenario_table(&summary, &id, &[])),
        }
        report.push('\n');
    }
    let _ = writeln!(
        report,
        "{} replicates per cell, {} iterations per chain",
        grid.replicates, grid.sampler.iterations
    );
    if summary.total_failures() > 0 {
        let _ = writeln!(report, "warning: {} replicate(s) failed and were excluded", summary.total_failures());
    }
    let _ = writeln!(report, "results written to {}", out.display());
    Ok(report)
}

/// Runs a named target. `seed`, `replicates` and `scale` given here win
/// over the same keys in `file`.
pub fn reproduce(
    target: &str,
    scale: Scale,
    seed: Option<u64>,
    replicates: Option<usize>,
    file: Option<toml::Table>,
    out: &Path,
) -> Result<String> {
    if target.eq_ignore_ascii_case("galaxy") {
        return reproduce_galaxy(scale, seed.unwrap_or(1), out);
    }
    if !target.eq_ignore_ascii_case("all") && ScenarioSpec::builtin(target).is_err() {
        return Err(unknown(target));
    }
    reproduce_tables(target, scale, seed, replicates, file, out)
}
