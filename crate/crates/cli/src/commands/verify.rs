use std::fmt::Write as _;

use mfm_core::experiments::ScenarioSpec;
use mfm_core::mfm::{run_collapsed_chain, tv_distance, SamplerConfig};
use mfm_core::oracle::{exact_posterior, MAX_ORACLE_N};
use mfm_core::seed::derive_seed;
use mfm_core::{ConjugateNormalGamma, KPrior, KPriorSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

/// Largest `k` compared between the engines.
pub const VERIFY_K_MAX: u64 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyLine {
    pub prior: String,
    pub tv_t: f64,
    pub tv_k: f64,
    pub pass: bool,
}

/// Simulates `n` points from a two-component mixture, then compares the
/// sampler with exhaustive enumeration under the unit conjugate model.
pub fn verify(
    n: usize,
    seed: u64,
    priors: &[String],
    retained: usize,
    threshold: f64,
) -> Result<(Vec<VerifyLine>, String)> {
    if n == 0 || n > MAX_ORACLE_N {
        return Err(CliError::Usage(format!(
            "verify needs 1 <= n <= {MAX_ORACLE_N}; exhaustive enumeration is infeasible beyond that"
        )));
    }
    if retained == 0 {
        return Err(CliError::Usage("at least one retained iteration is needed".into()));
    }
    let scenario = ScenarioSpec::builtin("M_2a")?;
    let data = scenario.generate(n, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0])));
    let model = ConjugateNormalGamma::unit(1);

    let mut report = String::new();
    let xs: Vec<String> = data.column(0).iter().map(|x| format!("{x:.3}")).collect();
    let _ = writeln!(report, "data (n = {n}): {}", xs.join(", "));
    let mut lines = Vec::new();
    for (i, p) in priors.iter().enumerate() {
        let spec: KPriorSpec = p.parse()?;
        let prior = KPrior::new(spec)?;
        let exact = exact_posterior(&data, &model, &prior, 1.0)?;
        let burn_in = (retained / 10).max(100);
        let config = SamplerConfig {
            iterations: burn_in + retained,
            burn_in,
            thin: 1,
            seed: derive_seed(seed, &[1, i as u64]),
            record_trace: false,
            k_report_max: VERIFY_K_MAX,
            // same tolerance as the enumeration so that n = 1 agrees exactly
            vn_tol: 1e-13,
            ..SamplerConfig::desk()
        };
        let out = run_collapsed_chain(&data, &model, &prior, &config)?;
        let (exact_k, _) = exact.k_pmf(VERIFY_K_MAX);
        let tv_k = tv_distance(&out.posterior.pmf, &exact_k);
        let tv_t = tv_distance(&out.posterior.t_pmf, &exact.t_pmf);
        let pass = tv_k < threshold && tv_t < threshold;
        let _ = writeln!(
            report,
            "{:<22} TV(t) = {tv_t:.4}  TV(k <= {VERIFY_K_MAX}) = {tv_k:.4}  {}",
            prior.spec().to_string(),
            if pass { "PASS" } else { "FAIL" }
        );
        lines.push(VerifyLine {
            prior: prior.spec().to_string(),
            tv_t,
            tv_k,
            pass,
        });
    }
    let _ = writeln!(report, "threshold {threshold}, {retained} retained iterations per prior");
    Ok((lines, report))
}
