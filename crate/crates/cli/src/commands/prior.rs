use std::fmt::Write as _;

use mfm_core::experiments::{posterior_svg, PmfSeries};
use mfm_core::k_prior::SPEC_FORMS;
use mfm_core::{KPrior, KPriorSpec};

use crate::error::{CliError, Result};

/// Parses `a..b` (inclusive) or a single upper end `b` meaning `1..b`.
pub fn parse_k_range(s: &str) -> Result<(u64, u64)> {
    let bad = || CliError::Usage(format!("bad k range '{s}'; expected e.g. 1..10 or 10"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
        }
        None => (1, s.trim().parse().map_err(|_| bad())?),
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

// Up to four decimals without trailing zeros; scientific below 1e-4.
fn short(p: f64) -> String {
    if p != 0.0 && p.abs() < 1e-4 {
        return format!("{p:.3e}");
    }
    let s = format!("{p:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".into() } else { s.to_string() }
}

/// Table of `P(k)` over `range`, moments, and the mass above the range.
/// With `plot`, also an SVG of `P(1..=hi)`.
pub fn prior_report(spec: &str, range: (u64, u64)) -> Result<(String, String)> {
    let spec: KPriorSpec = spec.parse().map_err(|e| match e {
        mfm_core::Error::Parse { position, message } if !message.contains("one of") => {
            mfm_core::Error::Parse {
                position,
                message: format!("{message}; accepted forms: {SPEC_FORMS}"),
            }
        }
        e => e,
    })?;
    let prior = KPrior::new(spec)?;
    let mut out = String::new();
    let _ = writeln!(out, "prior: {}", prior.spec());
    let _ = writeln!(out, "k\tP(k)");
    let p = |k: u64| if prior.in_support(k) { prior.pmf(k) } else { Ok(0.0) };
    for k in range.0..=range.1 {
        let _ = writeln!(out, "{k}\t{}", short(p(k)?));
    }
    let m = prior.moments()?;
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), short);
    let _ = writeln!(out, "mean\t{}", fmt(m.mean));
    let _ = writeln!(out, "variance\t{}", fmt(m.variance));
    let tail = prior.tail_mass(range.1);
    let _ = writeln!(out, "P(k > {})\t{}", range.1, short(tail));

    let pmf: Vec<f64> = (1..=range.1).map(p).collect::<mfm_core::Result<_>>()?;
    let svg = posterior_svg(
        &[PmfSeries {
            label: prior.spec().label(),
            pmf,
            overflow: tail,
        }],
        range.1 as usize,
        &format!("Prior {}", prior.spec()),
    )?;
    Ok((out, svg))
}
