//! Loss-based prior restricted to `{1, …, K}`.
//!
//! Conditionally on `p`, `k` is geometric truncated to `K` values:
//! `P(k | p) = p^{k−1}(1 − p) / (1 − p^K)`. The marginal has no closed
//! form and is computed by quadrature. Working in `q = 1 − p`, which follows
//! a standard `Beta(α, β)` law, the removable point `p → 1` becomes `q → 0`
//! where `q / (1 − (1 − q)^K) → 1/K`, and both endpoint power singularities
//! are removed by a change of variable.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::special::ln_beta;

const OPTS: QuadratureOptions = QuadratureOptions {
    abs_tol: 1e-14,
    rel_tol: 1e-12,
    max_intervals: 2000,
};

// q / (1 − (1 − q)^K), with its limit 1/K at q = 0.
fn truncation_factor(q: f64, max_k: f64) -> f64 {
    if q <= 0.0 {
        return 1.0 / max_k;
    }
    let denom = -(max_k * (-q).ln_1p()).exp_m1();
    q / denom
}

/// Probability of `k` under the loss-based prior truncated to `{1, …, K}`.
pub fn finite_support_pmf(alpha: f64, beta: f64, max_k: u64, k: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "loss-based prior needs alpha, beta > 0 (got {alpha}, {beta})"
        )));
    }
    if max_k == 0 {
        return Err(Error::domain("support bound K must be at least 1"));
    }
    if k == 0 || k > max_k {
        return Err(Error::domain(format!("k = {k} is outside the support 1..={max_k}")));
    }
    let kk = max_k as f64;
    let ln_b = ln_beta(alpha, beta);
    // exponent of (1 − q) in the integrand, plus one
    let e = beta + k as f64 - 1.0;

    // q in [0, 1/2] with q = u^{1/α}
    let lower = |u: f64| -> f64 {
        let q = u.powf(1.0 / alpha);
        let ln_rest = (e - 1.0) * (-q).ln_1p() - ln_b - alpha.ln();
        ln_rest.exp() * truncation_factor(q, kk)
    };
    // 1 − q in [0, 1/2] with 1 − q = w^{1/e}
    let upper = |w: f64| -> f64 {
        let v = w.powf(1.0 / e);
        let q = 1.0 - v;
        let ln_rest = alpha * q.ln() - ln_b - e.ln();
        let denom = if v == 0.0 { 1.0 } else { -(kk * v.ln()).exp_m1() };
        ln_rest.exp() / denom
    };

    let a = integrate(lower, 0.0, 0.5f64.powf(alpha), OPTS)?;
    let b = integrate(upper, 0.0, 0.5f64.powf(e), OPTS)?;
    Ok(a.value + b.value)
}
