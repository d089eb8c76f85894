//! Positive series `Σ_{k ≥ start} exp(g(k))` summed in the log domain with a
//! controlled truncation error.
//!
//! Two tail treatments are supported. When a uniform bound `r < 1` on the
//! ratio of consecutive terms is known, the remainder is bounded by a
//! geometric series. When the summand only decays polynomially, the
//! remainder is evaluated with the Euler–Maclaurin formula: a quadrature of
//! the smooth extension of the summand plus end corrections, whose first
//! omitted term serves as the error estimate.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::special::LogAccumulator;

const MAX_DIRECT_TERMS: u64 = 1 << 26;

pub(crate) enum TailRule<'a> {
    /// Terms are zero after `last` (inclusive bound).
    Finite { last: u64 },
    /// `bound(k)` is an upper bound on `term(j + 1) / term(j)` for every `j ≥ k`.
    Ratio(&'a dyn Fn(u64) -> f64),
    /// The log-summand is smooth in `k` on `[start, ∞)`.
    Smooth,
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub ln_value: f64,
    /// Estimated relative truncation error of `exp(ln_value)`.
    pub rel_error: f64,
}

pub(crate) fn sum_series(
    log_term: &dyn Fn(f64) -> f64,
    start: u64,
    rule: TailRule<'_>,
    rel_tol: f64,
) -> Result<SeriesSum> {
    let mut acc = LogAccumulator::new();
    match rule {
        TailRule::Finite { last } => {
            for k in start..=last {
                acc.add(log_term(k as f64));
            }
            Ok(SeriesSum {
                ln_value: acc.ln_value(),
                rel_error: 0.0,
            })
        }
        TailRule::Ratio(bound) => {
            let ln_tol = rel_tol.ln();
            let mut k = start;
            loop {
                let lt = log_term(k as f64);
                acc.add(lt);
                let r = bound(k);
                let s = acc.ln_value();
                if r < 1.0 && s > f64::NEG_INFINITY {
                    let ln_tail = lt + r.ln() - (-r).ln_1p();
                    if ln_tail - s <= ln_tol || lt == f64::NEG_INFINITY {
                        return Ok(SeriesSum {
                            ln_value: s,
                            rel_error: (ln_tail - s).exp(),
                        });
                    }
                }
                k += 1;
                if k - start > MAX_DIRECT_TERMS {
                    return Err(Error::Numeric {
                        message: "series did not reach its ratio-bound stopping rule".into(),
                        achieved: f64::NAN,
                    });
                }
            }
        }
        TailRule::Smooth => {
            let mut k = start;
            let mut checkpoint = (start + 16).max(2 * start);
            loop {
                while k < checkpoint {
                    acc.add(log_term(k as f64));
                    k += 1;
                }
                let s = acc.ln_value();
                let gk = log_term(k as f64);
                if gk == f64::NEG_INFINITY {
                    return Ok(SeriesSum {
                        ln_value: s,
                        rel_error: 0.0,
                    });
                }
                if gk < log_term((k - 1) as f64) {
                    let tail = euler_maclaurin_tail(log_term, k as f64)?;
                    let total = ln_add(s, tail.ln_value);
                    let rel = (tail.ln_error - total).exp();
                    if rel <= rel_tol {
                        return Ok(SeriesSum {
                            ln_value: total,
                            rel_error: rel,
                        });
                    }
                }
                checkpoint *= 2;
                if checkpoint - start > MAX_DIRECT_TERMS {
                    return Err(Error::Numeric {
                        message: "series tail did not converge".into(),
                        achieved: f64::NAN,
                    });
                }
            }
        }
    }
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TailEstimate {
    pub ln_value: f64,
    pub ln_error: f64,
}

/// `Σ_{k ≥ from} exp(g(k))` for a smooth, eventually decreasing `g`.
pub(crate) fn euler_maclaurin_tail(g: &dyn Fn(f64) -> f64, from: f64) -> Result<TailEstimate> {
    let g0 = g(from);
    let h = (from / 16.0).max(0.5);
    let gp1 = g(from + h);
    let gp2 = g(from + 2.0 * h);
    let gm1 = g(from - h);
    let gm2 = g(from - 2.0 * h);
    let d1 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h);
    let d2 = (-gp2 + 16.0 * gp1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * h * h);
    let d3 = (gp2 - 2.0 * gp1 + 2.0 * gm1 - gm2) / (2.0 * h * h * h);
    // f'/f and f'''/f for f = exp(g)
    let f1 = d1;
    let f3 = d3 + 3.0 * d1 * d2 + d1 * d1 * d1;

    // ∫_from^∞ f(x) dx / f(from), with x = from·e^s.
    let scaled = |s: f64| -> f64 {
        let x = from * s.exp();
        (g(x) - g0 + s).exp() * from
    };
    let ln_scaled = |s: f64| g(from * s.exp()) - g0 + s + from.ln();
    let mut s_max = 8.0;
    let floor = -40.0 + from.ln();
    // x = from·e^s must stay finite
    let s_cap = (f64::MAX.ln() - 1.0 - from.ln()).min(512.0);
    while ln_scaled(s_max) > floor && s_max < s_cap {
        s_max = (2.0 * s_max).min(s_cap);
    }
    let opts = QuadratureOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    // Rounding in g(x) − g0 can stall the strict tolerance when g is a
    // difference of large log-gamma values; the looser pass still reports
    // its own error estimate.
    let integral = match integrate(scaled, 0.0, s_max, opts) {
        Ok(i) => i,
        Err(_) => integrate(
            scaled,
            0.0,
            s_max,
            QuadratureOptions {
                rel_tol: 1e-10,
                ..opts
            },
        )?,
    };
    let decay = (ln_scaled(s_max - 1.0) - ln_scaled(s_max)).max(1e-3);
    let remainder = ln_scaled(s_max).exp() / decay;

    let value = integral.value + 0.5 - f1 / 12.0 + f3 / 720.0;
    let error = (f3 / 720.0).abs() + integral.error + remainder + 1e-15 * value.abs();
    if !(value > 0.0) {
        return Err(Error::Numeric {
            message: "Euler-Maclaurin tail estimate is not positive".into(),
            achieved: error,
        });
    }
    Ok(TailEstimate {
        ln_value: g0 + value.ln(),
        ln_error: g0 + error.ln(),
    })
}
