//! Prior specification strings.
//!
//! ```text
//! spec  := name [ "(" args ")" ]
//! args  := number { "," number }
//! name  := "lossbased" | "lossbased-default" | "lossbased-finite"
//!        | "lossbased-rate" | "uniform" | "poisson" | "poisson-shifted"
//!        | "geometric"
//! ```
//!
//! | spec                          | prior                                  |
//! |-------------------------------|----------------------------------------|
//! | `lossbased(alpha,beta)`       | beta-geometric, `k ≥ 1`                |
//! | `lossbased-default`           | `lossbased(1,1)`, `P(k) = 1/(k(k+1))`  |
//! | `lossbased-finite(a,b,K)`     | loss-based on `{1..K}`                 |
//! | `lossbased-rate(c)`           | `P(k) ∝ exp(−c k)`                     |
//! | `uniform(K)`                  | uniform on `{1..K}`                    |
//! | `poisson(lambda)`             | zero-truncated Poisson                 |
//! | `poisson-shifted(lambda)`     | `k − 1 ~ Poisson(lambda)`              |
//! | `geometric(p)`                | `p^{k−1}(1 − p)`                       |
//!
//! Whitespace is ignored around tokens.

use super::KPriorSpec;
use crate::error::{Error, Result};

/// Accepted prior specification forms, for error hints.
pub const SPEC_FORMS: &str = "lossbased(a,b), lossbased-default, lossbased-finite(a,b,K), \
lossbased-rate(c), uniform(K), poisson(lambda), poisson-shifted(lambda), geometric(p)";

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: msg.into(),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<(usize, f64)> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        if text.is_empty() {
            return Err(self.err("expected a number"));
        }
        text.parse::<f64>().map(|v| (start, v)).map_err(|_| Error::Parse {
            position: start,
            message: format!("'{text}' is not a number"),
        })
    }
}

pub(super) fn parse_prior_spec(src: &str) -> Result<KPriorSpec> {
    let mut cur = Cursor { src, pos: 0 };
    cur.skip_ws();
    let name_pos = cur.pos;
    let name = cur.ident();
    if name.is_empty() {
        return Err(cur.err(format!("expected a prior name; one of {SPEC_FORMS}")));
    }
    cur.skip_ws();
    let mut args = Vec::new();
    if cur.peek() == Some('(') {
        cur.pos += 1;
        loop {
            args.push(cur.number()?);
            cur.skip_ws();
            match cur.peek() {
                Some(',') => cur.pos += 1,
                Some(')') => {
                    cur.pos += 1;
                    break;
                }
                _ => return Err(cur.err("expected ',' or ')'")),
            }
        }
    }
    cur.skip_ws();
    if cur.pos != src.len() {
        return Err(cur.err("unexpected trailing input"));
    }

    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse {
                position: name_pos,
                message: format!("'{name}' takes {n} argument(s), got {}", args.len()),
            })
        }
    };
    let integer = |(pos, v): (usize, f64)| -> Result<u64> {
        if v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(Error::Parse {
                position: pos,
                message: format!("expected a positive integer, got {v}"),
            })
        }
    };

    let spec = match name {
        "lossbased" => {
            arity(2)?;
            KPriorSpec::LossBased {
                alpha: args[0].1,
                beta: args[1].1,
            }
        }
        "lossbased-default" => {
            arity(0)?;
            KPriorSpec::loss_based_default()
        }
        "lossbased-finite" => {
            arity(3)?;
            KPriorSpec::LossBasedFinite {
                alpha: args[0].1,
                beta: args[1].1,
                max_k: integer(args[2])?,
            }
        }
        "lossbased-rate" => {
            arity(1)?;
            KPriorSpec::LossBasedFixedRate { c: args[0].1 }
        }
        "uniform" => {
            arity(1)?;
            KPriorSpec::Uniform {
                max_k: integer(args[0])?,
            }
        }
        "poisson" => {
            arity(1)?;
            KPriorSpec::TruncatedPoisson { lambda: args[0].1 }
        }
        "poisson-shifted" => {
            arity(1)?;
            KPriorSpec::ShiftedPoisson { lambda: args[0].1 }
        }
        "geometric" => {
            arity(1)?;
            KPriorSpec::Geometric { p: args[0].1 }
        }
        other => {
            return Err(Error::Parse {
                position: name_pos,
                message: format!("unknown prior '{other}'; expected one of {SPEC_FORMS}"),
            })
        }
    };
    Ok(spec)
}
