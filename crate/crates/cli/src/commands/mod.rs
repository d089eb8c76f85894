mod fit;
mod prior;
mod reproduce;
mod verify;

pub use fit::{fit, posterior_csv, resolve_model};
pub use prior::{parse_k_range, prior_report};
pub use reproduce::{galaxy_sampler, reproduce, targets};
pub use verify::{verify, VerifyLine, VERIFY_K_MAX};
