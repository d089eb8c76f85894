use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfm_cli::commands::{fit, parse_k_range, prior_report, reproduce, verify};
use mfm_cli::config::{layered, pick_scale, read_table};
use mfm_cli::{CliError, Result, RunConfig, Scale};
use mfm_core::experiments::ModelKind;

/// Bayesian inference on the number of components of a Gaussian mixture.
#[derive(Debug, Parser)]
#[command(name = "mfm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one data set and write the posterior over k.
    Fit(FitArgs),
    /// Print the pmf and moments of a prior on k.
    Prior(PriorArgs),
    /// Compare the sampler with exact enumeration on a tiny data set.
    Verify(VerifyArgs),
    /// Rerun the galaxy analysis or a simulation table.
    Reproduce(ReproduceArgs),
}

/// Values come from the built-in defaults, then `--config`, then these
/// flags.
#[derive(Debug, Args)]
struct FitArgs {
    /// TOML run file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV file, or `galaxy` for the bundled velocities.
    #[arg(long)]
    data: Option<String>,
    /// Prior on k, e.g. `lossbased-default`, `poisson(1)`, `uniform(50)`.
    #[arg(long)]
    prior: Option<String>,
    /// auto, conjugate or richardson-green.
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Dirichlet parameter of the mixture weights.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run-length preset the sampler settings start from.
    #[arg(long, value_enum)]
    scale: Option<Scale>,
}

#[derive(Debug, Args)]
struct PriorArgs {
    /// Prior specification.
    spec: String,
    /// Range of k to tabulate, `a..b` or `b`.
    #[arg(long, default_value = "1..10")]
    k: String,
    /// Also write an SVG bar chart to this path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Number of simulated points, at most 10.
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Prior to check; repeatable. Defaults to the three compared priors.
    #[arg(long = "prior")]
    priors: Vec<String>,
    /// Retained sampler iterations per prior.
    #[arg(long, default_value_t = 50_000)]
    retained: usize,
    /// Total variation bound for PASS.
    #[arg(long, default_value_t = 0.02)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// `galaxy`, `all`, or a scenario id such as `m2a`.
    target: String,
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "reproduce-output")]
    out: PathBuf,
    /// Replicates per table cell, overriding the scale preset.
    #[arg(long)]
    replicates: Option<usize>,
    /// TOML grid file (scenarios, sample_sizes, priors, replicates,
    /// model, master_seed, [sampler]).
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run_fit(args: FitArgs) -> Result<String> {
    let file = args.config.as_deref().map(read_table).transpose()?;
    let scale = pick_scale(args.scale, file.as_ref())?;
    let defaults = RunConfig {
        scale,
        sampler: scale.sampler(),
        ..RunConfig::default()
    };
    let mut config = layered(&defaults, file)?;
    config.scale = scale;
    if let Some(v) = args.data {
        config.data = v;
    }
    if let Some(v) = args.prior {
        config.prior = v;
    }
    if let Some(v) = args.model {
        config.model = v;
    }
    if let Some(v) = args.out {
        config.out = v;
    }
    let s = &mut config.sampler;
    if let Some(v) = args.iters {
        s.iterations = v;
    }
    if let Some(v) = args.burnin {
        s.burn_in = v;
    }
    if let Some(v) = args.thin {
        s.thin = v;
    }
    if let Some(v) = args.gamma {
        s.gamma = v;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    fit(&config)
}

fn run_prior(args: PriorArgs) -> Result<String> {
    let range = parse_k_range(&args.k)?;
    let (text, svg) = prior_report(&args.spec, range)?;
    if let Some(path) = args.plot {
        std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(text)
}

fn run_verify(args: VerifyArgs) -> Result<(String, bool)> {
    let priors = if args.priors.is_empty() {
        mfm_core::experiments::default_priors()
    } else {
        args.priors
    };
    let (lines, report) = verify(args.n, args.seed, &priors, args.retained, args.threshold)?;
    Ok((report, lines.iter().all(|l| l.pass)))
}

fn run_reproduce(args: ReproduceArgs) -> Result<String> {
    let mut file = args.config.as_deref().map(read_table).transpose()?;
    let scale = pick_scale(args.scale, file.as_ref())?;
    if let Some(t) = file.as_mut() {
        t.remove("scale");
    }
    reproduce(&args.target, scale, args.seed, args.replicates, file, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => run_fit(a).map(|r| (r, true)),
        Command::Prior(a) => run_prior(a).map(|r| (r, true)),
        Command::Verify(a) => run_verify(a),
        Command::Reproduce(a) => run_reproduce(a).map(|r| (r, true)),
    };
    match result {
        Ok((report, ok)) => {
            print!("{report}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
