// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line interface for exact Bayesian change-point analysis.
//!
//! Locations are 1-based: a change-point at `t` is the first index of the
//! segment to its right, so a length-`n` series supports change-points in
//! `2..=n`. Thread count for replicate-parallel commands follows
//! `RAYON_NUM_THREADS`.

mod commands;
mod input;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Input/validation failure.
pub const EXIT_INPUT: u8 = 2;
/// Numerical degeneracy (trivial coincidence prior, internal inconsistency).
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self {
            message,
            code: EXIT_INPUT,
        }
    }

    pub fn from_core(e: ebcp::Error) -> Self {
        let code = match e {
            ebcp::Error::DegeneratePrior { .. } | ebcp::Error::NumericalInconsistency(_) => {
                EXIT_NUMERIC
            }
            _ => EXIT_INPUT,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

impl From<ebcp::Error> for CliError {
    fn from(e: ebcp::Error) -> Self {
        Self::from_core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "ebcp",
    about = "Exact Bayesian change-point posteriors and cross-series comparison",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    /// negative binomial with known dispersion
    Nb,
    /// Poisson
    Poisson,
    /// Gaussian with known variance
    GaussKnownVar,
    /// Gaussian with per-segment mean and variance
    GaussHetero,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Emission model selection shared by the analysis commands.
#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Emission family
    #[arg(long, value_enum, default_value = "nb")]
    model: Family,

    /// NB dispersion φ (conflicts with --estimate-phi)
    #[arg(long, conflicts_with = "estimate_phi")]
    phi: Option<f64>,

    /// Estimate φ per series with the sliding-window moments estimator
    #[arg(long)]
    estimate_phi: bool,

    /// Known observation variance σ² (gauss-known-var)
    #[arg(long)]
    sigma2: Option<f64>,

    /// First prior hyperparameter (Beta α / Gamma shape)
    #[arg(long)]
    prior_a: Option<f64>,

    /// Second prior hyperparameter (Beta β / Gamma rate)
    #[arg(long)]
    prior_b: Option<f64>,

    /// Prior mean μ₀ (Gaussian families)
    #[arg(long)]
    prior_mu0: Option<f64>,

    /// Prior variance scale v₀ (Gaussian families)
    #[arg(long)]
    prior_v0: Option<f64>,

    /// Inverse-gamma shape a₀ (gauss-hetero)
    #[arg(long)]
    prior_a0: Option<f64>,

    /// Inverse-gamma scale b₀ (gauss-hetero)
    #[arg(long)]
    prior_b0: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior of every change-point of one series for a fixed K
    Segment {
        /// Input file (plain counts or TSV with header)
        input: PathBuf,

        /// Number of segments
        #[arg(short = 'K', long = "K")]
        segments: usize,

        /// Credibility level
        #[arg(long, default_value_t = 0.95)]
        level: f64,

        #[command(flatten)]
        model: ModelArgs,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Posterior of the shift between change-points of two series
    CompareShift {
        /// Input files providing exactly two series in total
        inputs: Vec<PathBuf>,

        /// Segments per series (one value broadcasts)
        #[arg(short = 'K', long = "K", required = true, num_args = 1..)]
        segments: Vec<usize>,

        /// Change-point index per series (one value broadcasts)
        #[arg(short = 'k', long = "k", required = true, num_args = 1..)]
        indices: Vec<usize>,

        /// Credibility level
        #[arg(long, default_value_t = 0.95)]
        level: f64,

        #[command(flatten)]
        model: ModelArgs,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Posterior probability of a common change-point across I ≥ 2 series
    CompareCommon {
        /// Input files providing the series
        inputs: Vec<PathBuf>,

        /// Segments per series (one value broadcasts)
        #[arg(short = 'K', long = "K", required = true, num_args = 1..)]
        segments: Vec<usize>,

        /// Change-point index per series (one value broadcasts); omit with
        /// --all-k to sweep every shared index
        #[arg(short = 'k', long = "k", num_args = 1..)]
        indices: Vec<usize>,

        /// Analyze every shared change-point index 1..=min(K)−1
        #[arg(long, conflicts_with = "indices")]
        all_k: bool,

        /// Prior coincidence probability: a global value ("0.5") and/or
        /// per-index overrides ("2=0.99"), repeatable
        #[arg(long = "p0", default_values_t = [String::from("0.5")])]
        p0: Vec<String>,

        #[command(flatten)]
        model: ModelArgs,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Sliding-window method-of-moments dispersion estimate per series
    EstimatePhi {
        /// Input files
        inputs: Vec<PathBuf>,

        /// Initial window size
        #[arg(long, default_value_t = 15)]
        window: usize,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Run the three-profile benchmark and emit abacus rows as CSV
    Simulate {
        /// Emission family of the generator
        #[arg(long, value_enum, default_value = "nb")]
        family: Family,

        /// Baseline success probability p₀ (NB)
        #[arg(long, default_value_t = 0.5)]
        p0_level: f64,

        /// Baseline rate λ₀ (Poisson)
        #[arg(long, default_value_t = 0.73)]
        lambda0: f64,

        /// True dispersion φ (NB)
        #[arg(long, default_value_t = 1.0)]
        phi: f64,

        /// Odds ratio s between even and odd segments
        #[arg(short = 's', long, default_value_t = 4.0)]
        odds_ratio: f64,

        /// Number of replicates
        #[arg(long, default_value_t = 100)]
        replicates: usize,

        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Analyze with the true φ instead of estimating it
        #[arg(long)]
        use_true_phi: bool,

        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment {
            input,
            segments,
            level,
            model,
            output,
        } => commands::segment(&input, segments, level, &model, &output),
        Command::CompareShift {
            inputs,
            segments,
            indices,
            level,
            model,
            output,
        } => commands::compare_shift(&inputs, &segments, &indices, level, &model, &output),
        Command::CompareCommon {
            inputs,
            segments,
            indices,
            all_k,
            p0,
            model,
            output,
        } => commands::compare_common(&inputs, &segments, &indices, all_k, &p0, &model, &output),
        Command::EstimatePhi {
            inputs,
            window,
            output,
        } => commands::estimate_phi(&inputs, window, &output),
        Command::Simulate {
            family,
            p0_level,
            lambda0,
            phi,
            odds_ratio,
            replicates,
            seed,
            use_true_phi,
            out,
        } => commands::simulate(
            family,
            p0_level,
            lambda0,
            phi,
            odds_ratio,
            replicates,
            seed,
            use_true_phi,
            out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
