use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{CommandName, Format, Grid};

/// Decoding-time distributions, price bounds and deadline utilities for
/// sharded and coded payload delivery.
///
/// Rates are in shards per time unit and times in the same abstract unit.
#[derive(Debug, Parser)]
#[command(name = "shardprice", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decoding-time CDFs of the four delivery schemes over a tau grid.
    Cdf,
    /// Standalone price bound r F(tau) / lambda1 over a tau grid.
    Price,
    /// Fast-lane price bound and revenue per fast-lane user over a lambda2 grid.
    TurboPrice,
    /// Expected utility of the r/i deadline schedule over a lambda2 grid.
    Multideadline,
    /// Top-k race utility of a fast-lane and a base-lane searcher over an alpha grid.
    Race,
    /// Monte Carlo, limit, dominance and rank checks; exits 2 on failure.
    Validate,
    /// Re-run the configuration embedded in a previous output file.
    Replay {
        /// CSV or JSON output of an earlier run.
        file: PathBuf,
    },
}

/// Model, grid and output flags shared by every subcommand. Unset flags take
/// the per-command defaults.
#[derive(Debug, Default, Args)]
pub struct Params {
    /// Shards needed to decode.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Code length of the fixed-rate scheme.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Base-lane shard rate.
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    /// Fast-lane shard rate (cdf: adds Turbo columns when positive).
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    /// Cap on the combined rate (default 2 * lambda1).
    #[arg(long = "lambda-max", global = true)]
    pub lambda_max: Option<f64>,
    /// Deadline (turbo-price) or base delay of the schedule (multideadline).
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Reward for a timely decode.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Number of competitors in the race.
    #[arg(long = "N", global = true)]
    pub big_n: Option<usize>,
    /// Number of rewarded ranks in the race.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    /// Gas penalty when unrewarded (default r / 4).
    #[arg(long, global = true)]
    pub gas: Option<f64>,
    /// Fast-lane adoption level whose race deadlines are reported.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Sweep grid as min:max:points.
    #[arg(long, global = true)]
    pub grid: Option<Grid>,
    /// Monte Carlo trials per model in validate.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Trials of the rank experiment in validate.
    #[arg(long = "rank-trials", global = true)]
    pub rank_trials: Option<usize>,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of deadlines in the r/i schedule.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Quantile level reported by cdf.
    #[arg(long = "service-level", global = true)]
    pub service_level: Option<f64>,
    /// Output format.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> Option<CommandName> {
        Some(match self {
            Command::Cdf => CommandName::Cdf,
            Command::Price => CommandName::Price,
            Command::TurboPrice => CommandName::TurboPrice,
            Command::Multideadline => CommandName::Multideadline,
            Command::Race => CommandName::Race,
            Command::Validate => CommandName::Validate,
            Command::Replay { .. } => return None,
        })
    }
}
