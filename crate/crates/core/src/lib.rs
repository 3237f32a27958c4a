//! Decoding-time distributions, price-rate bounds and deadline utilities for
//! sharded and coded payload delivery.
//!
//! The crate is organized bottom-up:
//!
//! - [`distributions`]: closed-form decoding-time CDFs for unsharded,
//!   uncoded-sharded, fixed-rate and rateless delivery, plus the shard
//!   counting laws behind them.
//! - [`turbo`]: the two-lane decoder that mixes base-lane shards with an RLNC
//!   fast lane.
//! - [`pricing`]: mean-field price bounds and the fast-lane revenue optimizer.
//! - [`scenarios`]: multi-deadline reward schedules and the Top-k race.
//! - [`simulate`]: a seeded Monte Carlo oracle and a finite-field rank
//!   experiment.

pub mod distributions;
pub mod error;
pub mod numeric;
pub mod pricing;
pub mod scenarios;
pub mod simulate;
pub mod turbo;

pub use distributions::{
    cdf_fixed_rate, cdf_rateless, cdf_uncoded, cdf_unsharded, counting_pmf, quantile,
    ArrivalModel, CountingLaw, CountingPmf, Scheme,
};
pub use error::{Error, Result};
pub use pricing::{
    expected_utility_single, fast_lane_price_bound, optimize_fast_lane, price_bound,
    FastLaneProblem, FastLaneSolution, OptimizerConfig, PriceRatePair, SolutionKind,
};
pub use scenarios::{
    expected_utility_schedule, mixture_cdf, quantile_deadlines, topk_expected_utility,
    utility_vs_alpha, AlphaPoint, MixturePopulation, RaceConfig, RewardSchedule,
};
pub use simulate::{
    empirical_cdf, ks_distance, rlnc_innovation_rate, sample_decode_time, EmpiricalCdf,
    RankExperimentConfig, RankMode, RankReport, SimModel,
};
pub use turbo::{cdf_turbo, cdf_turbo_sharded, cdf_turbo_unsharded, TurboModel};
