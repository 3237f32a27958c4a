//! Expected utilities for stepwise reward schedules and the Top-k race.

use rayon::prelude::*;

use crate::distributions::ArrivalModel;
use crate::error::{domain, Result};
use crate::numeric::{invert_cdf, CompensatedSum, QUANTILE_TOLERANCE};

/// Default number of deadlines kept from the harmonic `r / i` schedule.
pub const DEFAULT_HORIZON: usize = 16;

/// Quantile level used in place of `1` when the last rank equals the population size.
pub const TOP_QUANTILE_CAP: f64 = 1.0 - 1e-9;

/// Stepwise reward: `rewards[m]` if `deadlines[m-1] < X <= deadlines[m]`
/// (with an implicit deadline at 0), `-terminal_penalty` past the last deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSchedule {
    deadlines: Vec<f64>,
    rewards: Vec<f64>,
    terminal_penalty: f64,
}

impl RewardSchedule {
    pub fn new(deadlines: Vec<f64>, rewards: Vec<f64>, terminal_penalty: f64) -> Result<Self> {
        if deadlines.is_empty() {
            return domain("a reward schedule needs at least one deadline");
        }
        if deadlines.len() != rewards.len() {
            return domain(format!(
                "{} deadlines but {} rewards",
                deadlines.len(),
                rewards.len()
            ));
        }
        if !(deadlines[0].is_finite() && deadlines[0] > 0.0) {
            return domain("first deadline must be positive and finite");
        }
        if deadlines.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
            return domain("deadlines must be strictly increasing");
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return domain("rewards must be finite");
        }
        if rewards.windows(2).any(|w| w[1] > w[0]) {
            return domain("rewards must be nonincreasing");
        }
        if !(terminal_penalty.is_finite() && terminal_penalty >= 0.0) {
            return domain("terminal penalty must be finite and >= 0");
        }
        Ok(Self { deadlines, rewards, terminal_penalty })
    }

    /// `r` up to `base_delay`, then `r / i` on `((i-1) base_delay, i base_delay]`,
    /// truncated after `horizon` intervals.
    pub fn harmonic(base_delay: f64, reward: f64, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return domain("horizon must be at least 1");
        }
        let deadlines = (1..=horizon).map(|i| i as f64 * base_delay).collect();
        let rewards = (1..=horizon).map(|i| reward / i as f64).collect();
        Self::new(deadlines, rewards, 0.0)
    }

    /// A single deadline with reward `r`.
    pub fn single(deadline: f64, reward: f64) -> Result<Self> {
        Self::new(vec![deadline], vec![reward], 0.0)
    }

    pub fn deadlines(&self) -> &[f64] {
        &self.deadlines
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn terminal_penalty(&self) -> f64 {
        self.terminal_penalty
    }

    pub fn last_deadline(&self) -> f64 {
        *self.deadlines.last().expect("nonempty")
    }

    /// Realized utility for decoding time `x`.
    pub fn utility(&self, x: f64) -> f64 {
        let idx = self.deadlines.partition_point(|&d| d < x);
        self.rewards.get(idx).copied().unwrap_or(-self.terminal_penalty)
    }

    /// Probability mass beyond the last deadline, `1 - F(tau_last)`.
    pub fn truncation_mass<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        1.0 - cdf(self.last_deadline())
    }
}

/// `sum_m r_m [F(tau_m) - F(tau_{m-1})] - penalty (1 - F(tau_last))` with `tau_0 = 0`.
pub fn expected_utility_schedule<F>(cdf: F, schedule: &RewardSchedule) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = CompensatedSum::new();
    let mut prev = cdf(0.0)?;
    for (&deadline, &reward) in schedule.deadlines.iter().zip(&schedule.rewards) {
        let cur = cdf(deadline)?;
        acc.add(reward * (cur - prev));
        prev = cur;
    }
    acc.add(-schedule.terminal_penalty * (1.0 - prev));
    Ok(acc.value())
}

/// Population mixture `alpha F_fast + (1 - alpha) F_base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixturePopulation {
    alpha: f64,
    fast: ArrivalModel,
    base: ArrivalModel,
}

impl MixturePopulation {
    pub fn new(alpha: f64, fast: ArrivalModel, base: ArrivalModel) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, fast, base })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cdf(&self, tau: f64) -> Result<f64> {
        Ok(self.alpha * self.fast.cdf(tau)? + (1.0 - self.alpha) * self.base.cdf(tau)?)
    }

    fn scale(&self) -> f64 {
        self.fast.mean().min(self.base.mean())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        domain(format!("fraction alpha = {alpha} outside [0, 1]"))
    }
}

/// Mixture of the rateless and uncoded CDFs at common `k` and `lambda`.
pub fn mixture_cdf(alpha: f64, tau: f64, k: u32, lambda: f64) -> Result<f64> {
    let fast = ArrivalModel::rateless(k, lambda)?;
    let base = ArrivalModel::uncoded(k, lambda)?;
    MixturePopulation::new(alpha, fast, base)?.cdf(tau)
}

/// `tau_m = F^{-1}(m / n)` for `m = 1..=s`; `m = n` is capped at [`TOP_QUANTILE_CAP`].
pub fn quantile_deadlines<F>(population_cdf: F, n: usize, s: usize, scale: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if n == 0 || s == 0 || s > n {
        return domain(format!("need 1 <= s <= N, got s = {s}, N = {n}"));
    }
    (1..=s)
        .map(|m| {
            let level = if m == n { TOP_QUANTILE_CAP } else { m as f64 / n as f64 };
            invert_cdf(&population_cdf, level, scale, QUANTILE_TOLERANCE)
        })
        .collect()
}

/// Top-k race parameters. The participant's own lane is chosen per evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceConfig {
    n_competitors: usize,
    rank_rewards: Vec<f64>,
    gas: f64,
    alpha: f64,
    fast_model: ArrivalModel,
    base_model: ArrivalModel,
}

impl RaceConfig {
    pub fn new(
        n_competitors: usize,
        rank_rewards: Vec<f64>,
        gas: f64,
        alpha: f64,
        fast_model: ArrivalModel,
        base_model: ArrivalModel,
    ) -> Result<Self> {
        let s = rank_rewards.len();
        if s == 0 || s > n_competitors {
            return domain(format!("need 1 <= s <= N, got s = {s}, N = {n_competitors}"));
        }
        if rank_rewards.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return domain("rank rewards must be positive");
        }
        if rank_rewards.windows(2).any(|w| w[1] > w[0]) {
            return domain("rank rewards must be nonincreasing");
        }
        if !(gas.is_finite() && gas >= 0.0) {
            return domain("gas penalty must be finite and >= 0");
        }
        check_alpha(alpha)?;
        Ok(Self { n_competitors, rank_rewards, gas, alpha, fast_model, base_model })
    }

    /// Rewards `r (s - m + 1) / s` for ranks `m = 1..=s`.
    pub fn linear_decay(
        n_competitors: usize,
        s: usize,
        reward: f64,
        gas: f64,
        alpha: f64,
        fast_model: ArrivalModel,
        base_model: ArrivalModel,
    ) -> Result<Self> {
        let rewards = (1..=s)
            .map(|m| reward * (s - m + 1) as f64 / s as f64)
            .collect();
        Self::new(n_competitors, rewards, gas, alpha, fast_model, base_model)
    }

    pub fn n_competitors(&self) -> usize {
        self.n_competitors
    }

    pub fn s_rewarded(&self) -> usize {
        self.rank_rewards.len()
    }

    pub fn rank_rewards(&self) -> &[f64] {
        &self.rank_rewards
    }

    pub fn gas(&self) -> f64 {
        self.gas
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn fast_model(&self) -> &ArrivalModel {
        &self.fast_model
    }

    pub fn base_model(&self) -> &ArrivalModel {
        &self.base_model
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn population(&self) -> Result<MixturePopulation> {
        MixturePopulation::new(self.alpha, self.fast_model, self.base_model)
    }

    /// Population quantile deadlines `tau_1 < ... < tau_s`.
    pub fn deadlines(&self) -> Result<Vec<f64>> {
        let pop = self.population()?;
        quantile_deadlines(
            |t| pop.cdf(t).unwrap_or(f64::NAN),
            self.n_competitors,
            self.s_rewarded(),
            pop.scale(),
        )
    }
}

/// `-g + (r_s + g) F(tau_s) + sum_{m<s} (r_m - r_{m+1}) F(tau_m)`.
pub fn topk_expected_utility<F>(own_cdf: F, config: &RaceConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let deadlines = config.deadlines()?;
    topk_utility_at(&own_cdf, &deadlines, config.rank_rewards(), config.gas())
}

fn topk_utility_at<F>(own_cdf: &F, deadlines: &[f64], rewards: &[f64], gas: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let s = rewards.len();
    let mut acc = CompensatedSum::new();
    acc.add(-gas);
    acc.add((rewards[s - 1] + gas) * own_cdf(deadlines[s - 1])?);
    for m in 0..s - 1 {
        acc.add((rewards[m] - rewards[m + 1]) * own_cdf(deadlines[m])?);
    }
    Ok(acc.value())
}

/// One point of the adoption sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub eu_fast: f64,
    pub eu_base: f64,
}

impl AlphaPoint {
    /// Participation constraint `E[U] >= 0` for each lane.
    pub fn participates(&self) -> (bool, bool) {
        (self.eu_fast >= 0.0, self.eu_base >= 0.0)
    }
}

/// Top-k utility of a fast-lane and a base-lane participant over an `alpha` grid.
pub fn utility_vs_alpha(template: &RaceConfig, alphas: &[f64]) -> Result<Vec<AlphaPoint>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let config = template.with_alpha(alpha)?;
            let deadlines = config.deadlines()?;
            let fast = *config.fast_model();
            let base = *config.base_model();
            let eu_fast =
                topk_utility_at(&|t| fast.cdf(t), &deadlines, config.rank_rewards(), config.gas())?;
            let eu_base =
                topk_utility_at(&|t| base.cdf(t), &deadlines, config.rank_rewards(), config.gas())?;
            Ok(AlphaPoint { alpha, eu_fast, eu_base })
        })
        .collect()
}
