use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::args::Params;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Evenly spaced grid `min:max:points`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self, String> {
        if !(min.is_finite() && max.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if min > max {
            return Err(format!("grid min {min} exceeds max {max}"));
        }
        if points == 0 {
            return Err("grid needs at least one point".into());
        }
        if points == 1 && min != max {
            return Err("a single-point grid needs min == max".into());
        }
        Ok(Self { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("expected min:max:points, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let points = points.trim().parse::<usize>().map_err(|e| format!("{points:?}: {e}"))?;
        Grid::new(num(min)?, num(max)?, points)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Cdf,
    Price,
    TurboPrice,
    Multideadline,
    Race,
    Validate,
}

/// Fully resolved parameters of one run. Embedded verbatim in every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    pub k: u32,
    pub n: u32,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_max: f64,
    pub tau: f64,
    pub r: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub s: usize,
    pub gas: f64,
    pub alpha: f64,
    pub grid: Grid,
    pub trials: usize,
    pub rank_trials: usize,
    pub seed: u64,
    pub horizon: usize,
    pub service_level: f64,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(command: CommandName, p: &Params) -> Result<Self, CliError> {
        let lambda1 = p.lambda1.unwrap_or(32.0);
        let lambda_max = p.lambda_max.unwrap_or(2.0 * lambda1);
        let r = p.r.unwrap_or(1.0);
        let grid = match p.grid {
            Some(g) => g,
            None => default_grid(command, lambda1, lambda_max)?,
        };
        let config = Self {
            command,
            k: p.k.unwrap_or(32),
            n: p.n.unwrap_or(64),
            lambda1,
            lambda2: p.lambda2.unwrap_or(0.0),
            lambda_max,
            tau: p.tau.unwrap_or(1.0),
            r,
            big_n: p.big_n.unwrap_or(20),
            s: p.s.unwrap_or(7),
            gas: p.gas.unwrap_or(r / 4.0),
            alpha: p.alpha.unwrap_or(0.5),
            grid,
            trials: p.trials.unwrap_or(100_000),
            rank_trials: p.rank_trials.unwrap_or(10_000),
            seed: p.seed.unwrap_or(1),
            horizon: p.horizon.unwrap_or(16),
            service_level: p.service_level.unwrap_or(0.95),
            format: p.format.unwrap_or(Format::Csv),
        };
        config.check()?;
        Ok(config)
    }

    /// Applies explicitly given flags on top of a replayed config.
    pub fn overridden(mut self, p: &Params) -> Result<Self, CliError> {
        macro_rules! take {
            ($($field:ident <- $flag:ident),* $(,)?) => {
                $(if let Some(v) = p.$flag { self.$field = v; })*
            };
        }
        take!(
            k <- k, n <- n, lambda1 <- lambda1, lambda2 <- lambda2, lambda_max <- lambda_max,
            tau <- tau, r <- r, big_n <- big_n, s <- s, gas <- gas, alpha <- alpha,
            grid <- grid, trials <- trials, rank_trials <- rank_trials, seed <- seed,
            horizon <- horizon, service_level <- service_level, format <- format,
        );
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::param(format!("--{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda1", self.lambda1)?;
        positive("lambda-max", self.lambda_max)?;
        positive("tau", self.tau)?;
        positive("r", self.r)?;
        if !(self.lambda2.is_finite() && self.lambda2 >= 0.0) {
            return Err(CliError::param(format!("--lambda2 must be >= 0, got {}", self.lambda2)));
        }
        if !(self.gas.is_finite() && self.gas >= 0.0) {
            return Err(CliError::param(format!("--gas must be >= 0, got {}", self.gas)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CliError::param(format!("--alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.service_level > 0.0 && self.service_level < 1.0) {
            return Err(CliError::param("--service-level must lie in (0, 1)"));
        }
        if self.k == 0 || self.n < self.k {
            return Err(CliError::param(format!(
                "need 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.s == 0 || self.s > self.big_n {
            return Err(CliError::param(format!(
                "need 1 <= s <= N, got s = {}, N = {}",
                self.s, self.big_n
            )));
        }
        if self.trials == 0 || self.rank_trials == 0 || self.horizon == 0 {
            return Err(CliError::param("--trials, --rank-trials and --horizon must be >= 1"));
        }
        Grid::new(self.grid.min, self.grid.max, self.grid.points).map_err(CliError::param)?;
        Ok(())
    }
}

fn default_grid(command: CommandName, lambda1: f64, lambda_max: f64) -> Result<Grid, CliError> {
    let grid = match command {
        CommandName::Cdf => Grid::new(0.0, 4.0, 201),
        CommandName::Price => Grid::new(0.0, 3.0, 301),
        CommandName::TurboPrice => {
            let headroom = lambda_max - lambda1;
            if headroom <= 0.0 {
                return Err(CliError::param(format!(
                    "--lambda-max {lambda_max} leaves no room above --lambda1 {lambda1}"
                )));
            }
            Grid::new(0.0, headroom, 65)
        }
        CommandName::Multideadline => Grid::new(0.0, 32.0, 33),
        CommandName::Race => Grid::new(0.0, 1.0, 21),
        CommandName::Validate => Grid::new(0.0, 3.0, 300),
    };
    grid.map_err(CliError::param)
}
