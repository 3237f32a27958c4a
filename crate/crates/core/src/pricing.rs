//! Mean-field price bounds and fast-lane revenue maximization.
//!
//! A node paying `price` per shard at `rate` shards per unit time spends
//! `price * rate`, and in the mean-field model that spend cannot exceed its
//! expected utility. The fast lane sells extra RLNC rate on top of a fixed
//! base lane; its price is bounded by the utility increment it creates.

use rayon::prelude::*;

use crate::distributions::ArrivalModel;
use crate::error::{domain, Error, Result};
use crate::turbo::TurboModel;

/// A per-shard price paired with a delivery rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRatePair {
    pub price: f64,
    pub rate: f64,
}

impl PriceRatePair {
    pub fn new(price: f64, rate: f64) -> Result<Self> {
        if !(price.is_finite() && price >= 0.0) {
            return domain(format!("price must be finite and >= 0, got {price}"));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return domain(format!("rate must be finite and > 0, got {rate}"));
        }
        Ok(Self { price, rate })
    }

    /// Spend per unit time.
    pub fn expenditure(&self) -> f64 {
        self.price * self.rate
    }

    /// Whether the pair respects `price * rate <= utility + slack`.
    pub fn is_feasible(&self, expected_utility: f64, slack: f64) -> bool {
        self.expenditure() <= expected_utility + slack
    }
}

/// `E[U] = r * F_X(tau)` for a single deadline/reward pair.
pub fn expected_utility_single(cdf_value: f64, reward: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cdf_value) {
        return domain(format!("CDF value {cdf_value} outside [0, 1]"));
    }
    if !(reward.is_finite() && reward >= 0.0) {
        return domain(format!("reward must be finite and >= 0, got {reward}"));
    }
    Ok(reward * cdf_value)
}

/// Largest feasible per-shard price, `E[U] / lambda`.
pub fn price_bound(expected_utility: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return domain(format!("price bound needs a positive rate, got {lambda}"));
    }
    if !expected_utility.is_finite() {
        return domain("expected utility must be finite");
    }
    Ok(expected_utility / lambda)
}

/// Fast-lane pricing problem on top of a fixed base lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastLaneProblem {
    base: ArrivalModel,
    lambda_max: f64,
    tau: f64,
    reward: f64,
}

impl FastLaneProblem {
    pub fn new(base: ArrivalModel, lambda_max: f64, tau: f64, reward: f64) -> Result<Self> {
        if !(lambda_max.is_finite() && base.lambda() <= lambda_max) {
            return domain(format!(
                "base rate {} exceeds the rate cap {lambda_max}",
                base.lambda()
            ));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return domain(format!("deadline must be positive, got {tau}"));
        }
        if !(reward.is_finite() && reward > 0.0) {
            return domain(format!("reward must be positive, got {reward}"));
        }
        Ok(Self { base, lambda_max, tau, reward })
    }

    pub fn base(&self) -> &ArrivalModel {
        &self.base
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    /// Fast-lane rate still available under the cap.
    pub fn headroom(&self) -> f64 {
        self.lambda_max - self.base.lambda()
    }

    /// `r * F_{X1}(tau)`, the utility without a fast lane.
    pub fn base_utility(&self) -> Result<f64> {
        Ok(self.reward * self.base.cdf(self.tau)?)
    }

    /// `r * F_{X2}(tau)` with fast-lane rate `lambda2`.
    pub fn turbo_utility(&self, lambda2: f64) -> Result<f64> {
        let turbo = TurboModel::new(self.base, lambda2)?;
        Ok(self.reward * turbo.cdf(self.tau)?)
    }

    /// `r * [F_{X2}(tau) - F_{X1}(tau)]`, the most the node would pay per unit time.
    pub fn revenue(&self, lambda2: f64) -> Result<f64> {
        self.check_rate(lambda2)?;
        Ok((self.turbo_utility(lambda2)? - self.base_utility()?).max(0.0))
    }

    fn check_rate(&self, lambda2: f64) -> Result<()> {
        if !(lambda2.is_finite() && lambda2 > 0.0) {
            return domain(format!("fast-lane rate must be positive, got {lambda2}"));
        }
        // Relative slack so grid endpoints computed by division stay admissible.
        if self.base.lambda() + lambda2 > self.lambda_max * (1.0 + 1e-12) {
            return domain(format!(
                "lambda1 + lambda2 = {} exceeds the cap {}",
                self.base.lambda() + lambda2,
                self.lambda_max
            ));
        }
        Ok(())
    }
}

/// Per-shard fast-lane price bound `r [F_{X2}(tau) - F_{X1}(tau)] / lambda2`.
pub fn fast_lane_price_bound(problem: &FastLaneProblem, lambda2: f64) -> Result<f64> {
    Ok(problem.revenue(lambda2)? / lambda2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Number of positive rates scanned in `(0, headroom]`.
    pub grid_points: usize,
    /// Slack allowed on the feasibility check `p * lambda <= E[U]`.
    pub feasibility_slack: f64,
    /// Tolerance on the monotonicity check of the revenue curve.
    pub monotone_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grid_points: 256, feasibility_slack: 1e-9, monotone_tolerance: 1e-12 }
    }
}

/// How the optimizer arrived at its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// Revenue was nondecreasing on the grid: full headroom at the bound price.
    ClosedForm,
    /// Revenue was not monotone: best grid point.
    GridArgmax,
    /// No positive price anywhere on the grid.
    NoRevenue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastLaneSolution {
    pub price: f64,
    /// `None` when no rate earns revenue.
    pub lambda2: Option<f64>,
    pub revenue: f64,
    pub kind: SolutionKind,
    /// Largest revenue seen on the scan grid.
    pub grid_max: f64,
}

impl FastLaneSolution {
    pub fn pair(&self) -> Option<PriceRatePair> {
        self.lambda2.map(|rate| PriceRatePair { price: self.price, rate })
    }
}

/// Revenue on the scan grid `headroom * i / points`, `i = 1..=points`.
pub fn revenue_curve(problem: &FastLaneProblem, points: usize) -> Result<Vec<(f64, f64)>> {
    if points == 0 {
        return domain("revenue grid needs at least one point");
    }
    let headroom = problem.headroom();
    (1..=points)
        .into_par_iter()
        .map(|i| {
            let lambda2 = if i == points { headroom } else { headroom * i as f64 / points as f64 };
            problem.revenue(lambda2).map(|rev| (lambda2, rev))
        })
        .collect()
}

/// Maximizes fast-lane revenue `p2 * lambda2` subject to the price bound and the rate cap.
///
/// The closed form (use all headroom, price at the bound) is taken only when the
/// revenue curve is verified nondecreasing on the grid; otherwise the grid
/// argmax is returned, lowest rate winning ties.
pub fn optimize_fast_lane(
    problem: &FastLaneProblem,
    config: &OptimizerConfig,
) -> Result<FastLaneSolution> {
    let headroom = problem.headroom();
    if headroom <= 0.0 {
        return Err(Error::Infeasible(format!(
            "base rate {} leaves no headroom under the cap {}",
            problem.base.lambda(),
            problem.lambda_max
        )));
    }
    let curve = revenue_curve(problem, config.grid_points)?;
    let (best_rate, grid_max) = curve
        .iter()
        .copied()
        .fold((curve[0].0, curve[0].1), |best, cur| if cur.1 > best.1 { cur } else { best });
    if grid_max <= 0.0 {
        return Ok(FastLaneSolution {
            price: 0.0,
            lambda2: None,
            revenue: 0.0,
            kind: SolutionKind::NoRevenue,
            grid_max,
        });
    }
    let monotone = curve
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - config.monotone_tolerance);
    let (lambda2, kind) = if monotone {
        (headroom, SolutionKind::ClosedForm)
    } else {
        (best_rate, SolutionKind::GridArgmax)
    };
    let price = fast_lane_price_bound(problem, lambda2)?;
    let revenue = price * lambda2;
    let increment = problem.revenue(lambda2)?;
    debug_assert!(revenue <= increment + config.feasibility_slack);
    Ok(FastLaneSolution { price, lambda2: Some(lambda2), revenue, kind, grid_max })
}
