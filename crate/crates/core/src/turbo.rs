//! Two-lane ("Turbo") decoding: base-lane shards combined with an RLNC fast lane.
//!
//! With a sharded base lane the decoder needs `S1(tau) + S2(tau) >= k`, where
//! `S1` counts distinct base shards and `S2 ~ Poisson(lambda2 * tau)` counts
//! fast-lane shards, all assumed innovative. The two counts are independent.
//! With an unsharded base lane decoding is a race: whichever of the full
//! payload or `k` fast-lane shards arrives first.

use crate::distributions::{rateless_or_zero, ArrivalModel, CountingLaw, Scheme};
use crate::error::{domain, Result};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboModel {
    base: ArrivalModel,
    lambda2: f64,
}

impl TurboModel {
    pub fn new(base: ArrivalModel, lambda2: f64) -> Result<Self> {
        if !(lambda2.is_finite() && lambda2 >= 0.0) {
            return domain(format!("fast-lane rate must be finite and >= 0, got {lambda2}"));
        }
        Ok(Self { base, lambda2 })
    }

    pub fn base(&self) -> &ArrivalModel {
        &self.base
    }

    pub fn lambda1(&self) -> f64 {
        self.base.lambda()
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn k(&self) -> u32 {
        self.base.k()
    }

    pub fn cdf(&self, tau: f64) -> Result<f64> {
        cdf_turbo(tau, self)
    }
}

/// Sharded base: `1 - sum_{i<k} sum_{j<=i} P(S1 = j) P(S2 = i - j)`.
///
/// The double sum is folded to `sum_{j<k} P(S1 = j) P(S2 <= k - 1 - j)`, which
/// touches the same finite index set, so no truncation is involved.
pub fn cdf_turbo_sharded(tau: f64, model: &TurboModel) -> Result<f64> {
    let base = model.base;
    if !base.scheme().is_sharded() {
        return domain("sharded Turbo formula requires a sharded base lane");
    }
    if model.lambda2 == 0.0 {
        return base.cdf(tau);
    }
    if tau.is_infinite() {
        return base.cdf(tau);
    }
    let k = base.k() as usize;
    let base_pmf = base.counting(tau)?.table(k);
    let fast = CountingLaw::Poisson { mean: model.lambda2 * tau };
    let mut fast_cdf = Vec::with_capacity(k);
    let mut acc = CompensatedSum::new();
    for i in 0..k as u64 {
        acc.add(fast.ln_pmf(i).exp());
        fast_cdf.push(acc.value().min(1.0));
    }
    let below: CompensatedSum = base_pmf
        .iter()
        .enumerate()
        .map(|(j, p)| p * fast_cdf[k - 1 - j])
        .collect();
    Ok((1.0 - below.value()).clamp(0.0, 1.0))
}

/// Unsharded base: `1 - (1 - F_unsharded(tau; k, lambda1)) (1 - F_rateless(tau; k, lambda2))`.
pub fn cdf_turbo_unsharded(tau: f64, model: &TurboModel) -> Result<f64> {
    let base = model.base;
    if base.scheme() != Scheme::Unsharded {
        return domain("race formula requires an unsharded base lane");
    }
    let base_cdf = base.cdf(tau)?;
    let fast_cdf = rateless_or_zero(tau, base.k(), model.lambda2)?;
    Ok((1.0 - (1.0 - base_cdf) * (1.0 - fast_cdf)).clamp(0.0, 1.0))
}

/// Decoding-time CDF for either kind of base lane.
pub fn cdf_turbo(tau: f64, model: &TurboModel) -> Result<f64> {
    if model.base.scheme().is_sharded() {
        cdf_turbo_sharded(tau, model)
    } else {
        cdf_turbo_unsharded(tau, model)
    }
}
