use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::ecdf::EmpiricalCdf;
use crate::distributions::{ArrivalModel, Scheme};
use crate::error::Result;
use crate::turbo::TurboModel;

/// Any model the oracle can sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimModel {
    Arrival(ArrivalModel),
    Turbo(TurboModel),
}

impl From<ArrivalModel> for SimModel {
    fn from(m: ArrivalModel) -> Self {
        SimModel::Arrival(m)
    }
}

impl From<TurboModel> for SimModel {
    fn from(m: TurboModel) -> Self {
        SimModel::Turbo(m)
    }
}

impl SimModel {
    /// Closed-form CDF matching this sampler.
    pub fn cdf(&self, tau: f64) -> Result<f64> {
        match self {
            SimModel::Arrival(m) => m.cdf(tau),
            SimModel::Turbo(t) => t.cdf(tau),
        }
    }
}

const BASE_LANE: u64 = 0;
const FAST_LANE: u64 = 1;

fn lane_rng(seed: u64, trial: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 1) | lane);
    rng
}

fn exp<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Sorted times of the first `k` distinct base-lane shard arrivals.
///
/// Uncoded and fixed-rate shards carry independent exponential clocks (one
/// per shard id); rateless shards form a single Poisson stream.
fn base_events<R: Rng>(model: &ArrivalModel, rng: &mut R) -> Vec<f64> {
    let k = model.k() as usize;
    let lambda = model.lambda();
    match model.scheme() {
        Scheme::Unsharded => unreachable!("unsharded payloads have no shard events"),
        Scheme::UncodedSharded => {
            let rate = lambda / k as f64;
            let mut t: Vec<f64> = (0..k).map(|_| exp(rng, rate)).collect();
            t.sort_unstable_by(f64::total_cmp);
            t
        }
        Scheme::FixedRate => {
            let n = model.n() as usize;
            let rate = lambda / n as f64;
            let mut t: Vec<f64> = (0..n).map(|_| exp(rng, rate)).collect();
            if k < n {
                t.select_nth_unstable_by(k - 1, f64::total_cmp);
                t.truncate(k);
            }
            t.sort_unstable_by(f64::total_cmp);
            t
        }
        Scheme::Rateless => poisson_stream(rng, lambda, k),
    }
}

fn poisson_stream<R: Rng>(rng: &mut R, rate: f64, count: usize) -> Vec<f64> {
    let mut now = 0.0;
    (0..count)
        .map(|_| {
            now += exp(rng, rate);
            now
        })
        .collect()
}

/// `k`-th smallest element of the union of two sorted slices.
fn kth_of_merged(a: &[f64], b: &[f64], k: usize) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut last = f64::INFINITY;
    for _ in 0..k {
        let take_a = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x <= y,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return f64::INFINITY,
        };
        if take_a {
            last = a[i];
            i += 1;
        } else {
            last = b[j];
            j += 1;
        }
    }
    last
}

/// Decoding time of trial `trial` under run seed `seed`.
///
/// The base lane always consumes the base stream first and the fast lane has
/// its own stream, so a Turbo model with `lambda2 = 0` reproduces the base
/// sampler path for path.
pub fn sample_trial(model: &SimModel, seed: u64, trial: u64) -> f64 {
    let mut base_rng = lane_rng(seed, trial, BASE_LANE);
    match model {
        SimModel::Arrival(m) => sample_base(m, &mut base_rng),
        SimModel::Turbo(t) => {
            let base = t.base();
            let k = base.k() as usize;
            let lambda2 = t.lambda2();
            if base.scheme() == Scheme::Unsharded {
                let own = sample_base(base, &mut base_rng);
                if lambda2 == 0.0 {
                    return own;
                }
                let mut fast_rng = lane_rng(seed, trial, FAST_LANE);
                let fast: f64 = (0..k).map(|_| exp(&mut fast_rng, lambda2)).sum();
                own.min(fast)
            } else {
                let events = base_events(base, &mut base_rng);
                if lambda2 == 0.0 {
                    return events[k - 1];
                }
                let mut fast_rng = lane_rng(seed, trial, FAST_LANE);
                let fast = poisson_stream(&mut fast_rng, lambda2, k);
                kth_of_merged(&events, &fast, k)
            }
        }
    }
}

fn sample_base<R: Rng>(model: &ArrivalModel, rng: &mut R) -> f64 {
    match model.scheme() {
        Scheme::Unsharded => exp(rng, model.lambda() / model.k() as f64),
        _ => base_events(model, rng)[model.k() as usize - 1],
    }
}

/// One decoding-time draw, i.e. trial 0 of the run keyed by `seed`.
pub fn sample_decode_time(model: &SimModel, seed: u64) -> f64 {
    sample_trial(model, seed, 0)
}

/// Empirical CDF of `trials` independent decoding times.
pub fn empirical_cdf(model: &SimModel, trials: usize, seed: u64) -> EmpiricalCdf {
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| sample_trial(model, seed, i))
        .collect();
    EmpiricalCdf::from_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_order_statistic() {
        let a = [1.0, 4.0, 5.0];
        let b = [2.0, 3.0];
        assert_eq!(kth_of_merged(&a, &b, 1), 1.0);
        assert_eq!(kth_of_merged(&a, &b, 3), 3.0);
        assert_eq!(kth_of_merged(&a, &b, 5), 5.0);
        assert_eq!(kth_of_merged(&a, &[], 2), 4.0);
    }

    #[test]
    fn same_seed_same_path() {
        let m: SimModel = ArrivalModel::fixed_rate(8, 16, 4.0).unwrap().into();
        assert_eq!(sample_decode_time(&m, 9), sample_decode_time(&m, 9));
        assert_ne!(sample_trial(&m, 9, 0), sample_trial(&m, 9, 1));
    }

    #[test]
    fn zero_rate_fast_lane_is_path_identical() {
        for base in [
            ArrivalModel::unsharded(8, 4.0).unwrap(),
            ArrivalModel::uncoded(8, 4.0).unwrap(),
            ArrivalModel::fixed_rate(8, 16, 4.0).unwrap(),
            ArrivalModel::rateless(8, 4.0).unwrap(),
        ] {
            let turbo: SimModel = TurboModel::new(base, 0.0).unwrap().into();
            let plain: SimModel = base.into();
            for trial in 0..50 {
                assert_eq!(sample_trial(&turbo, 3, trial), sample_trial(&plain, 3, trial));
            }
        }
    }

    #[test]
    fn fast_lane_never_slows_decoding() {
        let base = ArrivalModel::uncoded(8, 4.0).unwrap();
        let turbo: SimModel = TurboModel::new(base, 2.0).unwrap().into();
        let plain: SimModel = base.into();
        for trial in 0..200 {
            assert!(sample_trial(&turbo, 5, trial) <= sample_trial(&plain, 5, trial));
        }
    }
}
