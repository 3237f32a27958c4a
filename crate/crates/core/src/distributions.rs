//! Arrival and decoding-time distributions for the four delivery regimes.
//!
//! All rates are aggregate shard rates. The unsharded payload is `k` times
//! larger than a shard, so it arrives as a single event at rate `lambda / k`.
//! Time units are abstract; every CDF depends on `lambda` and `tau` only
//! through the product `lambda * tau`.

use std::fmt;

use crate::error::{domain, Result};
use crate::numeric::{
    binomial_ln_pmf, binomial_tail_ge, invert_cdf, poisson_ln_pmf, poisson_tail_ge,
    CompensatedSum, QUANTILE_TOLERANCE,
};

/// Largest admissible fixed-rate code length, `|GF(2^16)|`.
pub const MAX_CODE_LENGTH: u32 = 1 << 16;

/// Default residual mass at which a Poisson support is truncated.
pub const POISSON_TRUNCATION: f64 = 1e-12;

/// Delivery regime of a payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Unsharded,
    UncodedSharded,
    FixedRate,
    Rateless,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Unsharded,
        Scheme::UncodedSharded,
        Scheme::FixedRate,
        Scheme::Rateless,
    ];

    pub const SHARDED: [Scheme; 3] = [Scheme::UncodedSharded, Scheme::FixedRate, Scheme::Rateless];

    pub fn is_sharded(self) -> bool {
        self != Scheme::Unsharded
    }

    /// Short identifier used in table headers.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Unsharded => "unsharded",
            Scheme::UncodedSharded => "uncoded",
            Scheme::FixedRate => "fixed_rate",
            Scheme::Rateless => "rateless",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One delivery regime with its parameters.
///
/// `n` is meaningful only for [`Scheme::FixedRate`]; the other variants store
/// `n == k`. The unsharded variant keeps `k` so the `lambda / k` normalization
/// stays explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalModel {
    scheme: Scheme,
    k: u32,
    n: u32,
    lambda: f64,
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        domain(format!("rate must be positive and finite, got {lambda}"))
    }
}

fn check_k(k: u32) -> Result<()> {
    if k >= 1 {
        Ok(())
    } else {
        domain("sharding factor k must be at least 1")
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 {
        Ok(())
    } else {
        domain(format!("time must be nonnegative, got {tau}"))
    }
}

impl ArrivalModel {
    pub fn unsharded(k: u32, lambda: f64) -> Result<Self> {
        check_k(k)?;
        check_rate(lambda)?;
        Ok(Self { scheme: Scheme::Unsharded, k, n: k, lambda })
    }

    pub fn uncoded(k: u32, lambda: f64) -> Result<Self> {
        check_k(k)?;
        check_rate(lambda)?;
        Ok(Self { scheme: Scheme::UncodedSharded, k, n: k, lambda })
    }

    pub fn fixed_rate(k: u32, n: u32, lambda: f64) -> Result<Self> {
        check_k(k)?;
        check_rate(lambda)?;
        if n < k {
            return domain(format!("code length n = {n} is below k = {k}"));
        }
        if n > MAX_CODE_LENGTH {
            return domain(format!("code length n = {n} exceeds the field size 2^16"));
        }
        Ok(Self { scheme: Scheme::FixedRate, k, n, lambda })
    }

    pub fn rateless(k: u32, lambda: f64) -> Result<Self> {
        check_k(k)?;
        check_rate(lambda)?;
        Ok(Self { scheme: Scheme::Rateless, k, n: k, lambda })
    }

    /// Builds a model of the given scheme; `n` is ignored unless fixed-rate.
    pub fn new(scheme: Scheme, k: u32, n: u32, lambda: f64) -> Result<Self> {
        match scheme {
            Scheme::Unsharded => Self::unsharded(k, lambda),
            Scheme::UncodedSharded => Self::uncoded(k, lambda),
            Scheme::FixedRate => Self::fixed_rate(k, n, lambda),
            Scheme::Rateless => Self::rateless(k, lambda),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same regime at a different aggregate rate.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.scheme, self.k, self.n, lambda)
    }

    /// `P(X <= tau)` for the decoding time `X`.
    pub fn cdf(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if tau.is_infinite() {
            return Ok(1.0);
        }
        Ok(match self.scheme {
            Scheme::Unsharded => unsharded(tau, self.k, self.lambda),
            Scheme::UncodedSharded => uncoded(tau, self.k, self.lambda),
            Scheme::FixedRate => fixed_rate(tau, self.k, self.n, self.lambda),
            Scheme::Rateless => rateless(tau, self.k, self.lambda),
        })
    }

    /// `E[X]`, used to seed quantile brackets.
    pub fn mean(&self) -> f64 {
        let k = self.k as f64;
        match self.scheme {
            Scheme::Unsharded | Scheme::Rateless => k / self.lambda,
            // Max of k exponentials with rate lambda/k.
            Scheme::UncodedSharded => k / self.lambda * harmonic(self.k as u64),
            // k-th order statistic of n exponentials with rate lambda/n.
            Scheme::FixedRate => {
                let n = self.n as u64;
                self.n as f64 / self.lambda
                    * (harmonic(n) - harmonic(n - self.k as u64))
            }
        }
    }

    /// Time `tau` with `|cdf(tau) - q| <= 1e-10`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        invert_cdf(
            |t| self.cdf(t).unwrap_or(f64::NAN),
            q,
            self.mean(),
            QUANTILE_TOLERANCE,
        )
    }

    /// Distribution of the distinct-shard counting process `S(tau)`.
    pub fn counting(&self, tau: f64) -> Result<CountingPmf> {
        check_tau(tau)?;
        let x = self.lambda * tau;
        let law = match self.scheme {
            Scheme::Unsharded => {
                return domain("unsharded payloads have no shard counting process")
            }
            Scheme::UncodedSharded => CountingLaw::binomial(self.k as u64, x / self.k as f64),
            Scheme::FixedRate => CountingLaw::binomial(self.n as u64, x / self.n as f64),
            Scheme::Rateless => CountingLaw::Poisson { mean: x },
        };
        Ok(CountingPmf { scheme: self.scheme, tau, law })
    }
}

impl fmt::Display for ArrivalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Scheme::FixedRate => write!(
                f,
                "{}(k={}, n={}, lambda={})",
                self.scheme, self.k, self.n, self.lambda
            ),
            _ => write!(f, "{}(k={}, lambda={})", self.scheme, self.k, self.lambda),
        }
    }
}

fn harmonic(m: u64) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).collect::<CompensatedSum>().value()
}

fn unsharded(tau: f64, k: u32, lambda: f64) -> f64 {
    -(-tau * lambda / k as f64).exp_m1()
}

fn uncoded(tau: f64, k: u32, lambda: f64) -> f64 {
    let x = tau * lambda / k as f64;
    if x == 0.0 {
        return 0.0;
    }
    (k as f64 * (-(-x).exp_m1()).ln()).exp()
}

fn rateless(tau: f64, k: u32, lambda: f64) -> f64 {
    poisson_tail_ge(k as u64, lambda * tau)
}

fn fixed_rate(tau: f64, k: u32, n: u32, lambda: f64) -> f64 {
    let x = tau * lambda / n as f64;
    if x == 0.0 {
        return 0.0;
    }
    // Per-shard arrival probability p = 1 - e^{-x}; ln(1 - p) = -x exactly.
    let ln_p = (-(-x).exp_m1()).ln();
    binomial_tail_ge(k as u64, n as u64, ln_p, -x)
}

fn validated(k: u32, lambda: f64, tau: f64) -> Result<()> {
    check_k(k)?;
    check_rate(lambda)?;
    check_tau(tau)
}

/// Unsharded payload: `1 - exp(-tau * lambda / k)`.
pub fn cdf_unsharded(tau: f64, k: u32, lambda: f64) -> Result<f64> {
    ArrivalModel::unsharded(k, lambda)?.cdf(tau)
}

/// Uncoded sharding, decoded at the slowest of `k` shards: `(1 - exp(-tau lambda / k))^k`.
pub fn cdf_uncoded(tau: f64, k: u32, lambda: f64) -> Result<f64> {
    ArrivalModel::uncoded(k, lambda)?.cdf(tau)
}

/// Rateless coding: Erlang-`k` CDF at rate `lambda`.
pub fn cdf_rateless(tau: f64, k: u32, lambda: f64) -> Result<f64> {
    ArrivalModel::rateless(k, lambda)?.cdf(tau)
}

/// Fixed-rate `(n, k)` MDS code: at least `k` of `n` independent shards by `tau`.
pub fn cdf_fixed_rate(tau: f64, k: u32, n: u32, lambda: f64) -> Result<f64> {
    ArrivalModel::fixed_rate(k, n, lambda)?.cdf(tau)
}

/// Erlang CDF that also accepts a zero rate (returns 0), for the fast lane.
pub(crate) fn rateless_or_zero(tau: f64, k: u32, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        check_k(k)?;
        check_tau(tau)?;
        return Ok(0.0);
    }
    validated(k, lambda, tau)?;
    cdf_rateless(tau, k, lambda)
}

/// Law of the counting process at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountingLaw {
    /// `Binomial(trials, p)` with `p = 1 - exp(-x)` stored through `x`
    /// so `ln(1 - p) = -x` stays exact.
    Binomial { trials: u64, x: f64 },
    Poisson { mean: f64 },
}

impl CountingLaw {
    fn binomial(trials: u64, x: f64) -> Self {
        CountingLaw::Binomial { trials, x }
    }

    /// Success probability for the binomial law.
    pub fn success_probability(&self) -> Option<f64> {
        match *self {
            CountingLaw::Binomial { x, .. } => Some(-(-x).exp_m1()),
            CountingLaw::Poisson { .. } => None,
        }
    }

    pub fn ln_pmf(&self, i: u64) -> f64 {
        match *self {
            CountingLaw::Binomial { trials, x } => {
                if x == 0.0 {
                    return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                let ln_p = (-(-x).exp_m1()).ln();
                binomial_ln_pmf(trials, ln_p, -x, i)
            }
            CountingLaw::Poisson { mean } => poisson_ln_pmf(mean, i),
        }
    }

    /// `P(S >= k)`.
    pub fn tail_ge(&self, k: u64) -> f64 {
        match *self {
            CountingLaw::Binomial { trials, x } => {
                if x == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                binomial_tail_ge(k, trials, (-(-x).exp_m1()).ln(), -x)
            }
            CountingLaw::Poisson { mean } => poisson_tail_ge(k, mean),
        }
    }
}

/// `P(S(tau) = i)` for one delivery regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingPmf {
    scheme: Scheme,
    tau: f64,
    law: CountingLaw,
}

impl CountingPmf {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn law(&self) -> CountingLaw {
        self.law
    }

    pub fn pmf(&self, i: u64) -> f64 {
        self.law.ln_pmf(i).exp()
    }

    /// `[P(S = 0), ..., P(S = len - 1)]`.
    pub fn table(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|i| self.pmf(i)).collect()
    }

    /// PMF over the whole support. Binomial supports are finite; a Poisson
    /// support is cut where the cumulative mass reaches `1 - truncation`.
    pub fn support(&self, truncation: f64) -> Vec<f64> {
        match self.law {
            CountingLaw::Binomial { trials, .. } => self.table(trials as usize + 1),
            CountingLaw::Poisson { mean } => {
                let mut out = Vec::new();
                let mut mass = CompensatedSum::new();
                let mut i = 0u64;
                loop {
                    let p = self.pmf(i);
                    out.push(p);
                    mass.add(p);
                    i += 1;
                    if mass.value() >= 1.0 - truncation
                        || (i as f64 > mean && p == 0.0)
                    {
                        break;
                    }
                }
                out
            }
        }
    }
}

/// Convenience wrapper: `P(S(tau) = i)` for `model`.
pub fn counting_pmf(model: &ArrivalModel, tau: f64, i: u64) -> Result<f64> {
    Ok(model.counting(tau)?.pmf(i))
}

/// Quantile of a model's decoding time.
pub fn quantile(model: &ArrivalModel, q: f64) -> Result<f64> {
    model.quantile(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn unsharded_half_life_and_origin() {
        let k = 8;
        let lambda = 3.0;
        let tau = LN_2 * k as f64 / lambda;
        assert_relative_eq!(cdf_unsharded(tau, k, lambda).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(cdf_unsharded(0.0, k, lambda).unwrap(), 0.0);
        assert_relative_eq!(
            cdf_unsharded(20f64.ln(), 32, 32.0).unwrap(),
            0.95,
            epsilon = 1e-14
        );
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(cdf_unsharded(-1.0, 1, 1.0), Err(Error::Domain(_))));
        assert!(cdf_uncoded(1.0, 2, 0.0).is_err());
        assert!(cdf_rateless(1.0, 0, 1.0).is_err());
        assert!(cdf_fixed_rate(1.0, 32, 31, 1.0).is_err());
        assert!(cdf_fixed_rate(1.0, 32, MAX_CODE_LENGTH + 1, 1.0).is_err());
        assert!(cdf_fixed_rate(1.0, 32, MAX_CODE_LENGTH, 1.0).is_ok());
        assert!(cdf_rateless(f64::NAN, 1, 1.0).is_err());
    }

    #[test]
    fn uncoded_examples() {
        assert_eq!(cdf_uncoded(0.0, 4, 2.0).unwrap(), 0.0);
        assert_relative_eq!(
            cdf_uncoded(1.0, 2, 2.0).unwrap(),
            (1.0 - 1.0 / E).powi(2),
            max_relative = 1e-14
        );
        for tau in [0.1, 1.0, 3.0] {
            assert_relative_eq!(
                cdf_uncoded(tau, 1, 1.7).unwrap(),
                cdf_unsharded(tau, 1, 1.7).unwrap(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn rateless_examples() {
        assert_relative_eq!(
            cdf_rateless(1.0, 2, 1.0).unwrap(),
            1.0 - 2.0 / E,
            max_relative = 1e-14
        );
        assert_eq!(cdf_rateless(0.0, 32, 32.0).unwrap(), 0.0);
        for tau in [0.2, 0.9, 4.0] {
            assert_relative_eq!(
                cdf_rateless(tau, 1, 2.5).unwrap(),
                cdf_unsharded(tau, 1, 2.5).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn fixed_rate_reference_value() {
        // 40-digit evaluation of the binomial tail.
        assert_relative_eq!(
            cdf_fixed_rate(1.0, 32, 64, 32.0).unwrap(),
            0.054_164_749_361_853_19,
            max_relative = 1e-12
        );
        assert_eq!(cdf_fixed_rate(0.0, 32, 64, 32.0).unwrap(), 0.0);
    }

    #[test]
    fn fixed_rate_with_n_equal_k_is_uncoded() {
        for i in 0..=60 {
            let tau = i as f64 * 0.15;
            let a = cdf_fixed_rate(tau, 32, 32, 32.0).unwrap();
            let b = cdf_uncoded(tau, 32, 32.0).unwrap();
            assert!((a - b).abs() < 1e-12, "tau={tau}: {a} vs {b}");
        }
    }

    #[test]
    fn counting_pmf_examples() {
        let rateless = ArrivalModel::rateless(32, 2.0).unwrap();
        assert_relative_eq!(
            counting_pmf(&rateless, 0.5, 0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
        let uncoded = ArrivalModel::uncoded(2, 2.0).unwrap();
        let tau = LN_2; // lambda tau / k = ln 2
        assert_relative_eq!(counting_pmf(&uncoded, tau, 2).unwrap(), 0.25, max_relative = 1e-14);
        let fixed = ArrivalModel::fixed_rate(32, 64, 32.0).unwrap();
        assert_relative_eq!(
            counting_pmf(&fixed, 1.0, 10).unwrap(),
            2.532_175_502_513_759e-5,
            max_relative = 1e-11
        );
        let unsharded = ArrivalModel::unsharded(32, 32.0).unwrap();
        assert!(counting_pmf(&unsharded, 1.0, 0).is_err());
    }

    #[test]
    fn poisson_support_is_truncated() {
        let m = ArrivalModel::rateless(32, 32.0).unwrap();
        let support = m.counting(1.0).unwrap().support(POISSON_TRUNCATION);
        let total: f64 = support.iter().sum();
        assert!((total - 1.0).abs() < 1e-11);
        assert!(support.len() < 120);
    }

    #[test]
    fn quantiles() {
        let unsharded = ArrivalModel::unsharded(32, 32.0).unwrap();
        let q = unsharded.quantile(0.95).unwrap();
        assert!((q - 20f64.ln()).abs() < 1e-8);
        let rateless = ArrivalModel::rateless(32, 32.0).unwrap();
        let q = rateless.quantile(0.95).unwrap();
        assert!((1.25..=1.40).contains(&q));
        assert!((q - 1.307_425_949_105_015).abs() < 1e-8);
        assert!(rateless.quantile(1.0).is_err());
        assert!(rateless.quantile(0.0).is_err());
    }

    #[test]
    fn means_match_known_forms() {
        let m = ArrivalModel::uncoded(2, 2.0).unwrap();
        // max of two Exp(1): 1 + 1/2
        assert_relative_eq!(m.mean(), 1.5, max_relative = 1e-15);
        let f = ArrivalModel::fixed_rate(1, 1, 1.0).unwrap();
        assert_relative_eq!(f.mean(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn display_names_parameters() {
        let m = ArrivalModel::fixed_rate(32, 64, 32.0).unwrap();
        assert_eq!(m.to_string(), "fixed_rate(k=32, n=64, lambda=32)");
    }
}
