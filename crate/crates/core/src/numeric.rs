//! Log-space building blocks for the Poisson and binomial tails.
//!
//! Shard counts reach `k = 2^10` and `n = 2^16`, so factorials and binomial
//! coefficients never leave log-space. Tails are summed from whichever end
//! holds the smaller probability mass; the other side is obtained as a
//! complement, which keeps tiny CDF values relatively accurate.

use crate::error::{Error, Result};

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

const STIRLING_CUTOVER: u64 = 4096;

/// `ln(m!)`, exact summation below the cutover and the Stirling series above it.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    if m <= STIRLING_CUTOVER {
        return (2..=m).map(|i| (i as f64).ln()).collect::<CompensatedSum>().value();
    }
    let x = m as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// `ln C(n, j)`, accumulated as a product of ratios so no large log-gamma
/// values cancel against each other.
pub fn ln_choose(n: u64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let j = j.min(n - j);
    let base = (n - j) as f64;
    (1..=j)
        .map(|i| ((base + i as f64) / i as f64).ln())
        .collect::<CompensatedSum>()
        .value()
}

/// `ln P(N = i)` for `N ~ Poisson(mean)`.
pub fn poisson_ln_pmf(mean: f64, i: u64) -> f64 {
    if mean == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    i as f64 * mean.ln() - mean - ln_factorial(i)
}

/// `P(N >= k)` for `N ~ Poisson(mean)`, i.e. the Erlang-`k` CDF at `mean = rate * t`.
pub fn poisson_tail_ge(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    if mean.is_infinite() {
        return 1.0;
    }
    if mean < k as f64 {
        // Upper tail from i = k; ratios mean/(i+1) < 1 so terms decrease.
        let ln_first = poisson_ln_pmf(mean, k);
        let mut rel = CompensatedSum::new();
        let mut term = 1.0;
        let mut i = k;
        loop {
            rel.add(term);
            let ratio = mean / (i + 1) as f64;
            term *= ratio;
            i += 1;
            if term * ratio / (1.0 - ratio) <= 1e-17 * rel.value() || term == 0.0 {
                rel.add(term);
                break;
            }
        }
        (ln_first + rel.value().ln()).exp().min(1.0)
    } else {
        let ln_mean = mean.ln();
        let mut lower = CompensatedSum::new();
        let mut ln_term = -mean;
        for i in 0..k {
            lower.add(ln_term.exp());
            ln_term += ln_mean - ((i + 1) as f64).ln();
        }
        (1.0 - lower.value()).clamp(0.0, 1.0)
    }
}

/// `ln P(B = j)` for `B ~ Binomial(n, p)` given `ln p` and `ln(1 - p)`.
pub fn binomial_ln_pmf(n: u64, ln_p: f64, ln_q: f64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let success = if j == 0 { 0.0 } else { j as f64 * ln_p };
    let failure = if j == n { 0.0 } else { (n - j) as f64 * ln_q };
    ln_choose(n, j) + success + failure
}

/// `P(B >= k)` for `B ~ Binomial(n, p)`, with `p` supplied through its logs.
pub fn binomial_tail_ge(k: u64, n: u64, ln_p: f64, ln_q: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || ln_p == f64::NEG_INFINITY {
        return 0.0;
    }
    if ln_q == f64::NEG_INFINITY {
        return 1.0;
    }
    let p = ln_p.exp();
    if (n as f64) * p < k as f64 {
        // Past the mode: terms decrease monotonically from j = k.
        let ln_first = binomial_ln_pmf(n, ln_p, ln_q, k);
        let odds = (ln_p - ln_q).exp();
        let mut rel = CompensatedSum::new();
        let mut term = 1.0;
        let mut j = k;
        while j <= n {
            rel.add(term);
            if j == n {
                break;
            }
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            j += 1;
            if term <= 1e-18 * rel.value() {
                break;
            }
        }
        (ln_first + rel.value().ln()).exp().min(1.0)
    } else {
        let ln_odds = ln_p - ln_q;
        let mut lower = CompensatedSum::new();
        let mut ln_term = n as f64 * ln_q;
        for j in 0..k {
            lower.add(ln_term.exp());
            ln_term += ((n - j) as f64 / (j + 1) as f64).ln() + ln_odds;
        }
        (1.0 - lower.value()).clamp(0.0, 1.0)
    }
}

/// Absolute probability tolerance used by every quantile inversion.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;

const MAX_DOUBLINGS: usize = 256;
const MAX_BISECTIONS: usize = 400;

/// Inverts a continuous nondecreasing CDF on `[0, inf)` by bracketed bisection.
///
/// The upper bracket starts at `scale` and doubles until it covers `q`.
/// Convergence is judged in probability: the returned `t` satisfies
/// `|cdf(t) - q| <= tolerance`.
pub fn invert_cdf<F>(cdf: F, q: f64, scale: f64, tolerance: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
    }
    let mut lo = 0.0;
    let mut hi = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let mut doublings = 0;
    loop {
        let v = cdf(hi);
        if (v - q).abs() <= tolerance {
            return Ok(hi);
        }
        if v > q {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Inversion(format!("no upper bracket for level {q}")));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = cdf(mid);
        if (v - q).abs() <= tolerance {
            return Ok(mid);
        }
        if v < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (best, err) = [lo, hi]
        .into_iter()
        .map(|t| (t, (cdf(t) - q).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");
    if err <= tolerance {
        Ok(best)
    } else {
        Err(Error::Inversion(format!(
            "bisection stalled at t = {best} with residual {err:e} for level {q}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert_relative_eq!(s.value(), 1e-15, max_relative = 1e-12);
    }

    #[test]
    fn ln_factorial_small_and_stirling_agree_at_cutover() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), max_relative = 1e-15);
        let below = ln_factorial(STIRLING_CUTOVER);
        let above = ln_factorial(STIRLING_CUTOVER + 1);
        assert_relative_eq!(
            above - below,
            ((STIRLING_CUTOVER + 1) as f64).ln(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn ln_choose_matches_small_cases() {
        assert_relative_eq!(ln_choose(64, 10).exp(), 151473214816.0, max_relative = 1e-13);
        assert_eq!(ln_choose(10, 0), 0.0);
        assert_eq!(ln_choose(10, 10), 0.0);
        assert_eq!(ln_choose(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn poisson_tail_both_branches() {
        // P(N >= 1) = 1 - e^-mu on either side of the branch point.
        for mu in [0.3, 1.0, 5.0] {
            assert_relative_eq!(poisson_tail_ge(1, mu), -(-mu).exp_m1(), max_relative = 1e-14);
        }
        // Erlang-2 at rate*t = 1.
        assert_relative_eq!(
            poisson_tail_ge(2, 1.0),
            1.0 - 2.0 / std::f64::consts::E,
            max_relative = 1e-14
        );
        assert_eq!(poisson_tail_ge(0, 3.0), 1.0);
        assert_eq!(poisson_tail_ge(4, 0.0), 0.0);
    }

    #[test]
    fn binomial_tail_single_term() {
        let p: f64 = 0.3;
        let v = binomial_tail_ge(4, 4, p.ln(), (1.0 - p).ln());
        assert_relative_eq!(v, p.powi(4), max_relative = 1e-14);
        assert_eq!(binomial_tail_ge(5, 4, p.ln(), (1.0 - p).ln()), 0.0);
    }

    #[test]
    fn invert_exponential() {
        let t = invert_cdf(|t| -(-t).exp_m1(), 0.5, 1.0, QUANTILE_TOLERANCE).unwrap();
        assert!((t - std::f64::consts::LN_2).abs() < 1e-9);
        assert!(invert_cdf(|t| t, 1.0, 1.0, 1e-10).is_err());
        assert!(invert_cdf(|t| t, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn invert_reports_missing_bracket() {
        let err = invert_cdf(|_| 0.2, 0.5, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Inversion(_)));
    }
}
