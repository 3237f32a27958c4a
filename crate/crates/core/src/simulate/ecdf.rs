/// Sorted sample of decoding times with step-function evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_unstable_by(f64::total_cmp);
        Self { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `#{x_i <= tau} / count`.
    pub fn eval(&self, tau: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&x| x <= tau) as f64 / self.samples.len() as f64
    }

    /// Smallest sample `x` with `eval(x) >= q`.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        if self.samples.is_empty() || !(0.0..=1.0).contains(&q) {
            return None;
        }
        let n = self.samples.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        Some(self.samples[idx])
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Kolmogorov-Smirnov statistic `sup |F_hat - F|`.
///
/// Checked on both sides of every jump, so ties are handled as one step.
pub fn ks_distance<F: Fn(f64) -> f64>(emp: &EmpiricalCdf, analytic: F) -> f64 {
    let xs = emp.samples();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let f = analytic(xs[i]);
        let below = i as f64 / n;
        let above = j as f64 / n;
        d = d.max((f - below).abs()).max((above - f).abs());
        i = j;
    }
    d
}
