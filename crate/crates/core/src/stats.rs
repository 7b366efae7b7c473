//! Estimators shared by the stochastic simulations.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Point estimate with its standard error.
///
/// Confidence intervals use the normal approximation `estimate ± z * SE`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    /// Number of independent units behind the estimate.
    pub samples: u64,
}

impl EmpiricalEstimate {
    /// Sample mean and standard error of i.i.d. observations.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { estimate: f64::NAN, standard_error: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self { estimate: mean, standard_error: se, samples: n as u64 }
    }

    pub fn ci95(&self) -> (f64, f64) {
        let half = Z95 * self.standard_error;
        (self.estimate - half, self.estimate + half)
    }

    /// Whether `value` lies within `z` standard errors.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.estimate - value).abs() <= z * self.standard_error
    }
}

/// Mergeable accumulator for a ratio estimator `sum(y) / sum(c)` over
/// independent clusters (one cluster per topology), e.g. the mean rate of
/// Case-1 users where each topology contributes `c` users with rate sum `y`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioAccumulator {
    pub clusters: u64,
    sum_c: f64,
    sum_y: f64,
    sum_cc: f64,
    sum_yy: f64,
    sum_cy: f64,
}

impl RatioAccumulator {
    pub fn add_cluster(&mut self, count: f64, total: f64) {
        self.clusters += 1;
        self.sum_c += count;
        self.sum_y += total;
        self.sum_cc += count * count;
        self.sum_yy += total * total;
        self.sum_cy += count * total;
    }

    pub fn merge(&mut self, other: &Self) {
        self.clusters += other.clusters;
        self.sum_c += other.sum_c;
        self.sum_y += other.sum_y;
        self.sum_cc += other.sum_cc;
        self.sum_yy += other.sum_yy;
        self.sum_cy += other.sum_cy;
    }

    pub fn count(&self) -> f64 {
        self.sum_c
    }

    /// Ratio with its linearized (delta-method) standard error.
    pub fn estimate(&self) -> EmpiricalEstimate {
        let k = self.clusters as f64;
        if self.sum_c == 0.0 {
            return EmpiricalEstimate { estimate: f64::NAN, standard_error: f64::NAN, samples: self.clusters };
        }
        let r = self.sum_y / self.sum_c;
        let se = if self.clusters > 1 {
            // residuals e_k = y_k - r c_k
            let ss = self.sum_yy - 2.0 * r * self.sum_cy + r * r * self.sum_cc;
            let cbar = self.sum_c / k;
            (ss.max(0.0) / (k - 1.0) / k).sqrt() / cbar
        } else {
            f64::INFINITY
        };
        EmpiricalEstimate { estimate: r, standard_error: se, samples: self.clusters }
    }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance `level` (0.01 or 0.05 are
/// tabulated exactly; other levels use `sqrt(-ln(level/2)/2)`).
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    let c = if (level - 0.01).abs() < 1e-12 {
        1.6276
    } else if (level - 0.05).abs() < 1e-12 {
        1.3581
    } else {
        (-(level / 2.0).ln() / 2.0).sqrt()
    };
    let n = n as f64;
    // small-sample correction (Stephens)
    c / (n.sqrt() + 0.12 + 0.11 / n.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn sample_mean_and_error() {
        let e = EmpiricalEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.estimate, 2.5);
        assert_relative_eq!(e.standard_error, (5.0f64 / 3.0 / 4.0).sqrt(), max_relative = 1e-14);
        let (lo, hi) = e.ci95();
        assert!(lo < 2.5 && hi > 2.5);
        assert!(EmpiricalEstimate::from_samples(&[]).estimate.is_nan());
    }

    #[test]
    fn ratio_reduces_to_mean_for_unit_clusters() {
        let xs = [0.5, 1.5, 2.0, 4.0, 3.0];
        let mut acc = RatioAccumulator::default();
        for &x in &xs {
            acc.add_cluster(1.0, x);
        }
        let plain = EmpiricalEstimate::from_samples(&xs);
        let ratio = acc.estimate();
        assert_relative_eq!(ratio.estimate, plain.estimate, max_relative = 1e-14);
        assert_relative_eq!(ratio.standard_error, plain.standard_error, max_relative = 1e-12);
    }

    #[test]
    fn merge_equals_sequential_accumulation() {
        let mut a = RatioAccumulator::default();
        let mut b = RatioAccumulator::default();
        let mut all = RatioAccumulator::default();
        for k in 0..10 {
            let (c, y) = (k as f64 + 1.0, (k * k) as f64);
            if k < 4 {
                a.add_cluster(c, y)
            } else {
                b.add_cluster(c, y)
            }
            all.add_cluster(c, y);
        }
        a.merge(&b);
        assert_eq!(a.estimate().estimate, all.estimate().estimate);
        assert_relative_eq!(a.estimate().standard_error, all.estimate().standard_error, max_relative = 1e-12);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        let mut rng = crate::exec::stream_rng(1, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        let crit = ks_critical_value(xs.len(), 0.01);
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) < crit);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        assert!(ks_statistic(&shifted, |x| x.clamp(0.0, 1.0)) > crit);
    }
}
