use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zipf content popularity over a catalog of `n_contents` items.
///
/// Ranks are 1-based. The mass function and its prefix sums are tabulated
/// once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityModel {
    gamma: f64,
    n_contents: usize,
    normalizer: f64,
    // cumulative[k] = F(1, k); cumulative[0] = 0
    cumulative: Vec<f64>,
}

impl PopularityModel {
    pub fn new(gamma: f64, n_contents: usize) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!("zipf skew must be finite and >= 0, got {gamma}")));
        }
        if n_contents == 0 {
            return Err(Error::domain("catalog must contain at least one content"));
        }
        let weights: Vec<f64> = (1..=n_contents).map(|j| (j as f64).powf(-gamma)).collect();
        let normalizer: f64 = weights.iter().sum();
        let mut cumulative = Vec::with_capacity(n_contents + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc / normalizer);
        }
        // pin the full-support sum so F(1, N) is exactly one
        cumulative[n_contents] = 1.0;
        Ok(Self { gamma, n_contents, normalizer, cumulative })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_contents(&self) -> usize {
        self.n_contents
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    fn check_rank(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_contents {
            return Err(Error::domain(format!("content rank {i} outside 1..={}", self.n_contents)));
        }
        Ok(())
    }

    /// Probability that a request targets the content of rank `i`.
    pub fn mass(&self, i: usize) -> Result<f64> {
        self.check_rank(i)?;
        Ok((i as f64).powf(-self.gamma) / self.normalizer)
    }

    /// `F(a, b) = sum_{i=a..=b} f_i`, zero when `a > b`.
    pub fn prefix(&self, a: usize, b: usize) -> Result<f64> {
        if a > b {
            // a may legitimately be N + 1 here (e.g. F(M2 + 1, N) with M2 = N)
            if a == 0 || b > self.n_contents {
                return Err(Error::domain(format!("invalid popularity range ({a}, {b})")));
            }
            return Ok(0.0);
        }
        self.check_rank(a)?;
        self.check_rank(b)?;
        Ok((self.cumulative[b] - self.cumulative[a - 1]).max(0.0))
    }

    /// Maps a uniform draw in `[0, 1)` to a content rank by inverting the CDF.
    pub fn rank_for_quantile(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.clamp(1, self.n_contents)
    }
}
