use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{dbm_to_watts, PopularityModel};
use crate::error::{Error, Result};

/// Bits per nat.
pub const ETA_NATS_TO_BITS: f64 = 1.443;

/// Transmitting tiers. The numeric index matches the tier numbering used in
/// the closed-form expressions (1 = D2D, 2 = relay, 3 = BS).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    D2d,
    Relay,
    Bs,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::D2d, Tier::Relay, Tier::Bs];
    pub const INFRASTRUCTURE: [Tier; 2] = [Tier::Relay, Tier::Bs];

    /// Zero-based position (0 = D2D).
    pub fn index(self) -> usize {
        match self {
            Tier::D2d => 0,
            Tier::Relay => 1,
            Tier::Bs => 2,
        }
    }

    pub fn from_number(n: usize) -> Result<Tier> {
        match n {
            1 => Ok(Tier::D2d),
            2 => Ok(Tier::Relay),
            3 => Ok(Tier::Bs),
            _ => Err(Error::domain(format!("tier number {n} outside 1..=3"))),
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::D2d => "d2d",
            Tier::Relay => "relay",
            Tier::Bs => "bs",
        }
    }

    /// The other infrastructure tier.
    pub fn other_infrastructure(self) -> Option<Tier> {
        match self {
            Tier::Relay => Some(Tier::Bs),
            Tier::Bs => Some(Tier::Relay),
            Tier::D2d => None,
        }
    }
}

/// Physical and traffic parameters of the three-tier network.
///
/// Powers are in watts, densities in nodes/m², rates in nats/s/Hz.
/// `lambda1 = alpha * lambda0` is always derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lambda0: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub alpha: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub beta: f64,
    pub noise: f64,
    pub bandwidth_w: f64,
    pub n_contents: usize,
    pub content_size_s: f64,
    pub m1: usize,
    pub m2: usize,
    pub gamma: f64,
    pub nu: f64,
    pub bias: f64,
    pub eta: f64,
    pub varsigma: f64,
    pub varrho_inv: f64,
    pub backhaul_kappa: f64,
    pub local_rate_ul: f64,
}

/// Density of `count` nodes per disk of radius 500 m.
pub(crate) fn per_reference_disk(count: f64) -> f64 {
    count / (PI * 500.0 * 500.0)
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            lambda0: per_reference_disk(300.0),
            lambda2: per_reference_disk(5.0),
            lambda3: per_reference_disk(1.0),
            alpha: 0.1,
            p1: dbm_to_watts(23.0),
            p2: dbm_to_watts(33.0),
            p3: dbm_to_watts(43.0),
            beta: 4.0,
            noise: 0.0,
            bandwidth_w: 20e6,
            n_contents: 200,
            content_size_s: 100e6,
            m1: 5,
            m2: 50,
            gamma: 0.8,
            nu: 1.0,
            bias: 1.0,
            eta: ETA_NATS_TO_BITS,
            varsigma: 0.25,
            varrho_inv: 1.0,
            backhaul_kappa: 0.8,
            local_rate_ul: 1e3,
        }
    }
}

impl NetworkConfig {
    /// Default network with the D2D transmit power lowered to 13 dBm.
    pub fn low_power_d2d() -> Self {
        Self { p1: dbm_to_watts(13.0), ..Self::default() }
    }

    /// Denser infrastructure used for the queueing experiments:
    /// densities {300, 30, 6} per 500 m disk, P1 = 13 dBm, alpha = 0.25.
    pub fn queueing_reference() -> Self {
        Self {
            lambda2: per_reference_disk(30.0),
            lambda3: per_reference_disk(6.0),
            alpha: 0.25,
            p1: dbm_to_watts(13.0),
            varsigma: 0.25,
            varrho_inv: 1.0,
            ..Self::default()
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.alpha * self.lambda0
    }

    /// Densities of the three transmitting tiers, D2D first.
    pub fn tier_densities(&self) -> [f64; 3] {
        [self.lambda1(), self.lambda2, self.lambda3]
    }

    pub fn tier_powers(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn power(&self, tier: Tier) -> f64 {
        self.tier_powers()[tier.index()]
    }

    pub fn density(&self, tier: Tier) -> f64 {
        self.tier_densities()[tier.index()]
    }

    pub fn popularity(&self) -> Result<PopularityModel> {
        PopularityModel::new(self.gamma, self.n_contents)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        finite_pos("lambda0", self.lambda0)?;
        finite_pos("lambda2", self.lambda2)?;
        finite_pos("lambda3", self.lambda3)?;
        if !(self.lambda0 > self.lambda2 && self.lambda2 > self.lambda3) {
            return Err(Error::domain(format!(
                "densities must satisfy lambda0 > lambda2 > lambda3 (got {}, {}, {})",
                self.lambda0, self.lambda2, self.lambda3
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        finite_pos("p1", self.p1)?;
        finite_pos("p2", self.p2)?;
        finite_pos("p3", self.p3)?;
        if !(self.beta.is_finite() && self.beta >= 2.0) {
            return Err(Error::domain(format!("path-loss exponent must be >= 2, got {}", self.beta)));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::domain(format!("noise power must be >= 0, got {}", self.noise)));
        }
        finite_pos("bandwidth_w", self.bandwidth_w)?;
        finite_pos("content_size_s", self.content_size_s)?;
        if !(1 <= self.m1 && self.m1 < self.m2 && self.m2 < self.n_contents) {
            return Err(Error::domain(format!(
                "caching capacities must satisfy 1 <= m1 < m2 < n_contents (got {}, {}, {})",
                self.m1, self.m2, self.n_contents
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::domain(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.nu != 1.0 || self.bias != 1.0 {
            return Err(Error::domain("propagation constant and association bias are fixed at 1"));
        }
        finite_pos("eta", self.eta)?;
        if !(self.varsigma.is_finite() && self.varsigma >= 0.0) {
            return Err(Error::domain(format!("varsigma must be >= 0, got {}", self.varsigma)));
        }
        finite_pos("varrho_inv", self.varrho_inv)?;
        if !(self.backhaul_kappa > 0.0 && self.backhaul_kappa < 1.0) {
            return Err(Error::domain(format!("backhaul penalty must lie in (0, 1), got {}", self.backhaul_kappa)));
        }
        finite_pos("local_rate_ul", self.local_rate_ul)?;
        Ok(())
    }
}
