use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    active_d2d_density, first_association_probability, state_matrix, D2DActivity, StateMatrix, TierSpec,
};
use crate::model::{NetworkConfig, PopularityModel, Tier};
use crate::specfun::QuadratureSpec;

/// Whether thermal noise enters the SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    WithNoise,
    InterferenceLimited,
}

/// A validated configuration together with the association quantities every
/// analytic result depends on.
#[derive(Debug, Clone)]
pub struct Network {
    cfg: NetworkConfig,
    popularity: PopularityModel,
    three_tier: TierSpec,
    infrastructure: TierSpec,
    activity: D2DActivity,
    states: StateMatrix,
    quadrature: QuadratureSpec,
}

impl Network {
    pub fn new(cfg: NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            popularity: cfg.popularity()?,
            three_tier: TierSpec::three_tier(&cfg)?,
            infrastructure: TierSpec::infrastructure(&cfg)?,
            activity: active_d2d_density(&cfg)?,
            states: state_matrix(&cfg)?,
            quadrature: QuadratureSpec::default(),
            cfg,
        })
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        self.quadrature = spec;
        Ok(self)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn popularity(&self) -> &PopularityModel {
        &self.popularity
    }

    pub fn activity(&self) -> &D2DActivity {
        &self.activity
    }

    pub fn states(&self) -> &StateMatrix {
        &self.states
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quadrature
    }

    pub fn three_tier(&self) -> &TierSpec {
        &self.three_tier
    }

    pub fn infrastructure(&self) -> &TierSpec {
        &self.infrastructure
    }

    pub fn regime(&self) -> Regime {
        if self.cfg.noise > 0.0 {
            Regime::WithNoise
        } else {
            Regime::InterferenceLimited
        }
    }

    /// `G_{3,i}`: probability that `tier` is the strongest of all three tiers.
    pub fn association(&self, tier: Tier) -> f64 {
        first_association_probability(&self.three_tier, tier.index()).expect("three-tier index is always valid")
    }

    /// `P_{i,j}`: probability that `tier` is the stronger infrastructure tier.
    pub fn infrastructure_association(&self, tier: Tier) -> Result<f64> {
        match tier {
            Tier::Relay => first_association_probability(&self.infrastructure, 0),
            Tier::Bs => first_association_probability(&self.infrastructure, 1),
            Tier::D2d => Err(Error::domain("D2D is not an infrastructure tier")),
        }
    }

    /// Ratio of interfering to association-competing weight for a user that may
    /// associate over D2D: `1 - G_{3,1} + (lambda'_1 / lambda_1) G_{3,1}`.
    pub fn case1_interference_scale(&self) -> f64 {
        let g = self.association(Tier::D2d);
        1.0 - g + self.activity.active_fraction(&self.cfg) * g
    }

    /// Active D2D weight relative to the infrastructure weight,
    /// `lambda'_1 / (lambda_0 h)`.
    pub fn d2d_interference_ratio(&self) -> f64 {
        self.activity.lambda1_active / (self.cfg.lambda0 * self.activity.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interference_scale_is_one_below_alpha_star() {
        let net = Network::new(NetworkConfig { alpha: 0.05, ..NetworkConfig::default() }).unwrap();
        assert_relative_eq!(net.case1_interference_scale(), 1.0, epsilon = 1e-15);
        let net = Network::new(NetworkConfig { alpha: 0.5, ..NetworkConfig::default() }).unwrap();
        assert!(net.case1_interference_scale() < 1.0);
    }

    #[test]
    fn association_probabilities_sum_to_one() {
        let net = Network::new(NetworkConfig::default()).unwrap();
        let total: f64 = Tier::ALL.iter().map(|&t| net.association(t)).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
        let infra =
            net.infrastructure_association(Tier::Relay).unwrap() + net.infrastructure_association(Tier::Bs).unwrap();
        assert_relative_eq!(infra, 1.0, epsilon = 1e-15);
        assert_eq!(net.regime(), Regime::InterferenceLimited);
    }
}
