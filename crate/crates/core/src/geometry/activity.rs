use serde::{Deserialize, Serialize};

use super::tiers::{first_association_probability, TierSpec};
use crate::error::Result;
use crate::model::{NetworkConfig, Tier};

/// Density of cache-enabled users that actually transmit, and the critical
/// caching ratios that shape it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2DActivity {
    /// Active D2D transmitter density `lambda'_1` [nodes/m²].
    pub lambda1_active: f64,
    /// Largest caching ratio at which every cache-enabled user is busy serving.
    pub alpha_star: f64,
    /// Caching ratio maximizing the D2D demand `(1 - alpha) G_{3,1} F(1, M1)`.
    pub alpha_hat: f64,
    /// `sum_{j=2,3} (lambda_j / lambda_0) (P_j / P_1)^(2/beta)`.
    pub h: f64,
}

impl D2DActivity {
    /// Fraction of cache-enabled users that are active (1 when `alpha = 0`).
    pub fn active_fraction(&self, cfg: &NetworkConfig) -> f64 {
        let lambda1 = cfg.lambda1();
        if lambda1 > 0.0 {
            (self.lambda1_active / lambda1).min(1.0)
        } else {
            1.0
        }
    }
}

/// `h` depends only on the infrastructure relative to the users.
pub fn d2d_h(cfg: &NetworkConfig) -> f64 {
    let delta = 2.0 / cfg.beta;
    [Tier::Relay, Tier::Bs].iter().map(|&t| cfg.density(t) / cfg.lambda0 * (cfg.power(t) / cfg.p1).powf(delta)).sum()
}

pub fn active_d2d_density(cfg: &NetworkConfig) -> Result<D2DActivity> {
    cfg.validate()?;
    let popularity = cfg.popularity()?;
    let f = popularity.prefix(1, cfg.m1)?;
    let h = d2d_h(cfg);
    let alpha_star = ((f - h) / (1.0 + f)).max(0.0);
    let alpha_hat = (h * h + h).sqrt() - h;
    let g31 = first_association_probability(&TierSpec::three_tier(cfg)?, Tier::D2d.index())?;
    let supply = cfg.alpha * cfg.lambda0;
    let demand = (1.0 - cfg.alpha) * cfg.lambda0 * g31 * f;
    Ok(D2DActivity { lambda1_active: supply.min(demand), alpha_star, alpha_hat, h })
}
