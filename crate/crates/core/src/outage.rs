//! Outage probabilities `P(SINR <= tau)` per access case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AccessCase, Server};
use crate::model::Tier;
use crate::network::{Network, Regime};
use crate::rate::{coverage_case1, coverage_case2, coverage_case3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageResult {
    pub probability: f64,
    /// SINR threshold (linear).
    pub tau: f64,
    pub case: AccessCase,
    pub server: Server,
    pub regime: Regime,
    pub error: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau < 0.0 {
        Err(Error::domain(format!("SINR threshold must be >= 0, got {tau}")))
    } else {
        Ok(())
    }
}

fn result(net: &Network, case: AccessCase, server: Server, tau: f64, (cov, error): (f64, f64)) -> OutageResult {
    OutageResult { probability: (1.0 - cov).clamp(0.0, 1.0), tau, case, server, regime: net.regime(), error }
}

pub fn outage_case1(net: &Network, tier: Tier, tau: f64) -> Result<OutageResult> {
    check_tau(tau)?;
    let cov = coverage_case1(net, tier, tau, net.quadrature())?;
    Ok(result(net, AccessCase::One, tier.into(), tau, cov))
}

pub fn outage_case2(net: &Network, tier: Tier, tau: f64) -> Result<OutageResult> {
    check_tau(tau)?;
    let cov = coverage_case2(net, tier, tau, net.quadrature())?;
    Ok(result(net, AccessCase::Two, tier.into(), tau, cov))
}

pub fn outage_case3(net: &Network, tier: Tier, tau: f64) -> Result<OutageResult> {
    check_tau(tau)?;
    let cov = coverage_case3(net, tier, tau, net.quadrature())?;
    Ok(result(net, AccessCase::Three, tier.into(), tau, cov))
}

/// Local read-out never fails.
pub fn outage_local(net: &Network, tau: f64) -> Result<OutageResult> {
    check_tau(tau)?;
    Ok(result(net, AccessCase::Four, Server::Local, tau, (1.0, 0.0)))
}

pub fn outage_for(net: &Network, case: AccessCase, tier: Tier, tau: f64) -> Result<OutageResult> {
    match case {
        AccessCase::One => outage_case1(net, tier, tau),
        AccessCase::Two => outage_case2(net, tier, tau),
        AccessCase::Three => outage_case3(net, tier, tau),
        AccessCase::Four => outage_local(net, tau),
    }
}

/// SINR distribution of `case` users served by `tier`, evaluated on an
/// ascending threshold grid (linear).
pub fn sinr_cdf(net: &Network, case: AccessCase, tier: Tier, taus: &[f64]) -> Result<Vec<OutageResult>> {
    if taus.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("SINR threshold grid must be sorted ascending"));
    }
    taus.iter().map(|&tau| outage_for(net, case, tier, tau)).collect()
}
