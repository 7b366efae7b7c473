//! Average ergodic rates `E[ln(1 + SINR)]` [nats/s/Hz] per access case.
//!
//! All rates use `E[ln(1+X)] = int_0^inf P(X > e^t - 1) dt`; the coverage
//! probability at threshold `v = e^t - 1` is what [`crate::outage`] evaluates
//! at a fixed threshold.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AccessCase, Server};
use crate::model::Tier;
use crate::network::{Network, Regime};
use crate::specfun::{
    kernel_z1, kernel_z2, kernel_z3_weighted, try_integrate, try_integrate_semi_infinite, QuadratureSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// Average ergodic rate [nats/s/Hz].
    pub value: f64,
    pub case: AccessCase,
    pub server: Server,
    pub regime: Regime,
    /// Quadrature error estimate (0 for closed forms).
    pub error: f64,
}

pub(crate) fn require_infrastructure(case: AccessCase, tier: Tier) -> Result<()> {
    if tier == Tier::D2d {
        Err(Error::domain(format!("{case} users are served by a relay or a BS, not over D2D")))
    } else {
        Ok(())
    }
}

/// Coverage of a user at normalized squared distance `u = pi S x^2` from its
/// server, averaged over `u ~ Exp(1)`:
/// `int_0^inf exp(-u * growth - noise_coeff * u^(beta/2)) du`.
///
/// `noise_coeff = v sigma^2 / P_i / (pi S)^(beta/2)`; `growth` collects the
/// interference terms plus one.
pub(crate) fn noisy_coverage(growth: f64, noise_coeff: f64, beta: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if noise_coeff == 0.0 {
        return Ok((1.0 / growth, 0.0));
    }
    if !growth.is_finite() {
        return Ok((0.0, 0.0));
    }
    let half_beta = beta / 2.0;
    // decay scale: whichever of the two exponents bites first
    let scale = (1.0 / growth).min(noise_coeff.powf(-1.0 / half_beta));
    let r = try_integrate_semi_infinite(
        |u| Ok((-u * growth - noise_coeff * u.powf(half_beta)).exp()),
        &spec.with_length_scale(scale),
    )?;
    Ok((r.value, r.error))
}

/// `v sigma^2 / P / (pi S)^(beta/2)` for a server of power `p` seen through an
/// effective density `s`.
pub(crate) fn noise_coefficient(net: &Network, v: f64, p: f64, s: f64) -> f64 {
    let cfg = net.config();
    if cfg.noise == 0.0 || v == 0.0 {
        return 0.0;
    }
    v * cfg.noise / p / (PI * s).powf(cfg.beta / 2.0)
}

/// Case-1 coverage at threshold `v` for a user served by `tier`.
pub(crate) fn coverage_case1(net: &Network, tier: Tier, v: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let cfg = net.config();
    let growth = 1.0 + net.case1_interference_scale() * kernel_z1(v, cfg.beta)?;
    if net.regime() == Regime::InterferenceLimited {
        return Ok((1.0 / growth, 0.0));
    }
    if cfg.density(tier) == 0.0 {
        return Err(Error::domain(format!("tier {} is empty and serves no user", tier.name())));
    }
    let s = net.three_tier().effective_density(tier.index())?;
    noisy_coverage(growth, noise_coefficient(net, v, cfg.power(tier), s), cfg.beta, spec)
}

/// Case-2 coverage at threshold `v` for a cache-enabled user served by `tier`.
pub(crate) fn coverage_case2(net: &Network, tier: Tier, v: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    require_infrastructure(AccessCase::Two, tier)?;
    let cfg = net.config();
    let k = net.d2d_interference_ratio();
    let mut growth = 1.0 + kernel_z1(v, cfg.beta)?;
    if k > 0.0 {
        growth += k * kernel_z2(v, cfg.beta, 0.0)?;
    }
    if net.regime() == Regime::InterferenceLimited {
        return Ok((1.0 / growth, 0.0));
    }
    let s = net.infrastructure().effective_density(tier.index() - 1)?;
    noisy_coverage(growth, noise_coefficient(net, v, cfg.power(tier), s), cfg.beta, spec)
}

/// Case-3 coverage at threshold `v` (interference-limited only).
///
/// `x` is the distance to the nearest cache-enabled user normalized by its
/// largest value compatible with the D2D tier being strongest.
pub(crate) fn coverage_case3(net: &Network, tier: Tier, v: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    require_infrastructure(AccessCase::Three, tier)?;
    if net.regime() == Regime::WithNoise {
        return Err(Error::Unsupported("Case-3 results are only available in the interference-limited regime".into()));
    }
    let beta = net.config().beta;
    let g = net.association(Tier::D2d);
    let k = net.d2d_interference_ratio();
    let base = 1.0 + kernel_z1(v, beta)?;
    if !base.is_finite() {
        return Ok((0.0, 0.0));
    }
    let ratio = g / (1.0 - g);
    let r = try_integrate(
        |x| {
            let mut denom = base + ratio * x * x;
            if k > 0.0 {
                denom += k * kernel_z3_weighted(v, x, beta)?;
            }
            Ok(2.0 * x / (1.0 - g) / (denom * denom))
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok((r.value, r.error))
}

fn ergodic<F>(net: &Network, mut coverage: F) -> Result<(f64, f64)>
where
    F: FnMut(f64, &QuadratureSpec) -> Result<(f64, f64)>,
{
    let spec = *net.quadrature();
    let inner = spec.inner();
    let mut inner_error = 0.0f64;
    let r = try_integrate_semi_infinite(
        |t| {
            let (c, e) = coverage(t.exp_m1(), &inner)?;
            inner_error = inner_error.max(e);
            Ok(c)
        },
        &spec.with_length_scale(2.0),
    )?;
    Ok((r.value, r.error + inner_error))
}

fn result(net: &Network, case: AccessCase, tier: Tier, (value, error): (f64, f64)) -> RateResult {
    RateResult { value, case, server: tier.into(), regime: net.regime(), error }
}

/// Case 1: a user without cache served by its strongest node of `tier`.
pub fn rate_case1(net: &Network, tier: Tier) -> Result<RateResult> {
    let r = ergodic(net, |v, spec| coverage_case1(net, tier, v, spec))?;
    Ok(result(net, AccessCase::One, tier, r))
}

/// Case 2: a cache-enabled user served by the stronger infrastructure tier.
pub fn rate_case2(net: &Network, tier: Tier) -> Result<RateResult> {
    require_infrastructure(AccessCase::Two, tier)?;
    let r = ergodic(net, |v, spec| coverage_case2(net, tier, v, spec))?;
    Ok(result(net, AccessCase::Two, tier, r))
}

/// Case 3: a user without cache whose strongest node is a cache-enabled user
/// lacking the content, served instead by `tier`.
pub fn rate_case3(net: &Network, tier: Tier) -> Result<RateResult> {
    require_infrastructure(AccessCase::Three, tier)?;
    let r = ergodic(net, |v, spec| coverage_case3(net, tier, v, spec))?;
    Ok(result(net, AccessCase::Three, tier, r))
}

/// Case 4: read-out from the user's own cache at the configured rate.
pub fn rate_local(net: &Network) -> RateResult {
    RateResult {
        value: net.config().local_rate_ul,
        case: AccessCase::Four,
        server: Server::Local,
        regime: net.regime(),
        error: 0.0,
    }
}

/// Rate of the `(case, server)` pair, or `None` when the pair never occurs.
pub fn rate_for(net: &Network, case: AccessCase, server: Server) -> Result<Option<RateResult>> {
    let r = match (case, server.tier()) {
        (AccessCase::Four, None) => rate_local(net),
        (AccessCase::One, Some(t)) => rate_case1(net, t)?,
        (AccessCase::Two, Some(t)) if t != Tier::D2d => rate_case2(net, t)?,
        (AccessCase::Three, Some(t)) if t != Tier::D2d => rate_case3(net, t)?,
        _ => return Ok(None),
    };
    Ok(Some(r))
}
