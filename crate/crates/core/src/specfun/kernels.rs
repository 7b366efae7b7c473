//! Interference kernels.
//!
//! All three kernels are scalings of the tail integral
//! `T(l) = int_l^inf du / (1 + u^(beta/2))`, evaluated through `2F1` at a
//! non-positive argument:
//!
//! * `Z1(v)     = v^(2/beta) T(v^(-2/beta))`      (exclusion radius at the serving distance)
//! * `Z2(v; a)  = v^(2/beta) T(a)`                (no exclusion as `a -> 0`)
//! * `x^2 Z3(v; x) = v^(2/beta) T(x^2 v^(-2/beta))` (exclusion at a fraction `x` of it)

use std::f64::consts::PI;

use super::hyper::gauss_2f1;
use crate::error::{Error, Result};

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("interference integral diverges for path-loss exponent {beta} <= 2")))
    }
}

fn check_argument(v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel argument must be >= 0, got {v}")))
    }
}

/// `T(l) = int_l^inf du / (1 + u^(beta/2))` for `l >= 0`.
pub fn tail_integral(lower: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if lower.is_nan() || lower < 0.0 {
        return Err(Error::domain(format!("tail integral lower limit must be >= 0, got {lower}")));
    }
    if lower == 0.0 {
        let theta = 2.0 * PI / beta;
        return Ok(theta / theta.sin());
    }
    if lower.is_infinite() {
        return Ok(0.0);
    }
    let delta = 2.0 / beta;
    let z = -lower.powf(-beta / 2.0);
    if z == 0.0 {
        return Ok(2.0 * lower.powf(1.0 - beta / 2.0) / (beta - 2.0));
    }
    let f = gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, z)?;
    Ok(2.0 * lower.powf(1.0 - beta / 2.0) / (beta - 2.0) * f)
}

/// `Z1(v) = 2v/(beta-2) * 2F1(1, 1-2/beta; 2-2/beta; -v)`.
pub fn kernel_z1(v: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_argument(v)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    if v.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let delta = 2.0 / beta;
    Ok(2.0 * v / (beta - 2.0) * gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -v)?)
}

/// `Z2(v; a) = v^(2/beta) * T(a)`; `a = 0` gives the exact no-exclusion limit
/// `v^(2/beta) (2 pi / beta) / sin(2 pi / beta)`.
pub fn kernel_z2(v: f64, beta: f64, a: f64) -> Result<f64> {
    check_beta(beta)?;
    check_argument(v)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    if v.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(v.powf(2.0 / beta) * tail_integral(a, beta)?)
}

/// `Z3(v; x) = 2v/(beta-2) * x^(-beta) * 2F1(1, 1-2/beta; 2-2/beta; -v x^(-beta))`
/// for `x` in `(0, 1]`.
pub fn kernel_z3(v: f64, x: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_argument(v)?;
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("Z3 normalized distance must lie in (0, 1], got {x}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if v.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let delta = 2.0 / beta;
    let scaled = x.powf(-beta);
    Ok(2.0 * v / (beta - 2.0) * scaled * gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -v * scaled)?)
}

/// `x^2 Z3(v; x)`, which stays finite as `x -> 0` (where it tends to `Z2(v; 0)`).
pub fn kernel_z3_weighted(v: f64, x: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_argument(v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("Z3 normalized distance must lie in [0, 1], got {x}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if v.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let scale = v.powf(2.0 / beta);
    Ok(scale * tail_integral(x * x / scale, beta)?)
}
