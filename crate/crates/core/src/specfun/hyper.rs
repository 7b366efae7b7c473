//! Gauss hypergeometric function on the real line left of the branch point.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const SERIES_TERMS: usize = 10_000;
const SLOW_SERIES_TERMS: usize = 2_000_000;
const INTEGER_SLACK: f64 = 1e-12;

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_SLACK
}

fn is_nonpositive_integer(x: f64) -> bool {
    x < 0.5 && is_integer(x)
}

fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Plain Maclaurin series, converging for `|z| < 1` (or terminating).
fn series(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("2F1 parameter c = {c} is a pole")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for n in 0..max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= f64::EPSILON * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Numeric {
        routine: "gauss_2f1",
        message: format!("series for 2F1({a}, {b}; {c}; {z}) did not converge in {max_terms} terms"),
        partial: sum,
        error: term.abs(),
    })
}

/// Expansion around `z = 1`; requires `c - a - b` not an integer.
fn one_minus_z(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let w = 1.0 - z;
    let s = c - a - b;
    let gc = gamma(c);
    let first = gc * gamma(s) * recip_gamma(c - a) * recip_gamma(c - b);
    let second = gc * gamma(-s) * recip_gamma(a) * recip_gamma(b);
    let mut out = 0.0;
    if first != 0.0 {
        out += first * series(a, b, 1.0 - s, w, SERIES_TERMS)?;
    }
    if second != 0.0 {
        out += second * w.powf(s) * series(c - a, c - b, s + 1.0, w, SERIES_TERMS)?;
    }
    Ok(out)
}

/// Expansion around `z = -inf`; requires `a - b` not an integer and `z < 0`.
fn inverse_z(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let inv = 1.0 / z;
    let mz = -z;
    let gc = gamma(c);
    let first = gc * gamma(b - a) * recip_gamma(b) * recip_gamma(c - a);
    let second = gc * gamma(a - b) * recip_gamma(a) * recip_gamma(c - b);
    let mut out = 0.0;
    if first != 0.0 {
        out += first * mz.powf(-a) * series(a, a - c + 1.0, a - b + 1.0, inv, SERIES_TERMS)?;
    }
    if second != 0.0 {
        out += second * mz.powf(-b) * series(b, b - c + 1.0, b - a + 1.0, inv, SERIES_TERMS)?;
    }
    Ok(out)
}

/// Pfaff transformation `z -> z / (z - 1)`, mapping `(-inf, 0)` into `(0, 1)`.
fn pfaff(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> Result<f64> {
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * series(a, c - b, c, w, max_terms)?)
}

/// `2F1(a, b; c; z)` for real `z < 1`.
///
/// `|z| < 0.5` sums the series directly; `-2 <= z <= -0.5` goes through the
/// Pfaff transformation; `z < -2` uses the `1/z` connection formula (or
/// Pfaff when `a - b` is an integer); `0.5 <= z < 1` uses the `1 - z`
/// connection formula.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::domain("2F1 parameters must be finite"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("2F1 parameter c = {c} is a pole")));
    }
    if z.is_nan() || z >= 1.0 {
        return Err(Error::domain(format!("2F1 argument z = {z} outside (-inf, 1)")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z == f64::NEG_INFINITY {
        return Err(Error::domain("2F1 argument must be finite"));
    }
    // terminating series: a polynomial in z
    if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) && z.abs() < 1e6 {
        return series(a, b, c, z, SERIES_TERMS);
    }
    if z.abs() < 0.5 {
        series(a, b, c, z, SERIES_TERMS)
    } else if z > 0.0 {
        if is_integer(c - a - b) {
            series(a, b, c, z, SLOW_SERIES_TERMS)
        } else {
            one_minus_z(a, b, c, z)
        }
    } else if z >= -2.0 {
        pfaff(a, b, c, z, SERIES_TERMS)
    } else if !is_integer(a - b) {
        inverse_z(a, b, c, z)
    } else {
        pfaff(a, b, c, z, SLOW_SERIES_TERMS)
    }
}
