//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! The 21 Kronrod abscissae are all interior points, so integrands that are
//! singular or undefined exactly at an endpoint (Z3 at x = 0, the rational
//! map at s = 1) are never evaluated there.

// Node and weight tables are kept at their published precision.
#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_795_055_225,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// How `[0, inf)` is reduced to a finite range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationPolicy {
    /// `x = L * s / (1 - s)` with `s` in `[0, 1)`.
    Map,
    /// Integrate `[0, T]` where `T` is grown until `|f(T)| * T` drops below
    /// the absolute tolerance; that bound is added to the error estimate.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub truncation: TruncationPolicy,
    /// Characteristic length of the integrand on `[0, inf)`; only used by the
    /// semi-infinite routines.
    pub length_scale: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            truncation: TruncationPolicy::Map,
            length_scale: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn with_length_scale(self, length_scale: f64) -> Self {
        Self { length_scale, ..self }
    }

    /// Spec for the inner integral of a nested pair: one order tighter.
    pub fn inner(&self) -> Self {
        Self { rel_tol: self.rel_tol * 0.1, abs_tol: self.abs_tol * 0.1, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be > 0"));
        }
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(Error::domain("quadrature length scale must be finite and > 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Numeric {
            routine: "quadrature",
            message: format!("integrand is not finite at x = {x:e} (value {y})"),
            partial: f64::NAN,
            error: f64::INFINITY,
        })
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut res_gauss = 0.0;
    let mut res_kronrod = fc * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let y1 = eval(f, center - dx)?;
        let y2 = eval(f, center + dx)?;
        fv1[k] = y1;
        fv2[k] = y2;
        res_gauss += WG[j] * (y1 + y2);
        res_kronrod += WGK[k] * (y1 + y2);
        res_abs += WGK[k] * (y1.abs() + y2.abs());
    }
    for j in 0..5 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let y1 = eval(f, center - dx)?;
        let y2 = eval(f, center + dx)?;
        fv1[k] = y1;
        fv2[k] = y2;
        res_kronrod += WGK[k] * (y1 + y2);
        res_abs += WGK[k] * (y1.abs() + y2.abs());
    }
    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for k in 0..10 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let abs_half = half.abs();
    let result = res_kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

/// Adaptive integration of a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("finite-range quadrature needs finite limits"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (value, error) = gk21(&mut f, a, b)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    // segments too narrow to split further, kept out of the heap
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;
    let mut subdivisions = 1;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Numeric {
                routine: "quadrature",
                message: format!("no convergence after {subdivisions} subdivisions on [{a:e}, {b:e}]"),
                partial: total,
                error: total_err,
            });
        }
        let Some(seg) = heap.pop() else {
            // every remaining segment is at machine resolution
            if frozen_err <= target.max(1e3 * f64::EPSILON * total.abs()) {
                break;
            }
            return Err(Error::Numeric {
                routine: "quadrature",
                message: "roundoff prevents reaching the requested tolerance".into(),
                partial: total,
                error: total_err,
            });
        };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            frozen_err += seg.error;
            frozen_value += seg.value;
            continue;
        }
        let (v1, e1) = gk21(&mut f, seg.a, mid)?;
        let (v2, e2) = gk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    // re-sum to shed cancellation accumulated in the running total
    let value = heap.iter().map(|s| s.value).sum::<f64>() + frozen_value;
    Ok(Integral { value, error: total_err.max(0.0), evaluations })
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, spec)
}

/// Integral of a fallible integrand over `[0, inf)`.
pub fn try_integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    let scale = spec.length_scale;
    match spec.truncation {
        TruncationPolicy::Map => try_integrate(
            |s| {
                let one_minus = 1.0 - s;
                let x = scale * s / one_minus;
                let y = f(x)?;
                if y == 0.0 {
                    // avoid 0 * inf when x overflows
                    return Ok(0.0);
                }
                Ok(y * scale / (one_minus * one_minus))
            },
            0.0,
            1.0,
            spec,
        ),
        TruncationPolicy::Truncate => {
            let mut upper = scale;
            let mut tail = f(upper)?.abs() * upper;
            let mut doublings = 0;
            while tail > 0.1 * spec.abs_tol {
                doublings += 1;
                if doublings > 200 {
                    return Err(Error::Numeric {
                        routine: "quadrature",
                        message: "integrand does not decay; truncation point not found".into(),
                        partial: f64::NAN,
                        error: tail,
                    });
                }
                upper *= 2.0;
                tail = f(upper)?.abs() * upper;
            }
            let mut body = try_integrate(&mut f, 0.0, upper, spec)?;
            body.error += tail;
            Ok(body)
        }
    }
}

pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), spec)
}
