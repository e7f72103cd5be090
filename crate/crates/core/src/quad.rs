//! Adaptive Gauss-Kronrod quadrature.
//!
//! Every integral in this crate reduces to one dimension. Integrands with an
//! algebraic singularity at the origin or a power-law tail are handled by
//! [`integrate_half_line`], which maps both ends onto bounded, regular
//! integrands before handing them to [`integrate`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and refinement limit for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_max_subdivisions(mut self, limit: usize) -> Self {
        self.max_subdivisions = limit;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
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

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = rescale_error((kronrod - gauss) * half, res_abs * half.abs(), res_asc * half.abs());
    (kronrod * half, err)
}

/// Globally adaptive quadrature of `f` over the finite interval `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the total
/// estimate falls under `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    while heap.len() < cfg.max_subdivisions {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    let intervals = heap.len();
    if !value.is_finite() {
        return Err(Error::Quadrature {
            intervals,
            error_estimate: f64::NAN,
        });
    }
    if error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        return Err(Error::Quadrature {
            intervals,
            error_estimate: error,
        });
    }
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// A nonnegative integrand on `[0, end)` given through its logarithm.
///
/// `log_q(r, ln_r)` receives both `r` and `ln r` so that callers never have
/// to recover `ln r` from an underflowed `r`. The integrand is expected to
/// behave like `r^(origin_exponent - 1)` near zero and, when `end` is
/// infinite, like `r^(-tail_exponent - 1)` at infinity (use any positive
/// `tail_exponent`, e.g. `1.0`, for tails that decay faster than a power).
pub struct PowerIntegrand<F> {
    pub log_q: F,
    pub origin_exponent: f64,
    pub tail_exponent: f64,
    pub end: f64,
    /// Split point between the origin and tail maps for infinite `end`.
    pub scale: f64,
}

/// Integrates a [`PowerIntegrand`] over `[0, end)`.
///
/// On `[0, S]` the substitution `r = S u^(1/g0)` absorbs the origin power, and
/// on `[S, inf)` the substitution `r = S w^(-1/g1)` maps the tail onto `(0, 1]`
/// with a bounded integrand.
pub fn integrate_half_line<F>(q: &PowerIntegrand<F>, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let g0 = q.origin_exponent;
    if !(g0 > 0.0) {
        return Err(Error::domain(
            "origin exponent",
            g0,
            "> 0, integrand not integrable at 0",
        ));
    }
    let split = if q.end.is_finite() { q.end } else { q.scale };
    let ln_split = split.ln();
    let ln_jac0 = (split / g0).ln();
    let head = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let ln_u = u.ln();
            let ln_r = ln_split + ln_u / g0;
            let v = (q.log_q)(ln_r.exp(), ln_r) + ln_jac0 + (1.0 / g0 - 1.0) * ln_u;
            v.exp()
        },
        0.0,
        1.0,
        cfg,
    )?
    .value;
    if q.end.is_finite() {
        return Ok(head);
    }
    let g1 = q.tail_exponent;
    if !(g1 > 0.0) {
        return Err(Error::domain(
            "tail exponent",
            g1,
            "> 0, integrand not integrable at infinity",
        ));
    }
    let ln_jac1 = (split / g1).ln();
    let tail = integrate(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let ln_w = w.ln();
            let ln_r = ln_split - ln_w / g1;
            let v = (q.log_q)(ln_r.exp(), ln_r) + ln_jac1 - (1.0 / g1 + 1.0) * ln_w;
            v.exp()
        },
        0.0,
        1.0,
        cfg,
    )?
    .value;
    Ok(head + tail)
}
