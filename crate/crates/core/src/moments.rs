//! Numerical certification of moment log-concavity.
//!
//! Two curves are computed on a uniform `p`-grid:
//!
//! * for a scalar `s`-concave `phi` on the half line, the normalized moment
//!   `ln int_0^inf t^(p-1) phi(t) dt - ln N_s(p)`, where `N_s` is either the
//!   Beta/Gamma normalizer of the regime or the moment of the extremal
//!   function `phi_s` (the two differ by `p ln|s|`, which is affine);
//! * for an `s`-concave density, `sum_i ln(p + i s) + ln int f^p`.
//!
//! Log-concavity is then certified by discrete second differences.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Family, ScalarSConcaveFn};
use crate::quad::{integrate_half_line, PowerIntegrand, QuadConfig};
use crate::report::fmt_sig;
use crate::special::{ln_beta, ln_gamma};

/// Relative standoff kept from every open domain endpoint.
pub const DOMAIN_STANDOFF: f64 = 0.01;

/// Default grid spacing.
pub const DEFAULT_STEP: f64 = 0.05;

/// Default second-difference tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Positive,
    Zero,
    Negative,
}

impl Regime {
    pub fn of(s: f64) -> Self {
        if s > 0.0 {
            Regime::Positive
        } else if s == 0.0 {
            Regime::Zero
        } else {
            Regime::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// `B(p, 1/s + 1)`, `Gamma(p)` or `B(p, -1/s - p)` by regime.
    Standard,
    /// `int_0^inf t^(p-1) phi_s(t) dt`, so that `phi_s` itself gives the zero curve.
    Extremal,
    /// `1 / ((p + s)...(p + n s))` applied to `int f^p` of the peak-normalized density.
    PowerProduct,
    /// Synthetic curves supplied directly.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub grid: Vec<f64>,
    pub log_m: Vec<f64>,
    pub s: f64,
    pub regime: Regime,
    pub normalizer: Normalizer,
    pub label: String,
}

impl MomentCurve {
    /// Wraps externally produced values (used for synthetic certification checks).
    pub fn from_values(grid: Vec<f64>, log_m: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if grid.len() != log_m.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: log_m.len(),
            });
        }
        if log_m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("curve values must be finite".into()));
        }
        Ok(MomentCurve {
            grid,
            log_m,
            s: f64::NAN,
            regime: Regime::Zero,
            normalizer: Normalizer::None,
            label: label.into(),
        })
    }

    /// Raw second differences `logM[i+1] - 2 logM[i] + logM[i-1]` at interior points.
    pub fn second_differences(&self) -> Vec<f64> {
        self.log_m.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect()
    }

    /// `p,logM,second_difference` with empty second differences at the endpoints.
    pub fn to_csv(&self) -> String {
        let d2 = self.second_differences();
        let mut out = String::from("p,logM,second_difference\n");
        for (i, (p, m)) in self.grid.iter().zip(&self.log_m).enumerate() {
            let d = if i == 0 || i + 1 == self.grid.len() {
                String::new()
            } else {
                fmt_sig(d2[i - 1])
            };
            let _ = writeln!(out, "{},{},{d}", fmt_sig(*p), fmt_sig(*m));
        }
        out
    }
}

/// `start, start + step, ...` up to and including `stop` (within rounding).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParams(format!(
            "grid needs start < stop and step > 0 (got {start}, {stop}, {step})"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Admissible open interval of `p` for a scalar `s`-concave function.
pub fn scalar_domain(s: f64) -> (f64, f64) {
    if s < 0.0 {
        (0.0, -1.0 / s)
    } else {
        (0.0, f64::INFINITY)
    }
}

/// Admissible open interval of `p` for an `s`-concave density in dimension `n`.
pub fn density_domain(n: usize, s: f64) -> (f64, f64) {
    ((-(n as f64) * s).max(0.0), f64::INFINITY)
}

/// Uniform grid on `[lo, hi]` shrunk by the relative standoff from finite open endpoints.
pub fn standoff_grid(domain: (f64, f64), lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let (a, b) = domain;
    let width = if b.is_finite() { b - a } else { a.max(1.0) };
    let lo = lo.max(a + DOMAIN_STANDOFF * width);
    let hi = if b.is_finite() {
        hi.min(b - DOMAIN_STANDOFF * width)
    } else {
        hi
    };
    uniform_grid(lo, hi, step)
}

fn check_domain(grid: &[f64], (lo, hi): (f64, f64)) -> Result<()> {
    for &p in grid {
        if !(p > lo && p < hi) {
            return Err(Error::domain("p", p, format!("{lo} < p < {hi}")));
        }
    }
    Ok(())
}

fn ln_normalizer(kind: Normalizer, s: f64, p: f64) -> f64 {
    let standard = match Regime::of(s) {
        Regime::Positive => ln_beta(p, 1.0 / s + 1.0),
        Regime::Zero => ln_gamma(p),
        Regime::Negative => ln_beta(p, -1.0 / s - p),
    };
    match kind {
        Normalizer::Extremal if s != 0.0 => standard - p * s.abs().ln(),
        _ => standard,
    }
}

/// `ln int_0^end t^(p-1) phi(t) dt`.
pub fn ln_scalar_moment(phi: &ScalarSConcaveFn, p: f64, cfg: &QuadConfig) -> Result<f64> {
    let tail_exponent = match phi.tail_decay {
        Some(d) if phi.support_end.is_infinite() => {
            if d <= p {
                return Err(Error::domain("p", p, format!("p < {d} for an integrable moment")));
            }
            d - p
        }
        _ => 1.0,
    };
    let q = PowerIntegrand {
        log_q: |t: f64, ln_t: f64| (p - 1.0) * ln_t + phi.log_phi(t),
        origin_exponent: p,
        tail_exponent,
        end: phi.support_end,
        scale: 1.0,
    };
    Ok(integrate_half_line(&q, cfg)?.ln())
}

/// Normalized one-dimensional moment curve of an `s`-concave `phi`.
pub fn scalar_moment_curve(
    phi: &ScalarSConcaveFn,
    grid: &[f64],
    normalizer: Normalizer,
    cfg: &QuadConfig,
) -> Result<MomentCurve> {
    if !matches!(normalizer, Normalizer::Standard | Normalizer::Extremal) {
        return Err(Error::InvalidParams(format!(
            "normalizer {normalizer:?} does not apply to scalar curves"
        )));
    }
    check_domain(grid, scalar_domain(phi.s))?;
    phi.check_concavity(1000)?;
    let log_m = grid
        .par_iter()
        .map(|&p| Ok(ln_scalar_moment(phi, p, cfg)? - ln_normalizer(normalizer, phi.s, p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentCurve {
        grid: grid.to_vec(),
        log_m,
        s: phi.s,
        regime: Regime::of(phi.s),
        normalizer,
        label: phi.label.clone(),
    })
}

/// `p -> sum_i ln(p + i s) + ln int f^p` for an `s`-concave family (density scaled to peak one).
pub fn density_moment_curve(family: &Family, s: f64, grid: &[f64], cfg: &QuadConfig) -> Result<MomentCurve> {
    let declared = family.s_concavity();
    if s > declared + 1e-12 {
        return Err(Error::InvalidParams(format!(
            "{} is only declared {declared}-concave, not {s}-concave",
            family.name()
        )));
    }
    let n = family.dim();
    check_domain(grid, density_domain(n, s))?;
    let log_m = grid
        .par_iter()
        .map(|&p| {
            let prefactor: f64 = (1..=n).map(|i| (p + i as f64 * s).ln()).sum();
            Ok(prefactor + family.ln_shape_power_integral(p, cfg)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentCurve {
        grid: grid.to_vec(),
        log_m,
        s,
        regime: Regime::of(s),
        normalizer: Normalizer::PowerProduct,
        label: family.spec().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pass: bool,
    pub tolerance: f64,
    pub max_second_difference: f64,
    /// Grid value at which the largest second difference occurs.
    pub worst_p: f64,
    pub violations: usize,
    /// Every second difference is strictly negative.
    pub strictly_concave: bool,
}

/// Passes iff every second difference of `logM` is at most `tolerance`.
pub fn certify_log_concavity(curve: &MomentCurve, tolerance: f64) -> Result<Certificate> {
    let g = &curve.grid;
    if g.len() < 3 {
        return Err(Error::NonUniformGrid);
    }
    let h = g[1] - g[0];
    if !(h > 0.0) || g.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(Error::NonUniformGrid);
    }
    let d2 = curve.second_differences();
    let (worst_i, worst) = d2.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
    );
    Ok(Certificate {
        pass: worst <= tolerance,
        tolerance,
        max_second_difference: worst,
        worst_p: g[worst_i + 1],
        violations: d2.iter().filter(|&&v| v > tolerance).count(),
        strictly_concave: d2.iter().all(|&v| v < 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{ConvexParams, HomogeneousFamily, StudentFamily};
    use crate::special::NormKind;

    #[test]
    fn exponential_is_flat() {
        let grid = uniform_grid(0.1, 10.0, DEFAULT_STEP).unwrap();
        let c = scalar_moment_curve(
            &ScalarSConcaveFn::extremal(0.0),
            &grid,
            Normalizer::Standard,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!(c.log_m.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn triangle_moment_is_beta() {
        // int_0^1 t^(p-1) (1-t) dt = B(p, 2)
        let grid = uniform_grid(0.1, 10.0, DEFAULT_STEP).unwrap();
        let c = scalar_moment_curve(
            &ScalarSConcaveFn::extremal(1.0),
            &grid,
            Normalizer::Standard,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!(c.log_m.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn truncated_square_is_log_concave() {
        let phi = ScalarSConcaveFn::truncated_power(2.0);
        let grid = uniform_grid(0.1, 10.0, DEFAULT_STEP).unwrap();
        let c = scalar_moment_curve(&phi, &grid, Normalizer::Standard, &QuadConfig::default()).unwrap();
        let cert = certify_log_concavity(&c, 1e-8).unwrap();
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn negative_regime_domain() {
        let phi = ScalarSConcaveFn::extremal(-0.25);
        assert!(scalar_moment_curve(&phi, &[1.0, 2.0, 4.0], Normalizer::Standard, &QuadConfig::default()).is_err());
        let grid = standoff_grid(scalar_domain(-0.25), 0.0, 4.0, 0.05).unwrap();
        assert!(grid[0] > 0.0 && *grid.last().unwrap() < 4.0);
        let c = scalar_moment_curve(&phi, &grid, Normalizer::Extremal, &QuadConfig::default()).unwrap();
        assert!(c.log_m.iter().all(|v| v.abs() < 1e-8), "{:?}", c.log_m);
        // the standard normalizer differs by the affine term -p ln|s|
        let std = scalar_moment_curve(&phi, &grid, Normalizer::Standard, &QuadConfig::default()).unwrap();
        for (p, v) in grid.iter().zip(&std.log_m) {
            assert!((v + p * 0.25f64.ln()).abs() < 1e-8);
        }
    }

    #[test]
    fn triangle_density_curve() {
        // n=1, s=1, f=(1-|x|)_+: (p+1) int f^p = 2
        let fam = Family::Homogeneous(HomogeneousFamily::new(1, 1.0, NormKind::L1, 1.0).unwrap());
        let grid = uniform_grid(0.05, 5.0, 0.05).unwrap();
        let c = density_moment_curve(&fam, 1.0, &grid, &QuadConfig::default()).unwrap();
        assert!(c.log_m.iter().all(|v| (v - 2f64.ln()).abs() < 1e-10));
    }

    #[test]
    fn density_curve_rejects_stronger_concavity() {
        let fam = Family::Student(StudentFamily::new(ConvexParams::new(1, 5.0).unwrap()));
        assert!(density_moment_curve(&fam, 0.0, &[1.0, 1.1, 1.2], &QuadConfig::default()).is_err());
        // below the domain p > -n s
        assert!(density_moment_curve(&fam, -0.2, &[0.1, 0.3, 0.5], &QuadConfig::default()).is_err());
    }

    #[test]
    fn certificate_on_synthetic_curves() {
        let grid = uniform_grid(0.0, 2.0, 0.1).unwrap();
        let affine =
            MomentCurve::from_values(grid.clone(), grid.iter().map(|p| 3.0 - 0.5 * p).collect(), "affine").unwrap();
        let cert = certify_log_concavity(&affine, DEFAULT_TOLERANCE).unwrap();
        assert!(cert.pass && cert.max_second_difference.abs() < 1e-14);

        let convex = MomentCurve::from_values(grid.clone(), grid.iter().map(|p| p * p).collect(), "convex").unwrap();
        let cert = certify_log_concavity(&convex, DEFAULT_TOLERANCE).unwrap();
        assert!(!cert.pass);
        assert_eq!(cert.violations, grid.len() - 2);

        let uneven = MomentCurve::from_values(vec![0.0, 0.1, 0.3], vec![0.0; 3], "uneven").unwrap();
        assert_eq!(certify_log_concavity(&uneven, 1e-7), Err(Error::NonUniformGrid));
        let short = MomentCurve::from_values(vec![0.0, 0.1], vec![0.0; 2], "short").unwrap();
        assert_eq!(certify_log_concavity(&short, 1e-7), Err(Error::NonUniformGrid));
    }

    #[test]
    fn csv_layout() {
        let grid = uniform_grid(1.0, 1.2, 0.1).unwrap();
        let c = MomentCurve::from_values(grid, vec![0.0, 1.0, 1.5], "x").unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "p,logM,second_difference");
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2], "1.1,1,-0.5");
        assert_eq!(lines.len(), 4);
    }
}
