//! Closed-form concentration bounds for `-1/beta`-concave densities.
//!
//! With `c(alpha) = -sum_i ln((1 - alpha) beta - i)` the normalized moment
//! `exp(-c(alpha)) E f(X)^(-alpha)` is log-concave, which gives
//!
//! ```text
//! psi_c(alpha) = c(alpha) - c(0) - c'(0) alpha
//!              = -alpha beta sum_i 1/(beta - i) - sum_i ln(((1 - alpha) beta - i)/(beta - i))
//! ```
//!
//! for `alpha < 1 - n/beta`. As `beta -> inf` the profile tends to the
//! log-concave one, `n(-alpha - ln(1 - alpha))`, which is carried here as a
//! separate variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Concavity, ConvexParams};
use crate::roots::solve_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviationProfile {
    Convex(ConvexParams),
    LogConcave { n: usize },
}

impl From<ConvexParams> for DeviationProfile {
    fn from(p: ConvexParams) -> Self {
        DeviationProfile::Convex(p)
    }
}

impl From<Concavity> for DeviationProfile {
    fn from(c: Concavity) -> Self {
        match c {
            Concavity::Convex(p) => DeviationProfile::Convex(p),
            Concavity::LogConcave { n } => DeviationProfile::LogConcave { n },
        }
    }
}

impl DeviationProfile {
    pub fn n(&self) -> usize {
        match self {
            DeviationProfile::Convex(p) => p.n(),
            DeviationProfile::LogConcave { n } => *n,
        }
    }

    /// Supremum of the admissible `alpha`.
    pub fn alpha_max(&self) -> f64 {
        match self {
            DeviationProfile::Convex(p) => p.alpha_max(),
            DeviationProfile::LogConcave { .. } => 1.0,
        }
    }

    /// `c'(0) = beta sum_i 1/(beta - i)`: the mean slope, which is also the
    /// supremum of the lower deviation `h - h~`.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            DeviationProfile::Convex(p) => {
                let b = p.beta();
                b * (1..=p.n()).map(|i| 1.0 / (b - i as f64)).sum::<f64>()
            }
            DeviationProfile::LogConcave { n } => *n as f64,
        }
    }

    pub fn check_alpha(&self, alpha: f64) -> Result<()> {
        if !alpha.is_finite() || alpha >= self.alpha_max() {
            return Err(Error::domain("alpha", alpha, format!("alpha < {}", self.alpha_max())));
        }
        Ok(())
    }

    /// Terms `beta/((1 - alpha) beta - i)` for `i = 1..n` (all `1/(1-alpha)` in the log-concave limit).
    fn terms(&self, alpha: f64) -> impl Iterator<Item = f64> + '_ {
        let (n, beta) = match self {
            DeviationProfile::Convex(p) => (p.n(), Some(p.beta())),
            DeviationProfile::LogConcave { n } => (*n, None),
        };
        (1..=n).map(move |i| match beta {
            Some(b) => b / ((1.0 - alpha) * b - i as f64),
            None => 1.0 / (1.0 - alpha),
        })
    }

    /// `c(alpha) = -sum_i ln((1 - alpha) beta - i)`; `-n ln(1 - alpha)` in the log-concave limit.
    pub fn c(&self, alpha: f64) -> f64 {
        match self {
            DeviationProfile::Convex(p) => {
                let b = p.beta();
                -(1..=p.n()).map(|i| ((1.0 - alpha) * b - i as f64).ln()).sum::<f64>()
            }
            DeviationProfile::LogConcave { n } => -(*n as f64) * (-alpha).ln_1p(),
        }
    }

    pub fn c_prime(&self, alpha: f64) -> f64 {
        self.terms(alpha).sum()
    }

    pub fn c_second(&self, alpha: f64) -> f64 {
        self.terms(alpha).map(|x| x * x).sum()
    }

    /// `sum_i ln(((1 - alpha) beta - i)/(beta - i))`, evaluated with `ln_1p`.
    pub(crate) fn log_ratio_sum(&self, alpha: f64) -> f64 {
        match self {
            DeviationProfile::Convex(p) => {
                let b = p.beta();
                (1..=p.n()).map(|i| (-alpha * b / (b - i as f64)).ln_1p()).sum()
            }
            DeviationProfile::LogConcave { n } => *n as f64 * (-alpha).ln_1p(),
        }
    }

    /// `psi_c(alpha)`; no domain check.
    pub fn psi_unchecked(&self, alpha: f64) -> f64 {
        -alpha * self.slope_at_zero() - self.log_ratio_sum(alpha)
    }

    pub fn psi(&self, alpha: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(self.psi_unchecked(alpha))
    }

    pub fn psi_prime(&self, alpha: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(self.c_prime(alpha) - self.slope_at_zero())
    }

    pub fn psi_second(&self, alpha: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(self.c_second(alpha))
    }

    /// Solves `c'(alpha) = level` on `(0, alpha_max)` for `level > c'(0)`.
    pub(crate) fn solve_positive_slope(&self, level: f64) -> Result<f64> {
        let amax = self.alpha_max();
        let mut gap = 0.5 * amax;
        let mut hi = amax - gap;
        while self.c_prime(hi) < level {
            gap *= 0.5;
            hi = amax - gap;
            if gap < amax * 1e-300 || hi >= amax {
                return Err(Error::Solver(format!("could not bracket slope level {level}")));
            }
        }
        let root = solve_increasing(|a| self.c_prime(a), |a| self.c_second(a), 0.0, hi, level)?;
        Ok(root.x)
    }

    /// Solves `c'(alpha) = level` on `(-inf, 0)` for `0 < level < c'(0)`.
    pub(crate) fn solve_negative_slope(&self, level: f64) -> Result<f64> {
        let mut lo = -1.0;
        while self.c_prime(lo) > level {
            lo *= 2.0;
            if lo < -1e300 {
                return Err(Error::Solver(format!("could not bracket slope level {level}")));
            }
        }
        let root = solve_increasing(|a| self.c_prime(a), |a| self.c_second(a), lo, 0.0, level)?;
        Ok(root.x)
    }
}

/// `psi_c(alpha)` for `alpha < 1 - n/beta`.
pub fn psi_c(params: &ConvexParams, alpha: f64) -> Result<f64> {
    DeviationProfile::Convex(*params).psi(alpha)
}

/// Exponent of the MGF bound `E exp(alpha (h~ - h)) <= exp(psi_c(alpha))`.
pub fn log_mgf_normalized(params: &ConvexParams, alpha: f64) -> Result<f64> {
    psi_c(params, alpha)
}

fn harmonic(params: &ConvexParams, power: i32) -> f64 {
    let b = params.beta();
    (1..=params.n()).map(|i| (b - i as f64).powi(-power)).sum()
}

/// Sharp varentropy bound `beta^2 sum_i (beta - i)^(-2)`.
pub fn varentropy_bound(params: &ConvexParams) -> f64 {
    params.beta().powi(2) * harmonic(params, 2)
}

/// `tr(Sigma) beta^2 / n^2 * sum_i (beta - i)^(-2) * J`; requires `beta > n + 2`.
pub fn fisher_varentropy_bound(params: &ConvexParams, trace_sigma: f64, fisher_info: f64) -> Result<f64> {
    params.require_covariance()?;
    if !(trace_sigma > 0.0) || !trace_sigma.is_finite() {
        return Err(Error::domain("trace_sigma", trace_sigma, "trace_sigma > 0"));
    }
    if !(fisher_info >= 0.0) || !fisher_info.is_finite() {
        return Err(Error::domain("fisher_info", fisher_info, "fisher_info >= 0"));
    }
    let n = params.n() as f64;
    Ok(trace_sigma * varentropy_bound(params) / (n * n) * fisher_info)
}

/// `h(X) <= -ln ||f||_inf + beta sum_i 1/(beta - i)`.
pub fn entropy_upper_bound(params: &ConvexParams, max_density: f64) -> Result<f64> {
    if !(max_density > 0.0) || !max_density.is_finite() {
        return Err(Error::domain("max_density", max_density, "max_density > 0"));
    }
    Ok(-max_density.ln() + params.beta() * harmonic(params, 1))
}

/// Outcome of the small-ball estimate `P(f(X) >= c0^n ||f||_inf) >= 1 - c1^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallResult {
    pub c0: f64,
    pub alpha_star: f64,
    pub c1: f64,
    /// Deviation level `t = -n ln c0 - beta sum_i 1/(beta - i)`.
    pub t: f64,
    /// `sum_i beta/((1 - alpha*) beta - i) + n ln c0`.
    pub residual: f64,
}

impl SmallBallResult {
    /// `P(f(X) <= c0^n ||f||_inf) <= c1^n`.
    pub fn probability_bound(&self, n: usize) -> f64 {
        self.c1.powi(n as i32)
    }
}

pub fn small_ball(params: &ConvexParams, c0: f64) -> Result<SmallBallResult> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::domain("c0", c0, "0 < c0 < 1"));
    }
    let profile = DeviationProfile::Convex(*params);
    let n = params.n() as f64;
    let level = -n * c0.ln();
    let mean_slope = profile.slope_at_zero();
    if level <= mean_slope {
        return Err(Error::domain(
            "c0",
            c0,
            format!(
                "c0 too large: need n ln c0 < -beta sum 1/(beta-i), i.e. c0 < {}",
                (-mean_slope / n).exp()
            ),
        ));
    }
    let alpha_star = profile.solve_positive_slope(level)?;
    let residual = profile.c_prime(alpha_star) - level;
    let ln_c1 = alpha_star * c0.ln() - profile.log_ratio_sum(alpha_star) / n;
    Ok(SmallBallResult {
        c0,
        alpha_star,
        c1: ln_c1.exp(),
        t: level - mean_slope,
        residual,
    })
}
