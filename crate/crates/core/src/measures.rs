//! Density families: multivariate Pareto, homogeneous `f_{s,U}` families,
//! radial Student-type densities and the standard Gaussian, plus scalar
//! s-concave test functions on the half line.
//!
//! Every family is radial in some gauge `r(x)` (the coordinate sum, a norm,
//! or the Euclidean length), with a log-density of the form
//! `ln f(x) = ln ||f||_inf - gap(r(x))` and a gauge shell measure
//! `|{r <= rho}| = C rho^n`. All integrals over `R^n` therefore reduce to
//! one-dimensional quadrature in `r`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_half_line, PowerIntegrand, QuadConfig};
use crate::special::{ln_beta, ln_factorial, ln_gamma, ln_unit_ball_volume, NormKind};

/// Dimension `n` and concavity exponent `beta` of a `-1/beta`-concave density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexParams {
    n: usize,
    beta: f64,
}

impl ConvexParams {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension n must be positive".into()));
        }
        if !beta.is_finite() || beta <= n as f64 {
            return Err(Error::InvalidParams(format!(
                "beta must exceed n (got n={n}, beta={beta})"
            )));
        }
        Ok(ConvexParams { n, beta })
    }

    /// Parameters from the measure exponent `kappa < 0`, via `beta = n - 1/kappa`.
    pub fn from_kappa(n: usize, kappa: f64) -> Result<Self> {
        if !(kappa < 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParams(format!(
                "kappa must be negative and finite, got {kappa}"
            )));
        }
        Self::new(n, n as f64 - 1.0 / kappa)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `kappa = -1/(beta - n)`.
    pub fn kappa(&self) -> f64 {
        -1.0 / (self.beta - self.n as f64)
    }

    /// Right end of the MGF domain, `1 - n/beta`.
    pub fn alpha_max(&self) -> f64 {
        1.0 - self.n as f64 / self.beta
    }

    /// Fails unless `beta > n + 2`, the range in which the covariance exists.
    pub fn require_covariance(&self) -> Result<()> {
        if self.beta <= self.n as f64 + 2.0 {
            return Err(Error::InvalidParams(format!(
                "beta must exceed n + 2 for the covariance to exist (got n={}, beta={})",
                self.n, self.beta
            )));
        }
        Ok(())
    }
}

/// Density proportional to `(a + x_1 + ... + x_n)^(-beta)` on the closed positive orthant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoFamily {
    pub params: ConvexParams,
    pub a: f64,
}

impl ParetoFamily {
    pub fn new(params: ConvexParams, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParams(format!("scale a must be positive, got {a}")));
        }
        Ok(ParetoFamily { params, a })
    }

    /// `ln Z_n(a, beta) = (n - beta) ln a + ln B(n, beta - n) - ln (n-1)!`.
    pub fn ln_normalizer(&self) -> f64 {
        let n = self.params.n as f64;
        let b = self.params.beta;
        (n - b) * self.a.ln() + ln_beta(n, b - n) - ln_factorial(self.params.n - 1)
    }

    /// `h = -ln ||f||_inf + beta * sum_i 1/(beta - i)`; the Pareto law attains
    /// the entropy bound with equality.
    pub fn closed_form_entropy(&self) -> f64 {
        let b = self.params.beta;
        let harmonic: f64 = (1..=self.params.n).map(|i| 1.0 / (b - i as f64)).sum();
        self.a.ln() * b + self.ln_normalizer() + b * harmonic
    }
}

/// The extremal family `f_{s,U} = (1 - sU)_+^(1/s)` (`e^{-U}` for `s = 0`)
/// with `U = c * ||x||_q`. Stored unnormalized; the density divides by its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousFamily {
    pub n: usize,
    pub s: f64,
    pub norm: NormKind,
    pub norm_scale: f64,
}

impl HomogeneousFamily {
    pub fn new(n: usize, s: f64, norm: NormKind, norm_scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension n must be positive".into()));
        }
        if !(norm_scale > 0.0) || !norm_scale.is_finite() {
            return Err(Error::InvalidParams(format!(
                "norm_scale must be positive, got {norm_scale}"
            )));
        }
        if !s.is_finite() || 1.0 + n as f64 * s <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "f_(s,U) is integrable only for s > -1/n (got n={n}, s={s})"
            )));
        }
        Ok(HomogeneousFamily { n, s, norm, norm_scale })
    }

    /// The potential `U(x) = c ||x||_q`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        self.norm_scale * self.norm.norm(x)
    }

    /// `ln C_U`, the log-volume of `{U <= 1}`.
    pub fn ln_level_volume(&self) -> f64 {
        ln_unit_ball_volume(self.n, self.norm) - self.n as f64 * self.norm_scale.ln()
    }

    /// `ln int f_{s,U}^p = ln(C_U n!) - sum_i ln(p + i s)`.
    pub fn ln_power_integral_identity(&self, p: f64) -> f64 {
        let prod: f64 = (1..=self.n).map(|i| (p + i as f64 * self.s).ln()).sum();
        self.ln_level_volume() + ln_factorial(self.n) - prod
    }

    /// Log of the total mass of the unnormalized shape.
    pub fn ln_mass(&self) -> f64 {
        self.ln_power_integral_identity(1.0)
    }

    /// Parameters of the `-1/beta`-concave reading when `s < 0`.
    pub fn convex_params(&self) -> Option<ConvexParams> {
        if self.s < 0.0 {
            ConvexParams::new(self.n, -1.0 / self.s).ok()
        } else {
            None
        }
    }
}

/// Density proportional to `(1 + |x|^2)^(-beta)` on `R^n`; `-1/beta`-concave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentFamily {
    pub params: ConvexParams,
}

impl StudentFamily {
    pub fn new(params: ConvexParams) -> Self {
        StudentFamily { params }
    }

    /// `ln int (1 + |x|^2)^(-beta) dx = (n/2) ln pi + ln Gamma(beta - n/2) - ln Gamma(beta)`.
    pub fn ln_normalizer(&self) -> f64 {
        let h = 0.5 * self.params.n as f64;
        let b = self.params.beta;
        h * PI.ln() + ln_gamma(b - h) - ln_gamma(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFamily {
    pub n: usize,
}

/// How strongly concave a family is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Concavity {
    /// `-1/beta`-concave with `beta > n`.
    Convex(ConvexParams),
    /// Log-concave (including every `s`-concave density with `s >= 0`).
    LogConcave { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Pareto(ParetoFamily),
    Homogeneous(HomogeneousFamily),
    Student(StudentFamily),
    Gaussian(GaussianFamily),
}

/// The one-dimensional reduction of a family, in its gauge variable `r`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialForm {
    pub n: usize,
    /// `ln(n C)` where `|{r <= rho}| = C rho^n`; the shell measure is `n C r^(n-1) dr`.
    pub ln_shell: f64,
    pub ln_peak: f64,
    pub end: f64,
    /// `f(r) ~ r^(-decay)` at infinity, `None` for faster-than-power decay.
    pub decay: Option<f64>,
    pub scale: f64,
    gap: Gap,
}

#[derive(Debug, Clone, Copy)]
enum Gap {
    Pareto { beta: f64, a: f64 },
    Homogeneous { s: f64 },
    Student { beta: f64 },
    Gaussian,
}

impl RadialForm {
    /// `ln ||f||_inf - ln f(r)`; infinite outside the support.
    pub fn gap(&self, r: f64) -> f64 {
        match self.gap {
            Gap::Pareto { beta, a } => beta * (r / a).ln_1p(),
            Gap::Homogeneous { s } => {
                if s == 0.0 {
                    r
                } else if s > 0.0 && s * r >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-s * r).ln_1p() / s
                }
            }
            Gap::Student { beta } => beta * (r * r).ln_1p(),
            Gap::Gaussian => 0.5 * r * r,
        }
    }

    pub fn ln_density(&self, r: f64) -> f64 {
        self.ln_peak - self.gap(r)
    }

    /// `ln int f^p dx` with `f` scaled to peak one (the shape).
    pub fn ln_shape_power_integral(&self, p: f64, cfg: &QuadConfig) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::domain("p", p, "p > 0"));
        }
        let nf = self.n as f64;
        let tail_exponent = match self.decay {
            Some(d) => {
                let g = d * p - nf;
                if g <= 0.0 {
                    return Err(Error::domain(
                        "p",
                        p,
                        format!("p > {} for integrability of f^p", nf / d),
                    ));
                }
                g
            }
            None => 1.0,
        };
        let q = PowerIntegrand {
            log_q: |r: f64, ln_r: f64| (nf - 1.0) * ln_r - p * self.gap(r),
            origin_exponent: nf,
            tail_exponent,
            end: self.end,
            scale: self.scale,
        };
        let v = integrate_half_line(&q, cfg)?;
        Ok(self.ln_shell + v.ln())
    }

    /// Differential entropy by quadrature, `h = -ln ||f||_inf + E[gap(r)]`.
    pub fn entropy(&self, cfg: &QuadConfig) -> Result<f64> {
        let nf = self.n as f64;
        let tail_exponent = match self.decay {
            Some(d) if d > nf => d - nf,
            Some(_) => return Err(Error::InvalidParams("density is not integrable".into())),
            None => 1.0,
        };
        let q = PowerIntegrand {
            log_q: |r: f64, ln_r: f64| {
                let g = self.gap(r);
                (nf - 1.0) * ln_r - g + g.ln()
            },
            origin_exponent: nf,
            tail_exponent,
            end: self.end,
            scale: self.scale,
        };
        let expected_gap = (self.ln_shell + self.ln_peak).exp() * integrate_half_line(&q, cfg)?;
        Ok(expected_gap - self.ln_peak)
    }
}

impl Family {
    pub fn dim(&self) -> usize {
        match self {
            Family::Pareto(f) => f.params.n,
            Family::Homogeneous(f) => f.n,
            Family::Student(f) => f.params.n,
            Family::Gaussian(f) => f.n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Pareto(_) => "pareto",
            Family::Homogeneous(_) => "homogeneous",
            Family::Student(_) => "student",
            Family::Gaussian(_) => "gaussian",
        }
    }

    pub fn concavity(&self) -> Concavity {
        match self {
            Family::Pareto(f) => Concavity::Convex(f.params),
            Family::Student(f) => Concavity::Convex(f.params),
            Family::Homogeneous(f) => match f.convex_params() {
                Some(p) => Concavity::Convex(p),
                None => Concavity::LogConcave { n: f.n },
            },
            Family::Gaussian(f) => Concavity::LogConcave { n: f.n },
        }
    }

    /// The largest `s` for which the density is declared `s`-concave.
    pub fn s_concavity(&self) -> f64 {
        match self {
            Family::Pareto(f) => -1.0 / f.params.beta,
            Family::Student(f) => -1.0 / f.params.beta,
            Family::Homogeneous(f) => f.s,
            Family::Gaussian(_) => 0.0,
        }
    }

    /// Families attaining the varentropy and MGF bounds of their profile with equality.
    pub fn is_equality_case(&self) -> bool {
        match self {
            Family::Pareto(_) => true,
            Family::Homogeneous(f) => f.s <= 0.0,
            _ => false,
        }
    }

    pub(crate) fn radial(&self) -> RadialForm {
        match *self {
            Family::Pareto(f) => RadialForm {
                n: f.params.n,
                ln_shell: -ln_factorial(f.params.n - 1),
                ln_peak: -f.params.beta * f.a.ln() - f.ln_normalizer(),
                end: f64::INFINITY,
                decay: Some(f.params.beta),
                scale: f.a,
                gap: Gap::Pareto {
                    beta: f.params.beta,
                    a: f.a,
                },
            },
            Family::Homogeneous(f) => RadialForm {
                n: f.n,
                ln_shell: (f.n as f64).ln() + f.ln_level_volume(),
                ln_peak: -f.ln_mass(),
                end: if f.s > 0.0 { 1.0 / f.s } else { f64::INFINITY },
                decay: if f.s < 0.0 { Some(-1.0 / f.s) } else { None },
                scale: 1.0,
                gap: Gap::Homogeneous { s: f.s },
            },
            Family::Student(f) => RadialForm {
                n: f.params.n,
                ln_shell: (f.params.n as f64).ln() + ln_unit_ball_volume(f.params.n, NormKind::L2),
                ln_peak: -f.ln_normalizer(),
                end: f64::INFINITY,
                decay: Some(2.0 * f.params.beta),
                scale: 1.0,
                gap: Gap::Student { beta: f.params.beta },
            },
            Family::Gaussian(f) => RadialForm {
                n: f.n,
                ln_shell: (f.n as f64).ln() + ln_unit_ball_volume(f.n, NormKind::L2),
                ln_peak: -0.5 * f.n as f64 * (2.0 * PI).ln(),
                end: f64::INFINITY,
                decay: None,
                scale: (f.n as f64).sqrt(),
                gap: Gap::Gaussian,
            },
        }
    }

    /// Gauge value of `x`, or `None` outside the support.
    fn gauge(&self, x: &[f64]) -> Option<f64> {
        match self {
            Family::Pareto(_) => {
                if x.iter().any(|&v| v < 0.0 || v.is_nan()) {
                    None
                } else {
                    Some(x.iter().sum())
                }
            }
            Family::Homogeneous(f) => Some(f.potential(x)),
            Family::Student(_) | Family::Gaussian(_) => Some(NormKind::L2.norm(x)),
        }
    }

    /// `ln f(x)` for the normalized density; `-inf` outside the support.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self.gauge(x) {
            Some(r) => self.radial().ln_density(r),
            None => f64::NEG_INFINITY,
        })
    }

    /// `ln f_shape(x)` with the density scaled to peak one.
    pub fn log_shape(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_density(x)? - self.radial().ln_peak)
    }

    /// Information content `-ln f(x)`.
    pub fn information_content(&self, x: &[f64]) -> Result<f64> {
        let ld = self.log_density(x)?;
        if ld == f64::NEG_INFINITY {
            return Err(Error::OutsideSupport);
        }
        Ok(-ld)
    }

    /// Essential supremum of the density (attained at the origin).
    pub fn max_density(&self) -> f64 {
        self.radial().ln_peak.exp()
    }

    pub fn ln_max_density(&self) -> f64 {
        self.radial().ln_peak
    }

    /// Differential entropy in nats, by one-dimensional quadrature in the gauge.
    pub fn exact_entropy(&self) -> Result<f64> {
        self.exact_entropy_with(&QuadConfig::default())
    }

    pub fn exact_entropy_with(&self, cfg: &QuadConfig) -> Result<f64> {
        self.radial().entropy(cfg)
    }

    /// `ln int f_shape^p dx` where `f_shape = f / ||f||_inf`.
    pub fn ln_shape_power_integral(&self, p: f64, cfg: &QuadConfig) -> Result<f64> {
        self.radial().ln_shape_power_integral(p, cfg)
    }

    pub fn spec(&self) -> FamilySpec {
        match *self {
            Family::Pareto(f) => FamilySpec {
                kind: FamilyKind::Pareto,
                n: f.params.n,
                beta: Some(f.params.beta),
                a: Some(f.a),
                s: None,
                norm_q: None,
                norm_scale: None,
            },
            Family::Homogeneous(f) => FamilySpec {
                kind: FamilyKind::Homogeneous,
                n: f.n,
                beta: None,
                a: None,
                s: Some(f.s),
                norm_q: Some(f.norm),
                norm_scale: Some(f.norm_scale),
            },
            Family::Student(f) => FamilySpec {
                kind: FamilyKind::Student,
                n: f.params.n,
                beta: Some(f.params.beta),
                a: None,
                s: None,
                norm_q: None,
                norm_scale: None,
            },
            Family::Gaussian(f) => FamilySpec {
                kind: FamilyKind::Gaussian,
                n: f.n,
                beta: None,
                a: None,
                s: None,
                norm_q: None,
                norm_scale: None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Pareto,
    Homogeneous,
    Student,
    Gaussian,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "pareto" => Ok(FamilyKind::Pareto),
            "homogeneous" | "fsu" => Ok(FamilyKind::Homogeneous),
            "student" => Ok(FamilyKind::Student),
            "gaussian" | "normal" => Ok(FamilyKind::Gaussian),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::Pareto => "pareto",
            FamilyKind::Homogeneous => "homogeneous",
            FamilyKind::Student => "student",
            FamilyKind::Gaussian => "gaussian",
        }
    }
}

/// Plain-data description of a family, as written in `key=value` configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(rename = "family")]
    pub kind: FamilyKind,
    pub n: usize,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub s: Option<f64>,
    pub norm_q: Option<NormKind>,
    pub norm_scale: Option<f64>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("family '{}' requires key '{key}'", self.kind.as_str())))
        };
        Ok(match self.kind {
            FamilyKind::Pareto => Family::Pareto(ParetoFamily::new(
                ConvexParams::new(self.n, need(self.beta, "beta")?)?,
                self.a.unwrap_or(1.0),
            )?),
            FamilyKind::Homogeneous => Family::Homogeneous(HomogeneousFamily::new(
                self.n,
                need(self.s, "s")?,
                self.norm_q.unwrap_or(NormKind::L2),
                self.norm_scale.unwrap_or(1.0),
            )?),
            FamilyKind::Student => {
                Family::Student(StudentFamily::new(ConvexParams::new(self.n, need(self.beta, "beta")?)?))
            }
            FamilyKind::Gaussian => {
                if self.n == 0 {
                    return Err(Error::InvalidParams("dimension n must be positive".into()));
                }
                Family::Gaussian(GaussianFamily { n: self.n })
            }
        })
    }

    /// Reads `family`, `n`, `beta`, `a`, `s`, `norm_q`, `norm_scale` from
    /// `key=value` pairs; other keys are ignored.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut kind = None;
        let mut spec = FamilySpec {
            kind: FamilyKind::Pareto,
            n: 0,
            beta: None,
            a: None,
            s: None,
            norm_q: None,
            norm_scale: None,
        };
        let mut n = None;
        for (k, v) in pairs {
            match k {
                "family" => kind = Some(FamilyKind::parse(v)?),
                "n" => n = Some(parse_usize(k, v)?),
                "beta" => spec.beta = Some(parse_f64(k, v)?),
                "a" => spec.a = Some(parse_f64(k, v)?),
                "s" => spec.s = Some(parse_f64(k, v)?),
                "norm_q" => {
                    spec.norm_q = Some(
                        NormKind::from_q(v)
                            .ok_or_else(|| Error::Config(format!("norm_q must be 1, 2 or inf, got '{v}'")))?,
                    )
                }
                "norm_scale" => spec.norm_scale = Some(parse_f64(k, v)?),
                _ => {}
            }
        }
        spec.kind = kind.ok_or_else(|| Error::Config("missing key 'family'".into()))?;
        spec.n = n.ok_or_else(|| Error::Config("missing key 'n'".into()))?;
        Ok(spec)
    }

    /// Parses a `key=value` text block (one pair per line or whitespace separated, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = split_pairs(text)?;
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={} n={}", self.kind.as_str(), self.n)?;
        if let Some(b) = self.beta {
            write!(f, " beta={b}")?;
        }
        if let Some(a) = self.a {
            write!(f, " a={a}")?;
        }
        if let Some(s) = self.s {
            write!(f, " s={s}")?;
        }
        if let Some(q) = self.norm_q {
            write!(f, " norm_q={}", q.as_q())?;
        }
        if let Some(c) = self.norm_scale {
            write!(f, " norm_scale={c}")?;
        }
        Ok(())
    }
}

pub(crate) fn split_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{tok}'")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("key '{key}' expects a number, got '{v}'")))
}

pub(crate) fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("key '{key}' expects a nonnegative integer, got '{v}'")))
}

/// A function `phi: [0, inf) -> [0, inf)` declared `s`-concave, given by its logarithm.
#[derive(Clone)]
pub struct ScalarSConcaveFn {
    pub s: f64,
    log_phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Right end of the support (`inf` allowed).
    pub support_end: f64,
    /// `phi(t) ~ t^(-decay)` at infinity; `None` for faster decay or compact support.
    pub tail_decay: Option<f64>,
    pub label: String,
}

impl fmt::Debug for ScalarSConcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSConcaveFn")
            .field("label", &self.label)
            .field("s", &self.s)
            .field("support_end", &self.support_end)
            .field("tail_decay", &self.tail_decay)
            .finish()
    }
}

impl ScalarSConcaveFn {
    pub fn new<F>(s: f64, support_end: f64, tail_decay: Option<f64>, label: impl Into<String>, log_phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarSConcaveFn {
            s,
            log_phi: Arc::new(log_phi),
            support_end,
            tail_decay,
            label: label.into(),
        }
    }

    /// `phi_s(t) = (1 - s t)_+^(1/s)`, and `e^{-t}` for `s = 0`.
    pub fn extremal(s: f64) -> Self {
        let end = if s > 0.0 { 1.0 / s } else { f64::INFINITY };
        let decay = if s < 0.0 { Some(-1.0 / s) } else { None };
        Self::new(s, end, decay, format!("extremal(s={s})"), move |t: f64| {
            if s == 0.0 {
                -t
            } else if s > 0.0 && s * t >= 1.0 {
                f64::NEG_INFINITY
            } else {
                (-s * t).ln_1p() / s
            }
        })
    }

    /// `(1 - t)_+^k`, which is `1/k`-concave.
    pub fn truncated_power(k: f64) -> Self {
        Self::new(1.0 / k, 1.0, None, format!("truncated_power(k={k})"), move |t: f64| {
            if t >= 1.0 {
                f64::NEG_INFINITY
            } else {
                k * (-t).ln_1p()
            }
        })
    }

    /// `(1 + t)^(-k)`, which is `-1/k`-concave.
    pub fn inverse_power(k: f64) -> Self {
        Self::new(
            -1.0 / k,
            f64::INFINITY,
            Some(k),
            format!("inverse_power(k={k})"),
            move |t: f64| -k * t.ln_1p(),
        )
    }

    pub fn log_phi(&self, t: f64) -> f64 {
        (self.log_phi)(t)
    }

    /// Checks the declared concavity on a `points`-point grid by discrete
    /// second differences of `phi^s` (or `ln phi` for `s = 0`).
    pub fn check_concavity(&self, points: usize) -> Result<()> {
        let extent = if self.support_end.is_finite() {
            self.support_end
        } else {
            50.0
        };
        let h = extent / points as f64;
        let transformed: Vec<f64> = (0..points)
            .map(|i| {
                let lp = self.log_phi(i as f64 * h);
                if self.s == 0.0 {
                    lp
                } else {
                    (self.s * lp).exp()
                }
            })
            .collect();
        if transformed.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "{} is not positive on its declared support",
                self.label
            )));
        }
        let scale = transformed.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        // s >= 0: transform must be concave; s < 0: phi^s must be convex.
        let sign = if self.s < 0.0 { -1.0 } else { 1.0 };
        for (i, w) in transformed.windows(3).enumerate() {
            let d2 = sign * (w[2] - 2.0 * w[1] + w[0]);
            if d2 > 1e-9 * scale {
                return Err(Error::InvalidParams(format!(
                    "{} is not {}-concave near t = {}",
                    self.label,
                    self.s,
                    (i + 1) as f64 * h
                )));
            }
        }
        Ok(())
    }
}
