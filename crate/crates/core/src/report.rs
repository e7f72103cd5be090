//! Command runners and their reports.
//!
//! Each runner resolves and validates every input from a [`RunConfig`] before
//! computing anything, then returns a serializable report. Text output (CSV)
//! prints floats with 12 significant digits; JSON carries full precision.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    entropy_upper_bound, fisher_varentropy_bound, small_ball, varentropy_bound, DeviationProfile, SmallBallResult,
};
use crate::config::{Command, FamilyChoice, Injection, RunConfig};
use crate::error::{Error, Result};
use crate::legendre::{dual, Side, TailExponent};
use crate::measures::Family;
use crate::moments::{
    certify_log_concavity, density_moment_curve, scalar_moment_curve, Certificate, MomentCurve, Normalizer,
};
use crate::montecarlo::{information_stats, verify_bounds, SampleReport, VerdictTable};
use crate::quad::QuadConfig;

/// Version of every command report's JSON schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Size of the synthetic convex bump added by `inject=convex`.
pub const INJECTED_CURVATURE: f64 = 1e-3;

/// `x` with 12 significant digits, trailing zeros removed (like `%.12g`).
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiRow {
    pub alpha: f64,
    pub psi: f64,
    pub psi_prime: f64,
    pub psi_second: f64,
    /// `exp(psi)`, the bound on `E exp(alpha (h~ - h))`.
    pub mgf_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub version: u32,
    pub config: String,
    pub n: usize,
    pub beta: f64,
    pub kappa: f64,
    pub alpha_max: f64,
    /// `c'(0) = beta sum_i 1/(beta - i)`.
    pub mean_slope: f64,
    pub psi: Vec<PsiRow>,
    pub varentropy_bound: f64,
    pub fisher_varentropy_bound: Option<f64>,
    pub max_density: Option<f64>,
    pub entropy_bound: Option<f64>,
    pub small_ball: Option<SmallBallResult>,
    pub small_ball_probability_bound: Option<f64>,
    pub exponents: Vec<TailExponent>,
}

impl BoundsReport {
    /// Long format: `quantity,argument,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,argument,value\n");
        let mut row = |q: &str, arg: String, v: String| {
            let _ = writeln!(s, "{q},{arg},{v}");
        };
        row("alpha_max", String::new(), fmt_sig(self.alpha_max));
        row("mean_slope", String::new(), fmt_sig(self.mean_slope));
        for p in &self.psi {
            row("psi", fmt_sig(p.alpha), fmt_sig(p.psi));
            row("mgf_bound", fmt_sig(p.alpha), fmt_sig(p.mgf_bound));
        }
        row("varentropy_bound", String::new(), fmt_sig(self.varentropy_bound));
        if let Some(v) = self.fisher_varentropy_bound {
            row("fisher_varentropy_bound", String::new(), fmt_sig(v));
        }
        if let Some(v) = self.entropy_bound {
            row("entropy_bound", opt_sig(self.max_density), fmt_sig(v));
        }
        if let Some(sb) = self.small_ball {
            row("small_ball_alpha_star", fmt_sig(sb.c0), fmt_sig(sb.alpha_star));
            row("small_ball_c1", fmt_sig(sb.c0), fmt_sig(sb.c1));
            row("small_ball_t", fmt_sig(sb.c0), fmt_sig(sb.t));
            row(
                "small_ball_probability_bound",
                fmt_sig(sb.c0),
                opt_sig(self.small_ball_probability_bound),
            );
        }
        for e in &self.exponents {
            row(&format!("{}_exponent", e.side), fmt_sig(e.t), fmt_sig(e.value.as_f64()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub version: u32,
    pub config: String,
    pub n: usize,
    pub beta: f64,
    pub mean_slope: f64,
    pub exponents: Vec<TailExponent>,
}

impl DualReport {
    pub fn to_csv(&self) -> String {
        exponents_csv(&self.exponents)
    }
}

fn exponents_csv(rows: &[TailExponent]) -> String {
    let mut s = String::from("t,side,exponent,tail_bound,alpha_star\n");
    for e in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_sig(e.t),
            e.side,
            fmt_sig(e.value.as_f64()),
            fmt_sig(e.tail_bound()),
            opt_sig(e.alpha_star)
        );
    }
    s
}

/// Comparison of a curve with a known constant value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub expected_log_m: f64,
    /// `max_p |M(p) / M_expected - 1|`.
    pub max_relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub version: u32,
    pub config: String,
    pub curve: MomentCurve,
    pub certificate: Certificate,
    pub identity: Option<IdentityCheck>,
}

impl MomentsReport {
    pub fn pass(&self) -> bool {
        self.certificate.pass && self.identity.is_none_or(|i| i.pass)
    }

    pub fn to_csv(&self) -> String {
        self.curve.to_csv()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub version: u32,
    pub config: String,
    pub sample: SampleReport,
    pub verdicts: VerdictTable,
    pub all_pass: bool,
}

impl SimulateReport {
    pub fn to_csv(&self) -> String {
        self.verdicts.to_csv()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Bounds(BoundsReport),
    Dual(DualReport),
    VerifyMoments(MomentsReport),
    Simulate(SimulateReport),
}

impl Report {
    /// Whether every verdict in the report passed; reports without verdicts pass.
    pub fn pass(&self) -> bool {
        match self {
            Report::Bounds(_) | Report::Dual(_) => true,
            Report::VerifyMoments(r) => r.pass(),
            Report::Simulate(r) => r.all_pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        match self {
            Report::Bounds(r) => r.to_csv(),
            Report::Dual(r) => r.to_csv(),
            Report::VerifyMoments(r) => r.to_csv(),
            Report::Simulate(r) => r.to_csv(),
        }
    }
}

/// Runs the command named in `cfg`. `workers` only affects wall time.
pub fn run(cfg: &RunConfig, workers: usize) -> Result<Report> {
    Ok(match cfg.command {
        Command::Bounds => Report::Bounds(cmd_bounds(cfg)?),
        Command::Dual => Report::Dual(cmd_dual(cfg)?),
        Command::VerifyMoments => Report::VerifyMoments(cmd_verify_moments(cfg)?),
        Command::Simulate => Report::Simulate(cmd_simulate(cfg, workers)?),
    })
}

fn check_t_grid(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::Config("t grid is empty".into()));
    }
    for &x in t {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain("t", x, "t > 0"));
        }
    }
    Ok(())
}

fn exponents(profile: &DeviationProfile, t: &[f64]) -> Result<Vec<TailExponent>> {
    let mut out = Vec::with_capacity(2 * t.len());
    for side in [Side::Upper, Side::Lower] {
        for &x in t {
            out.push(dual(profile, x, side)?);
        }
    }
    Ok(out)
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<BoundsReport> {
    let params = cfg.params()?;
    let profile = DeviationProfile::Convex(params);
    let alpha = cfg.alpha_grid(&profile);
    for &a in &alpha {
        profile.check_alpha(a)?;
    }
    let t = cfg.t_grid(&profile);
    check_t_grid(&t)?;
    if let Some(c0) = cfg.c0 {
        if !(c0 > 0.0 && c0 < 1.0) {
            return Err(Error::domain("c0", c0, "0 < c0 < 1"));
        }
    }
    let fisher = match (cfg.trace_cov, cfg.fisher_info) {
        (None, None) => None,
        (Some(tr), Some(j)) => Some((tr, j)),
        _ => {
            return Err(Error::Config(
                "the Fisher-information bound needs both 'trace_cov' and 'fisher_info'".into(),
            ))
        }
    };
    if fisher.is_some() {
        params.require_covariance()?;
    }
    let max_density = match (cfg.max_density, cfg.family) {
        (Some(m), _) => {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::domain("max_density", m, "0 < max_density < inf"));
            }
            Some(m)
        }
        (None, Some(FamilyChoice::Density(_))) => Some(cfg.family()?.max_density()),
        _ => None,
    };

    let psi = alpha
        .iter()
        .map(|&a| {
            let v = profile.psi(a)?;
            Ok(PsiRow {
                alpha: a,
                psi: v,
                psi_prime: profile.psi_prime(a)?,
                psi_second: profile.psi_second(a)?,
                mgf_bound: v.exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sb = cfg.c0.map(|c0| small_ball(&params, c0)).transpose()?;
    Ok(BoundsReport {
        version: SCHEMA_VERSION,
        config: cfg.canonical(),
        n: params.n(),
        beta: params.beta(),
        kappa: params.kappa(),
        alpha_max: params.alpha_max(),
        mean_slope: profile.slope_at_zero(),
        psi,
        varentropy_bound: varentropy_bound(&params),
        fisher_varentropy_bound: fisher
            .map(|(tr, j)| fisher_varentropy_bound(&params, tr, j))
            .transpose()?,
        max_density,
        entropy_bound: max_density.map(|m| entropy_upper_bound(&params, m)).transpose()?,
        small_ball_probability_bound: sb.map(|r| r.probability_bound(params.n())),
        small_ball: sb,
        exponents: exponents(&profile, &t)?,
    })
}

pub fn cmd_dual(cfg: &RunConfig) -> Result<DualReport> {
    let params = cfg.params()?;
    let profile = DeviationProfile::Convex(params);
    let t = cfg.t_grid(&profile);
    check_t_grid(&t)?;
    Ok(DualReport {
        version: SCHEMA_VERSION,
        config: cfg.canonical(),
        n: params.n(),
        beta: params.beta(),
        mean_slope: profile.slope_at_zero(),
        exponents: exponents(&profile, &t)?,
    })
}

fn inject_convex(curve: &mut MomentCurve) {
    let g = &curve.grid;
    let mid = 0.5 * (g[0] + g[g.len() - 1]);
    for (m, p) in curve.log_m.iter_mut().zip(g) {
        *m += INJECTED_CURVATURE * (p - mid) * (p - mid);
    }
    curve.label.push_str(" +convex");
}

pub fn cmd_verify_moments(cfg: &RunConfig) -> Result<MomentsReport> {
    let tol = cfg.tolerance()?;
    let quad = QuadConfig::default();
    enum Plan {
        Scalar(crate::measures::ScalarSConcaveFn, Normalizer),
        Density(Family, f64),
    }
    let (plan, grid) = match cfg.family {
        Some(FamilyChoice::Scalar) => {
            let phi = cfg.scalar_fn()?;
            let grid = cfg.scalar_p_grid(&phi)?;
            (Plan::Scalar(phi, cfg.normalizer.unwrap_or(Normalizer::Standard)), grid)
        }
        Some(FamilyChoice::Density(_)) => {
            let family = cfg.family()?;
            if cfg.normalizer.is_some() {
                return Err(Error::Config("'normalizer' applies to family=scalar only".into()));
            }
            let s = cfg.s.unwrap_or_else(|| family.s_concavity());
            let grid = cfg.density_p_grid(family.dim(), s)?;
            (Plan::Density(family, s), grid)
        }
        None => return Err(Error::Config("verify-moments requires key 'family'".into())),
    };
    if grid.len() < 3 {
        return Err(Error::Config(format!(
            "p grid needs at least 3 points, got {}",
            grid.len()
        )));
    }

    let (mut curve, identity) = match plan {
        Plan::Scalar(phi, normalizer) => (scalar_moment_curve(&phi, &grid, normalizer, &quad)?, None),
        Plan::Density(family, s) => {
            let curve = density_moment_curve(&family, s, &grid, &quad)?;
            let identity = match family {
                Family::Homogeneous(h) if h.s == s => {
                    let expected: Vec<f64> = grid
                        .iter()
                        .map(|&p| {
                            h.ln_power_integral_identity(p) + (1..=h.n).map(|i| (p + i as f64 * s).ln()).sum::<f64>()
                        })
                        .collect();
                    let dev = curve
                        .log_m
                        .iter()
                        .zip(&expected)
                        .map(|(m, e)| (m - e).exp_m1().abs())
                        .fold(0.0, f64::max);
                    Some(IdentityCheck {
                        expected_log_m: expected[0],
                        max_relative_deviation: dev,
                        tolerance: tol,
                        pass: dev <= tol,
                    })
                }
                _ => None,
            };
            (curve, identity)
        }
    };
    if cfg.inject == Some(Injection::Convex) {
        inject_convex(&mut curve);
    }
    let certificate = certify_log_concavity(&curve, tol)?;
    Ok(MomentsReport {
        version: SCHEMA_VERSION,
        config: cfg.canonical(),
        curve,
        certificate,
        identity,
    })
}

pub fn cmd_simulate(cfg: &RunConfig, workers: usize) -> Result<SimulateReport> {
    let family = cfg.family()?;
    let profile = DeviationProfile::from(family.concavity());
    let t = cfg.t_grid(&profile);
    check_t_grid(&t)?;
    let alpha = cfg.alpha_grid(&profile);
    let sample = information_stats(
        &family,
        cfg.seed_or_default(),
        cfg.count_or_default(),
        &t,
        &alpha,
        workers,
    )?;
    let verdicts = verify_bounds(&sample, family.is_equality_case())?;
    Ok(SimulateReport {
        version: SCHEMA_VERSION,
        config: cfg.canonical(),
        all_pass: verdicts.all_pass(),
        sample,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(3.69), "3.69");
        assert_eq!(fmt_sig(0.306_852_819_440_054_7), "0.30685281944");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123_456_789_012_345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_sig(9.999_999_999_999_9), "10");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn bounds_report_values() {
        let r = cmd_bounds(&cfg("command=bounds n=2 beta=6")).unwrap();
        assert!((r.varentropy_bound - 3.69).abs() < 1e-12);
        assert!(r.to_csv().contains("varentropy_bound,,3.69\n"));
        let r = cmd_bounds(&cfg("command=bounds n=1 beta=2 t=2")).unwrap();
        let up = r.exponents.iter().find(|e| e.side == Side::Upper).unwrap();
        assert!((up.value.as_f64() - 0.306_852_819_440_054_7).abs() < 1e-12);
        assert!(r.to_csv().contains("upper_exponent,2,0.30685281944\n"));
        assert!(r.to_csv().contains("lower_exponent,2,inf\n"));
    }

    #[test]
    fn bounds_optional_sections() {
        let r = cmd_bounds(&cfg(
            "command=bounds n=1 beta=4 c0=0.01 max_density=2 trace_cov=2 fisher_info=1.5",
        ))
        .unwrap();
        assert!(r.small_ball.is_some());
        assert!(r.entropy_bound.is_some());
        assert!(r.fisher_varentropy_bound.is_some());
        let fam = cmd_bounds(&cfg("command=bounds family=pareto n=1 beta=2")).unwrap();
        assert!((fam.max_density.unwrap() - 1.0).abs() < 1e-14);
        assert!((fam.entropy_bound.unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bounds_rejects_before_computing() {
        let e = cmd_bounds(&cfg("command=bounds n=2 beta=1.5")).unwrap_err();
        assert!(e.to_string().contains("beta must exceed n"));
        assert!(e.is_input_error());
        assert!(cmd_bounds(&cfg("command=bounds n=1 beta=2 alpha=0.6")).is_err());
        assert!(cmd_bounds(&cfg("command=bounds n=1 beta=2 t=-1")).is_err());
        assert!(cmd_bounds(&cfg("command=bounds n=1 beta=2 c0=2")).is_err());
        assert!(cmd_bounds(&cfg("command=bounds n=1 beta=4 fisher_info=1")).is_err());
    }

    #[test]
    fn dual_csv_layout() {
        let r = cmd_dual(&cfg("command=dual n=1 beta=2 t=1,3")).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,side,exponent,tail_bound,alpha_star");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "3,lower,inf,0,");
    }

    #[test]
    fn verify_moments_identity_curve() {
        let r = cmd_verify_moments(&cfg("command=verify-moments family=homogeneous n=1 s=1 norm_q=1")).unwrap();
        assert!(r.pass());
        assert!(r.curve.log_m.iter().all(|v| (v - 2f64.ln()).abs() < 1e-9));
        assert!(r.identity.unwrap().pass);
    }

    #[test]
    fn verify_moments_injection_fails() {
        let r = cmd_verify_moments(&cfg(
            "command=verify-moments family=homogeneous n=1 s=1 norm_q=1 inject=convex",
        ))
        .unwrap();
        assert!(!r.certificate.pass);
        assert!(!Report::VerifyMoments(r).pass());
    }

    #[test]
    fn verify_moments_student_strict() {
        let r = cmd_verify_moments(&cfg("command=verify-moments family=student n=1 beta=5")).unwrap();
        assert!(r.pass());
        assert!(r.certificate.strictly_concave);
    }

    #[test]
    fn verify_moments_scalar() {
        let r = cmd_verify_moments(&cfg(
            "command=verify-moments family=scalar shape=inverse-power k=3 normalizer=extremal",
        ))
        .unwrap();
        assert!(r.pass(), "{:?}", r.certificate);
        assert!(cmd_verify_moments(&cfg("command=verify-moments family=scalar shape=extremal")).is_err());
        assert!(cmd_verify_moments(&cfg("command=verify-moments family=pareto n=1 beta=3 s=0.5")).is_err());
    }

    #[test]
    fn simulate_is_reproducible_across_workers() {
        let c = cfg("command=simulate family=pareto n=1 beta=3 count=20000 seed=5");
        let a = run(&c, 1).unwrap();
        let b = run(&c, 3).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.pass());
    }

    #[test]
    fn simulate_rejects_scalar_family() {
        let e = cmd_simulate(&cfg("command=simulate family=scalar shape=extremal s=0"), 1).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
