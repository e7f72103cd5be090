//! Run configuration shared by every command.
//!
//! A configuration is a set of `key=value` pairs. Its canonical text form
//! lists the keys that are set in sorted order, one per line, with numbers in
//! shortest round-trip notation, so `parse(canonical(c)) == c`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::DeviationProfile;
use crate::error::{Error, Result};
use crate::measures::{
    parse_f64, parse_usize, split_pairs, ConvexParams, Family, FamilyKind, FamilySpec, ScalarSConcaveFn,
};
use crate::moments::{
    density_domain, scalar_domain, standoff_grid, uniform_grid, Normalizer, DEFAULT_STEP, DEFAULT_TOLERANCE,
};
use crate::montecarlo::{default_alpha_grid, default_t_grid};
use crate::special::NormKind;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_COUNT: usize = 100_000;

/// Width of the default `p` grid.
pub const DEFAULT_P_SPAN: f64 = 5.0;

/// Every recognized key, sorted.
pub const KEYS: &[&str] = &[
    "a",
    "alpha",
    "beta",
    "c0",
    "command",
    "count",
    "family",
    "fisher_info",
    "format",
    "inject",
    "k",
    "max_density",
    "n",
    "norm_q",
    "norm_scale",
    "normalizer",
    "out",
    "p",
    "s",
    "seed",
    "shape",
    "t",
    "tol",
    "trace_cov",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    Dual,
    VerifyMoments,
    Simulate,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Command::Bounds),
            "dual" => Ok(Command::Dual),
            "verify-moments" => Ok(Command::VerifyMoments),
            "simulate" => Ok(Command::Simulate),
            other => Err(Error::Config(format!("unknown command '{other}'"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Dual => "dual",
            Command::VerifyMoments => "verify-moments",
            Command::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A density family, or a scalar `s`-concave function for moment checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyChoice {
    Density(FamilyKind),
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarShape {
    /// `(1 - s t)_+^(1/s)`, `e^-t` at `s = 0`; needs `s`.
    Extremal,
    /// `(1 - t)_+^k`; needs `k`.
    TruncatedPower,
    /// `(1 + t)^-k`; needs `k`.
    InversePower,
}

impl ScalarShape {
    fn parse(v: &str) -> Result<Self> {
        match v {
            "extremal" => Ok(ScalarShape::Extremal),
            "truncated-power" => Ok(ScalarShape::TruncatedPower),
            "inverse-power" => Ok(ScalarShape::InversePower),
            other => Err(Error::Config(format!(
                "shape must be extremal, truncated-power or inverse-power, got '{other}'"
            ))),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            ScalarShape::Extremal => "extremal",
            ScalarShape::TruncatedPower => "truncated-power",
            ScalarShape::InversePower => "inverse-power",
        }
    }
}

/// Synthetic perturbations used to exercise failing verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    /// Adds `1e-3 (p - p_mid)^2` to `ln M(p)`.
    Convex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub family: Option<FamilyChoice>,
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub s: Option<f64>,
    pub norm_q: Option<NormKind>,
    pub norm_scale: Option<f64>,
    pub shape: Option<ScalarShape>,
    pub k: Option<f64>,
    pub normalizer: Option<Normalizer>,
    pub alpha: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub c0: Option<f64>,
    pub max_density: Option<f64>,
    pub fisher_info: Option<f64>,
    pub trace_cov: Option<f64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub inject: Option<Injection>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.len() {
        1 => v.split(',').map(|x| parse_f64(key, x)).collect(),
        3 => uniform_grid(
            parse_f64(key, parts[0])?,
            parse_f64(key, parts[1])?,
            parse_f64(key, parts[2])?,
        ),
        _ => Err(Error::Config(format!(
            "key '{key}' expects a comma list or start:stop:step, got '{v}'"
        ))),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            family: None,
            n: None,
            beta: None,
            a: None,
            s: None,
            norm_q: None,
            norm_scale: None,
            shape: None,
            k: None,
            normalizer: None,
            alpha: None,
            t: None,
            p: None,
            tol: None,
            c0: None,
            max_density: None,
            fisher_info: None,
            trace_cov: None,
            seed: None,
            count: None,
            inject: None,
            out: None,
            format: None,
        }
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let v = v.trim();
        match key {
            "command" => self.command = Command::parse(v)?,
            "family" => {
                self.family = Some(if v == "scalar" {
                    FamilyChoice::Scalar
                } else {
                    FamilyChoice::Density(FamilyKind::parse(v)?)
                })
            }
            "n" => self.n = Some(parse_usize(key, v)?),
            "beta" => self.beta = Some(parse_f64(key, v)?),
            "a" => self.a = Some(parse_f64(key, v)?),
            "s" => self.s = Some(parse_f64(key, v)?),
            "norm_q" => {
                self.norm_q = Some(
                    NormKind::from_q(v)
                        .ok_or_else(|| Error::Config(format!("norm_q must be 1, 2 or inf, got '{v}'")))?,
                )
            }
            "norm_scale" => self.norm_scale = Some(parse_f64(key, v)?),
            "shape" => self.shape = Some(ScalarShape::parse(v)?),
            "k" => self.k = Some(parse_f64(key, v)?),
            "normalizer" => {
                self.normalizer = Some(match v {
                    "standard" => Normalizer::Standard,
                    "extremal" => Normalizer::Extremal,
                    other => {
                        return Err(Error::Config(format!(
                            "normalizer must be standard or extremal, got '{other}'"
                        )))
                    }
                })
            }
            "alpha" => self.alpha = Some(parse_list(key, v)?),
            "t" => self.t = Some(parse_list(key, v)?),
            "p" => self.p = Some(parse_list(key, v)?),
            "tol" => self.tol = Some(parse_f64(key, v)?),
            "c0" => self.c0 = Some(parse_f64(key, v)?),
            "max_density" => self.max_density = Some(parse_f64(key, v)?),
            "fisher_info" => self.fisher_info = Some(parse_f64(key, v)?),
            "trace_cov" => self.trace_cov = Some(parse_f64(key, v)?),
            "seed" => {
                self.seed = Some(
                    v.parse()
                        .map_err(|_| Error::Config(format!("key 'seed' expects a nonnegative integer, got '{v}'")))?,
                )
            }
            "count" => {
                // accepts 1e6 style counts
                let c = parse_f64(key, v)?;
                if !(c >= 0.0) || c.fract() != 0.0 || c > u32::MAX as f64 * 16.0 {
                    return Err(Error::Config(format!(
                        "key 'count' expects a nonnegative integer, got '{v}'"
                    )));
                }
                self.count = Some(c as usize)
            }
            "inject" => {
                self.inject = Some(match v {
                    "convex" => Injection::Convex,
                    other => return Err(Error::Config(format!("inject must be 'convex', got '{other}'"))),
                })
            }
            "out" => self.out = Some(v.to_string()),
            "format" => {
                self.format = Some(match v {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(Error::Config(format!("format must be csv or json, got '{other}'"))),
                })
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Canonical text of one key, if set.
    pub fn get(&self, key: &str) -> Option<String> {
        let f = |x: Option<f64>| x.map(|v| v.to_string());
        match key {
            "command" => Some(self.command.to_string()),
            "family" => self.family.map(|c| match c {
                FamilyChoice::Scalar => "scalar".to_string(),
                FamilyChoice::Density(k) => k.as_str().to_string(),
            }),
            "n" => self.n.map(|v| v.to_string()),
            "beta" => f(self.beta),
            "a" => f(self.a),
            "s" => f(self.s),
            "norm_q" => self.norm_q.map(|q| q.as_q().to_string()),
            "norm_scale" => f(self.norm_scale),
            "shape" => self.shape.map(|s| s.as_str().to_string()),
            "k" => f(self.k),
            "normalizer" => self.normalizer.map(|n| match n {
                Normalizer::Extremal => "extremal".to_string(),
                _ => "standard".to_string(),
            }),
            "alpha" => self.alpha.as_deref().map(join),
            "t" => self.t.as_deref().map(join),
            "p" => self.p.as_deref().map(join),
            "tol" => f(self.tol),
            "c0" => f(self.c0),
            "max_density" => f(self.max_density),
            "fisher_info" => f(self.fisher_info),
            "trace_cov" => f(self.trace_cov),
            "seed" => self.seed.map(|v| v.to_string()),
            "count" => self.count.map(|v| v.to_string()),
            "inject" => self.inject.map(|_| "convex".to_string()),
            "out" => self.out.clone(),
            "format" => self.format.map(|v| v.extension().to_string()),
            _ => None,
        }
    }

    /// Sorted `key=value` lines for every key that is set.
    pub fn canonical(&self) -> String {
        KEYS.iter()
            .filter_map(|k| self.get(k).map(|v| format!("{k}={v}\n")))
            .collect()
    }

    pub fn from_pairs<'a, I>(command: Command, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut c = RunConfig::new(command);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// Parses a config text; it must contain a `command` key.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = split_pairs(text)?;
        let cmd = pairs
            .iter()
            .find(|(k, _)| k == "command")
            .ok_or_else(|| Error::Config("missing key 'command'".into()))?;
        let command = Command::parse(&cmd.1)?;
        Self::from_pairs(command, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Command-line pairs overlaid by a config file. Keys set in both take the
    /// file's value; one warning is returned per such conflict.
    pub fn merge(command: Command, args: &[(String, String)], file_text: Option<&str>) -> Result<(Self, Vec<String>)> {
        let mut c = Self::from_pairs(command, args.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        let mut warnings = Vec::new();
        if let Some(text) = file_text {
            for (k, v) in split_pairs(text)? {
                let before = c.get(&k);
                c.set(&k, &v)?;
                let after = c.get(&k);
                let given_on_cli = k == "command" || args.iter().any(|(ak, _)| *ak == k);
                if given_on_cli && before != after {
                    warnings.push(format!(
                        "config file overrides {k}={} with {k}={}",
                        before.unwrap_or_default(),
                        after.unwrap_or_default()
                    ));
                }
            }
        }
        Ok((c, warnings))
    }

    pub fn format_or_default(&self) -> OutputFormat {
        self.format.unwrap_or(match self.command {
            Command::Simulate => OutputFormat::Json,
            _ => OutputFormat::Csv,
        })
    }

    fn density_kind(&self) -> Result<Option<FamilyKind>> {
        match self.family {
            None => Ok(None),
            Some(FamilyChoice::Density(k)) => Ok(Some(k)),
            Some(FamilyChoice::Scalar) => Err(Error::Config(format!(
                "family=scalar is only valid for verify-moments, not {}",
                self.command
            ))),
        }
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        let kind = self
            .density_kind()?
            .ok_or_else(|| Error::Config(format!("{} requires key 'family'", self.command)))?;
        Ok(FamilySpec {
            kind,
            n: self.n.ok_or_else(|| Error::Config("missing key 'n'".into()))?,
            beta: self.beta,
            a: self.a,
            s: self.s,
            norm_q: self.norm_q,
            norm_scale: self.norm_scale,
        })
    }

    pub fn family(&self) -> Result<Family> {
        self.family_spec()?.build()
    }

    /// `(n, beta)` from the keys, or from the family when it is a convex one.
    pub fn params(&self) -> Result<ConvexParams> {
        if let (Some(n), Some(beta)) = (self.n, self.beta) {
            return ConvexParams::new(n, beta);
        }
        if self.density_kind()?.is_some() {
            if let DeviationProfile::Convex(p) = DeviationProfile::from(self.family()?.concavity()) {
                return Ok(p);
            }
        }
        Err(Error::Config(format!("{} requires keys 'n' and 'beta'", self.command)))
    }

    pub fn scalar_fn(&self) -> Result<ScalarSConcaveFn> {
        let shape = self
            .shape
            .ok_or_else(|| Error::Config("family=scalar requires key 'shape'".into()))?;
        let k = || {
            let k = self
                .k
                .ok_or_else(|| Error::Config(format!("shape={} requires key 'k'", shape.as_str())))?;
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::domain("k", k, "k > 0"));
            }
            Ok(k)
        };
        Ok(match shape {
            ScalarShape::Extremal => {
                let s = self
                    .s
                    .ok_or_else(|| Error::Config("shape=extremal requires key 's'".into()))?;
                if !s.is_finite() {
                    return Err(Error::domain("s", s, "finite s"));
                }
                ScalarSConcaveFn::extremal(s)
            }
            ScalarShape::TruncatedPower => ScalarSConcaveFn::truncated_power(k()?),
            ScalarShape::InversePower => ScalarSConcaveFn::inverse_power(k()?),
        })
    }

    pub fn alpha_grid(&self, profile: &DeviationProfile) -> Vec<f64> {
        self.alpha.clone().unwrap_or_else(|| default_alpha_grid(profile))
    }

    pub fn t_grid(&self, profile: &DeviationProfile) -> Vec<f64> {
        self.t.clone().unwrap_or_else(|| default_t_grid(profile))
    }

    /// The `p` grid, defaulting to `DEFAULT_P_SPAN` worth of the admissible domain.
    pub fn p_grid(&self, domain: (f64, f64)) -> Result<Vec<f64>> {
        match &self.p {
            Some(p) => Ok(p.clone()),
            None => standoff_grid(
                domain,
                domain.0,
                (domain.0 + DEFAULT_P_SPAN).min(domain.1),
                DEFAULT_STEP,
            ),
        }
    }

    pub fn scalar_p_grid(&self, phi: &ScalarSConcaveFn) -> Result<Vec<f64>> {
        self.p_grid(scalar_domain(phi.s))
    }

    pub fn density_p_grid(&self, n: usize, s: f64) -> Result<Vec<f64>> {
        self.p_grid(density_domain(n, s))
    }

    pub fn tolerance(&self) -> Result<f64> {
        let tol = self.tol.unwrap_or(DEFAULT_TOLERANCE);
        if !(tol > 0.0) {
            return Err(Error::domain("tol", tol, "tol > 0"));
        }
        Ok(tol)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn count_or_default(&self) -> usize {
        self.count.unwrap_or(DEFAULT_COUNT)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}
