//! Seeded Monte Carlo estimates of information-content statistics.
//!
//! Draws are produced in fixed chunks of [`CHUNK_SIZE`] samples. Chunk `k`
//! of a run with seed `seed` uses `ChaCha8Rng::seed_from_u64(seed)` with its
//! stream set to `k`, so a sample's value depends only on `(seed, index)`
//! and never on the number of workers. Chunks are concatenated in index
//! order before any statistic is computed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::DeviationProfile;
use crate::error::{Error, Result};
use crate::legendre::{dual, Side};
use crate::measures::{Family, FamilySpec, ParetoFamily};
use crate::report::fmt_sig;
use crate::special::NormKind;

/// Samples per chunk; part of the reproducibility contract.
pub const CHUNK_SIZE: usize = 1 << 16;

/// Version of the [`SampleReport`] JSON schema.
pub const REPORT_VERSION: u32 = 1;

/// Largest admissible MGF argument as a fraction of `alpha_max`; beyond it the
/// estimator's variance is infinite for the equality cases.
pub const ALPHA_CAP: f64 = 0.5;

/// Random stream for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn sample_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParams(format!("sampler construction failed: {e}"))
}

/// Per-family draw machinery, built once per run.
#[derive(Debug, Clone)]
enum Sampler {
    /// `x = S W`, `S = a T/(1-T)` with `1 - T ~ Beta(beta - n, n)`, `W` uniform on the simplex.
    Pareto {
        n: usize,
        a: f64,
        tail: Beta<f64>,
    },
    /// `x = (r / c) Y/||Y||_q` with `Y` drawn from a density depending on `||y||_q` only.
    Homogeneous {
        s: f64,
        norm: NormKind,
        scale: f64,
        radius: RadiusLaw,
    },
    /// `|x|^2 = (1-V)/V` with `V ~ Beta(beta - n/2, n/2)`, uniform direction.
    Student {
        tail: Beta<f64>,
    },
    Gaussian,
}

#[derive(Debug, Clone)]
enum RadiusLaw {
    Beta(Beta<f64>),
    Gamma(Gamma<f64>),
}

impl Sampler {
    fn new(family: &Family) -> Result<Self> {
        Ok(match *family {
            Family::Pareto(f) => {
                let n = f.params.n() as f64;
                Sampler::Pareto {
                    n: f.params.n(),
                    a: f.a,
                    tail: Beta::new(f.params.beta() - n, n).map_err(sample_err)?,
                }
            }
            Family::Homogeneous(f) => {
                let n = f.n as f64;
                let radius = if f.s > 0.0 {
                    RadiusLaw::Beta(Beta::new(n, 1.0 / f.s + 1.0).map_err(sample_err)?)
                } else if f.s == 0.0 {
                    RadiusLaw::Gamma(Gamma::new(n, 1.0).map_err(sample_err)?)
                } else {
                    RadiusLaw::Beta(Beta::new(-1.0 / f.s - n, n).map_err(sample_err)?)
                };
                Sampler::Homogeneous {
                    s: f.s,
                    norm: f.norm,
                    scale: f.norm_scale,
                    radius,
                }
            }
            Family::Student(f) => {
                let h = 0.5 * f.params.n() as f64;
                Sampler::Student {
                    tail: Beta::new(f.params.beta() - h, h).map_err(sample_err)?,
                }
            }
            Family::Gaussian(_) => Sampler::Gaussian,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64]) {
        match self {
            Sampler::Pareto { n, a, tail } => {
                let v = tail.sample(rng);
                let s = a * (1.0 - v) / v;
                let mut total = 0.0;
                for xi in x.iter_mut().take(*n) {
                    let e: f64 = Exp1.sample(rng);
                    *xi = e;
                    total += e;
                }
                x.iter_mut().for_each(|xi| *xi *= s / total);
            }
            Sampler::Homogeneous { s, norm, scale, radius } => {
                let r = match radius {
                    RadiusLaw::Gamma(g) => g.sample(rng),
                    RadiusLaw::Beta(b) => {
                        let t = b.sample(rng);
                        if *s > 0.0 {
                            t / s
                        } else {
                            // t is 1 - T for T ~ Beta(n, beta - n)
                            -(1.0 - t) / (s * t)
                        }
                    }
                };
                direction(rng, *norm, x);
                x.iter_mut().for_each(|xi| *xi *= r / scale);
            }
            Sampler::Student { tail } => {
                let v = tail.sample(rng);
                let r = ((1.0 - v) / v).sqrt();
                direction(rng, NormKind::L2, x);
                x.iter_mut().for_each(|xi| *xi *= r);
            }
            Sampler::Gaussian => {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(rng);
                }
            }
        }
    }
}

/// Fills `x` with a cone-measure distributed point of the unit `l_q` sphere.
fn direction<R: Rng + ?Sized>(rng: &mut R, norm: NormKind, x: &mut [f64]) {
    loop {
        for xi in x.iter_mut() {
            *xi = match norm {
                NormKind::L1 => {
                    let e: f64 = Exp1.sample(rng);
                    if rng.random::<bool>() {
                        e
                    } else {
                        -e
                    }
                }
                NormKind::L2 => StandardNormal.sample(rng),
                NormKind::LInf => Uniform::new(-1.0, 1.0).expect("valid range").sample(rng),
            };
        }
        let len = norm.norm(x);
        if len > 0.0 {
            x.iter_mut().for_each(|xi| *xi /= len);
            return;
        }
    }
}

fn chunk_count(count: usize) -> usize {
    count.div_ceil(CHUNK_SIZE)
}

fn chunk_len(count: usize, k: usize) -> usize {
    CHUNK_SIZE.min(count - k * CHUNK_SIZE)
}

fn run_chunks<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..chunk_count(count)).into_par_iter().map(f).collect())
}

/// `count` i.i.d. points from `family`, reproducible from `seed`.
pub fn sample_points(family: &Family, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let sampler = Sampler::new(family)?;
    let n = family.dim();
    let mut out = Vec::with_capacity(count);
    for k in 0..chunk_count(count) {
        let mut rng = chunk_rng(seed, k as u64);
        for _ in 0..chunk_len(count, k) {
            let mut x = vec![0.0; n];
            sampler.draw(&mut rng, &mut x);
            out.push(x);
        }
    }
    Ok(out)
}

/// Pareto draws via the radial-sum and simplex decomposition.
pub fn sample_pareto(family: &ParetoFamily, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    sample_points(&Family::Pareto(*family), seed, count)
}

/// Information content `-ln f(X)` of `count` draws, in sample order.
/// `workers = 0` uses one thread per core.
pub fn sample_information(family: &Family, seed: u64, count: usize, workers: usize) -> Result<Vec<f64>> {
    let sampler = Sampler::new(family)?;
    let n = family.dim();
    let chunks = run_chunks(count, workers, |k| {
        let mut rng = chunk_rng(seed, k as u64);
        let mut x = vec![0.0; n];
        let mut out = Vec::with_capacity(chunk_len(count, k));
        for _ in 0..chunk_len(count, k) {
            sampler.draw(&mut rng, &mut x);
            let ld = family.log_density(&x)?;
            if !ld.is_finite() {
                return Err(Error::Solver(format!(
                    "sampler produced a point outside the support: {x:?}"
                )));
            }
            out.push(-ld);
        }
        Ok(out)
    })?;
    Ok(chunks.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub side: Side,
    pub frequency: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfPoint {
    pub alpha: f64,
    /// Empirical `E exp(alpha (h~ - mean_h))`.
    pub mgf: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub version: u32,
    pub family: FamilySpec,
    pub profile: DeviationProfile,
    pub seed: u64,
    pub count: usize,
    pub chunk_size: usize,
    /// Exact differential entropy of the family; tails are measured from it.
    pub entropy: f64,
    pub mean_h: f64,
    pub var_h: f64,
    pub se_mean: f64,
    pub se_var: f64,
    /// `min(h~) - mean_h` over all draws.
    pub min_deviation: f64,
    pub t_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub tail_freqs: Vec<TailPoint>,
    pub mgf_points: Vec<MgfPoint>,
}

impl SampleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: SampleReport = serde_json::from_str(text).map_err(|e| Error::Config(format!("bad report JSON: {e}")))?;
        if r.version != REPORT_VERSION {
            return Err(Error::Config(format!("unsupported report version {}", r.version)));
        }
        Ok(r)
    }

    pub fn tails_csv(&self) -> String {
        let mut s = String::from("t,side,frequency,std_error\n");
        for p in &self.tail_freqs {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(p.t),
                p.side,
                fmt_sig(p.frequency),
                fmt_sig(p.std_error)
            ));
        }
        s
    }

    pub fn mgf_csv(&self) -> String {
        let mut s = String::from("alpha,mgf,std_error\n");
        for p in &self.mgf_points {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_sig(p.alpha),
                fmt_sig(p.mgf),
                fmt_sig(p.std_error)
            ));
        }
        s
    }
}

/// `{-2, -1, -0.5, 0.25 alpha_max, 0.5 alpha_max}`.
pub fn default_alpha_grid(profile: &DeviationProfile) -> Vec<f64> {
    let amax = profile.alpha_max();
    vec![-2.0, -1.0, -0.5, 0.25 * amax, 0.5 * amax]
}

/// `{0.5, 1, 2, 4, 8} * sqrt(varentropy bound)`.
pub fn default_t_grid(profile: &DeviationProfile) -> Vec<f64> {
    let sd = profile.c_second(0.0).sqrt();
    [0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|k| k * sd).collect()
}

/// Summary statistics of information content for `count` seeded draws.
pub fn information_stats(
    family: &Family,
    seed: u64,
    count: usize,
    t_grid: &[f64],
    alpha_grid: &[f64],
    workers: usize,
) -> Result<SampleReport> {
    if count < 2 {
        return Err(Error::InvalidParams("sample count must be at least 2".into()));
    }
    let profile = DeviationProfile::from(family.concavity());
    let amax = profile.alpha_max();
    let alpha_cap = ALPHA_CAP * amax;
    for &a in alpha_grid {
        if !a.is_finite() || a > alpha_cap {
            return Err(Error::domain(
                "alpha",
                a,
                format!("alpha <= {alpha_cap} (half of alpha_max)"),
            ));
        }
    }
    for &t in t_grid {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain("t", t, "t > 0"));
        }
    }
    let entropy = family.exact_entropy()?;
    let h = sample_information(family, seed, count, workers)?;
    let nf = count as f64;

    let mean = h.iter().sum::<f64>() / nf;
    let (mut m2, mut m4, mut min) = (0.0, 0.0, f64::INFINITY);
    for &y in &h {
        let d = y - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
        min = min.min(y);
    }
    let var = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let var_of_var = ((m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);

    let mgf_points = alpha_grid
        .iter()
        .map(|&a| {
            let mgf = h.iter().map(|&y| (a * (y - mean)).exp()).sum::<f64>() / nf;
            // Delta method for exp-moment with an estimated center.
            let (mut s1, mut s2) = (0.0, 0.0);
            for &y in &h {
                let z = (a * (y - mean)).exp() - a * mgf * (y - mean);
                s1 += z;
                s2 += z * z;
            }
            let zbar = s1 / nf;
            let var_z = ((s2 - nf * zbar * zbar) / (nf - 1.0)).max(0.0);
            MgfPoint {
                alpha: a,
                mgf,
                std_error: (var_z / nf).sqrt(),
            }
        })
        .collect();

    let mut tail_freqs = Vec::with_capacity(2 * t_grid.len());
    for side in [Side::Upper, Side::Lower] {
        for &t in t_grid {
            let hits = match side {
                Side::Upper => h.iter().filter(|&&y| y - entropy > t).count(),
                Side::Lower => h.iter().filter(|&&y| y - entropy < -t).count(),
            };
            let f = hits as f64 / nf;
            tail_freqs.push(TailPoint {
                t,
                side,
                frequency: f,
                std_error: (f * (1.0 - f) / nf).sqrt(),
            });
        }
    }

    Ok(SampleReport {
        version: REPORT_VERSION,
        family: family.spec(),
        profile,
        seed,
        count,
        chunk_size: CHUNK_SIZE,
        entropy,
        mean_h: mean,
        var_h: var,
        se_mean: (var / nf).sqrt(),
        se_var: var_of_var.sqrt(),
        min_deviation: min - mean,
        t_grid: t_grid.to_vec(),
        alpha_grid: alpha_grid.to_vec(),
        tail_freqs,
        mgf_points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub argument: Option<f64>,
    pub observed: f64,
    pub bound: f64,
    /// Allowed excess (or, for equality checks, allowed absolute deviation).
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictTable {
    pub rows: Vec<Verdict>,
}

impl VerdictTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,argument,observed,bound,slack,pass\n");
        for r in &self.rows {
            let arg = r.argument.map(fmt_sig).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.check,
                arg,
                fmt_sig(r.observed),
                fmt_sig(r.bound),
                fmt_sig(r.slack),
                r.pass
            ));
        }
        s
    }
}

/// Checks a report against the variance, MGF and tail bounds of its profile.
///
/// Every comparison allows three standard errors; the support row allows five.
/// Equality families additionally require the variance and the MGF to match
/// their bounds within three standard errors.
pub fn verify_bounds(report: &SampleReport, equality_case: bool) -> Result<VerdictTable> {
    let profile = report.profile;
    let mut rows = Vec::new();

    let vb = profile.c_second(0.0);
    rows.push(Verdict {
        check: "varentropy_le_bound".into(),
        argument: None,
        observed: report.var_h,
        bound: vb,
        slack: 3.0 * report.se_var,
        pass: report.var_h <= vb + 3.0 * report.se_var,
    });
    if equality_case {
        rows.push(Verdict {
            check: "varentropy_eq_bound".into(),
            argument: None,
            observed: report.var_h,
            bound: vb,
            slack: 3.0 * report.se_var,
            pass: (report.var_h - vb).abs() <= 3.0 * report.se_var,
        });
    }

    for p in &report.mgf_points {
        let bound = profile.psi(p.alpha)?.exp();
        let rel = if p.mgf > 0.0 { p.std_error / p.mgf } else { 0.0 };
        rows.push(Verdict {
            check: "mgf_le_bound".into(),
            argument: Some(p.alpha),
            observed: p.mgf,
            bound,
            slack: 3.0 * rel * bound,
            pass: p.mgf <= bound * (1.0 + 3.0 * rel),
        });
        if equality_case {
            rows.push(Verdict {
                check: "mgf_eq_bound".into(),
                argument: Some(p.alpha),
                observed: p.mgf,
                bound,
                slack: 3.0 * p.std_error,
                pass: (p.mgf - bound).abs() <= 3.0 * p.std_error,
            });
        }
    }

    for p in &report.tail_freqs {
        let bound = dual(&profile, p.t, p.side)?.tail_bound();
        rows.push(Verdict {
            check: format!("tail_{}_le_bound", p.side),
            argument: Some(p.t),
            observed: p.frequency,
            bound,
            slack: 3.0 * p.std_error,
            pass: p.frequency <= bound + 3.0 * p.std_error,
        });
    }

    let floor = -profile.slope_at_zero();
    rows.push(Verdict {
        check: "lower_support".into(),
        argument: None,
        observed: report.min_deviation,
        bound: floor,
        slack: 5.0 * report.se_mean,
        pass: report.min_deviation >= floor - 5.0 * report.se_mean,
    });

    Ok(VerdictTable { rows })
}
