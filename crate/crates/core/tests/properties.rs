use convexinfo::measures::{
    ConvexParams, Family, GaussianFamily, HomogeneousFamily, ParetoFamily, ScalarSConcaveFn, StudentFamily,
};
use convexinfo::moments::{
    certify_log_concavity, density_domain, density_moment_curve, scalar_moment_curve, standoff_grid, uniform_grid,
    Normalizer, DEFAULT_STEP,
};
use convexinfo::montecarlo::sample_points;
use convexinfo::quad::{integrate, integrate_half_line, PowerIntegrand, QuadConfig};
use convexinfo::special::{ln_beta, NormKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn pareto(n: usize, beta: f64, a: f64) -> Family {
    Family::Pareto(ParetoFamily::new(ConvexParams::new(n, beta).unwrap(), a).unwrap())
}

fn student(n: usize, beta: f64) -> Family {
    Family::Student(StudentFamily::new(ConvexParams::new(n, beta).unwrap()))
}

fn homogeneous(n: usize, s: f64, q: NormKind, c: f64) -> Family {
    Family::Homogeneous(HomogeneousFamily::new(n, s, q, c).unwrap())
}

fn families() -> Vec<Family> {
    vec![
        pareto(1, 2.0, 1.0),
        pareto(2, 6.0, 1.0),
        pareto(2, 4.0, 2.0),
        student(1, 5.0),
        student(2, 4.0),
        homogeneous(1, 1.0, NormKind::L1, 1.0),
        homogeneous(2, 0.5, NormKind::L1, 1.3),
        homogeneous(2, 0.0, NormKind::L2, 1.0),
        homogeneous(2, -0.2, NormKind::LInf, 0.7),
        Family::Gaussian(GaussianFamily { n: 1 }),
        Family::Gaussian(GaussianFamily { n: 2 }),
    ]
}

fn cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    }
}

/// Integral over `[lo, inf)` (or the whole line when `lo` is `-inf`), split at `breaks`.
fn line_integral(f: &dyn Fn(f64) -> f64, lo: f64, breaks: &[f64], cfg: &QuadConfig) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let first = *pts.first().unwrap_or(&lo.max(0.0));
    if lo.is_infinite() {
        // x = first - tan(theta)
        total += integrate(
            |th: f64| {
                let c = th.cos();
                f(first - th.tan()) / (c * c)
            },
            0.0,
            FRAC_PI_2,
            cfg,
        )
        .unwrap()
        .value;
    } else if first > lo {
        total += integrate(f, lo, first, cfg).unwrap().value;
    }
    for w in pts.windows(2) {
        total += integrate(f, w[0], w[1], cfg).unwrap().value;
    }
    let last = *pts.last().unwrap_or(&first);
    total += integrate(
        |th: f64| {
            let c = th.cos();
            f(last + th.tan()) / (c * c)
        },
        0.0,
        FRAC_PI_2,
        cfg,
    )
    .unwrap()
    .value;
    total
}

#[test]
fn densities_integrate_to_one() {
    let outer = cfg();
    let inner = cfg();
    for fam in families() {
        let lo = if matches!(fam, Family::Pareto(_)) {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        let density = |x: &[f64]| fam.log_density(x).unwrap().exp();
        let mass = match fam.dim() {
            1 => line_integral(&|x| density(&[x]), lo, &[0.0], &outer),
            2 => line_integral(
                &|x1| {
                    let a = x1.abs();
                    line_integral(&|x2| density(&[x1, x2]), lo, &[-a, 0.0, a], &inner)
                },
                lo,
                &[0.0],
                &outer,
            ),
            _ => unreachable!(),
        };
        assert!((mass - 1.0).abs() < 1e-6, "{}: mass {mass}", fam.spec());
    }
}

#[test]
fn max_density_dominates_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for fam in families() {
        let peak = fam.ln_max_density();
        let mut points = sample_points(&fam, 3, 5_000).unwrap();
        for _ in 0..5_000 {
            points.push((0..fam.dim()).map(|_| rng.random_range(-3.0..3.0)).collect());
        }
        for x in &points {
            let ld = fam.log_density(x).unwrap();
            assert!(ld <= peak + 1e-12, "{}: f({x:?}) above the maximum", fam.spec());
        }
    }
}

#[test]
fn level_set_reduction_for_minus_one_concave_example() {
    // f = (1 + x^2)^(-1/2): g = 1/f has sub-level sets of length 2 sqrt(t^2 - 1),
    // so phi(t) = t psi(1/t) = 2 sqrt(1 - t^2) on [0, 1].
    let c = cfg();
    for p in [1.5, 2.0, 3.0, 5.0, 8.0] {
        let lhs = 2.0
            * integrate_half_line(
                &PowerIntegrand {
                    log_q: |x: f64, _ln_x: f64| -0.5 * p * x.mul_add(x, 1.0).ln(),
                    origin_exponent: 1.0,
                    tail_exponent: p - 1.0,
                    end: f64::INFINITY,
                    scale: 1.0,
                },
                &c,
            )
            .unwrap();
        let rhs = p * integrate_half_line(
            &PowerIntegrand {
                log_q: |t: f64, ln_t: f64| (p - 2.0) * ln_t + (2.0 * (1.0 - t * t).max(0.0).sqrt()).ln(),
                origin_exponent: p - 1.0,
                tail_exponent: 1.0,
                end: 1.0,
                scale: 1.0,
            },
            &c,
        )
        .unwrap();
        let exact = ln_beta(0.5, 0.5 * (p - 1.0)).exp();
        assert!((lhs / rhs - 1.0).abs() < 1e-6, "p={p}: {lhs} vs {rhs}");
        assert!((lhs / exact - 1.0).abs() < 1e-6, "p={p}: {lhs} vs {exact}");
    }
}

#[test]
fn homogeneous_identity_including_small_negative_s() {
    let quad = QuadConfig::default();
    for s in [1.0, 0.5, 0.0, -0.1] {
        for n in [1usize, 2] {
            for q in [NormKind::L1, NormKind::L2, NormKind::LInf] {
                let h = HomogeneousFamily::new(n, s, q, 0.8).unwrap();
                let grid = standoff_grid(density_domain(n, s), 0.0, 4.0, DEFAULT_STEP).unwrap();
                let curve = density_moment_curve(&Family::Homogeneous(h), s, &grid, &quad).unwrap();
                let first = curve.log_m[0];
                for v in &curve.log_m {
                    assert!((v - first).exp_m1().abs() < 1e-7, "s={s} n={n} q={}", q.as_q());
                }
            }
        }
    }
}

#[test]
fn regimes_agree_as_s_tends_to_zero() {
    // (1 - t)_+^2 is s-concave for every s <= 1/2
    let grid = uniform_grid(0.5, 3.0, DEFAULT_STEP).unwrap();
    let quad = QuadConfig::default();
    let phi = |s: f64| {
        ScalarSConcaveFn::new(s, 1.0, None, "(1-t)^2", |t: f64| {
            if t < 1.0 {
                2.0 * (1.0 - t).ln()
            } else {
                f64::NEG_INFINITY
            }
        })
    };
    let base = scalar_moment_curve(&phi(0.0), &grid, Normalizer::Standard, &quad).unwrap();
    for s in [1e-4, -1e-4] {
        let c = scalar_moment_curve(&phi(s), &grid, Normalizer::Extremal, &quad).unwrap();
        for (a, b) in c.log_m.iter().zip(&base.log_m) {
            assert!((a - b).abs() < 1e-3, "s={s}: {a} vs {b}");
        }
        assert!(certify_log_concavity(&c, 1e-7).unwrap().pass);
    }
}

#[test]
fn doubling_refinement_limit_is_stable() {
    let base = QuadConfig::default();
    let doubled = base.with_max_subdivisions(2 * base.max_subdivisions);
    let student = student(1, 5.0);
    let grid = standoff_grid(density_domain(1, -0.2), 0.0, 4.0, DEFAULT_STEP).unwrap();
    let a = density_moment_curve(&student, -0.2, &grid, &base).unwrap();
    let b = density_moment_curve(&student, -0.2, &grid, &doubled).unwrap();
    for (x, y) in a.log_m.iter().zip(&b.log_m) {
        assert!((x - y).abs() < 1e-9);
    }
    let phi = ScalarSConcaveFn::inverse_power(3.0);
    let grid = uniform_grid(0.1, 2.9, DEFAULT_STEP).unwrap();
    let a = scalar_moment_curve(&phi, &grid, Normalizer::Standard, &base).unwrap();
    let b = scalar_moment_curve(&phi, &grid, Normalizer::Standard, &doubled).unwrap();
    for (x, y) in a.log_m.iter().zip(&b.log_m) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn exact_entropy_matches_sample_mean() {
    for fam in families() {
        let h = fam.exact_entropy().unwrap();
        let pts = sample_points(&fam, 11, 200_000).unwrap();
        let vals: Vec<f64> = pts.iter().map(|x| fam.information_content(x).unwrap()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - h).abs() < 4.0 * se,
            "{}: mean {mean} vs h {h} (se {se})",
            fam.spec()
        );
    }
}
