//! Fenchel-Legendre duals of the restricted deviation profile, i.e. the
//! Cramer-Chernoff tail exponents
//!
//! ```text
//! P(h~ - h >  t) <= exp(-psi+*(t)),   psi+*(t)  = sup_{0 < alpha < alpha_max} (alpha t - psi(alpha))
//! P(h~ - h < -t) <= exp(-psi-*(-t)),  psi-*(-t) = sup_{alpha < 0} (-alpha t - psi(alpha))
//! ```
//!
//! Both objectives are strictly concave, so the supremum is the root of the
//! stationarity equation `psi'(alpha) = +-t`, found by bracketed bisection on
//! the increasing slope `c'(alpha)`. The lower exponent is infinite once `t`
//! reaches `c'(0)`, the largest possible downward deviation; at `t = c'(0)`
//! itself the objective grows like `n ln |alpha|`, so the supremum is `+inf`
//! there too.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::DeviationProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A nonnegative exponent that may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Finite(v) => *v,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailExponent {
    pub t: f64,
    pub side: Side,
    pub value: Exponent,
    /// Maximizing `alpha`; `None` when the exponent is infinite.
    pub alpha_star: Option<f64>,
}

impl TailExponent {
    /// `exp(-value)`, zero for an infinite exponent.
    pub fn tail_bound(&self) -> f64 {
        match self.value {
            Exponent::Finite(v) => (-v).exp(),
            Exponent::Infinite => 0.0,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("t", t, "t > 0"));
    }
    Ok(())
}

/// `psi+*(t)` with its maximizer.
pub fn dual_upper(profile: &DeviationProfile, t: f64) -> Result<TailExponent> {
    check_t(t)?;
    let m = profile.slope_at_zero();
    let alpha = profile.solve_positive_slope(m + t)?;
    // alpha t - psi(alpha) = alpha (t + m) + sum ln r_i(alpha)
    let value = (alpha * (t + m) + profile.log_ratio_sum(alpha)).max(0.0);
    Ok(TailExponent {
        t,
        side: Side::Upper,
        value: Exponent::Finite(value),
        alpha_star: Some(alpha),
    })
}

/// `psi-*(-t)` with its maximizer, or the infinite marker for `t >= c'(0)`.
pub fn dual_lower(profile: &DeviationProfile, t: f64) -> Result<TailExponent> {
    check_t(t)?;
    let m = profile.slope_at_zero();
    if t >= m {
        return Ok(TailExponent {
            t,
            side: Side::Lower,
            value: Exponent::Infinite,
            alpha_star: None,
        });
    }
    let alpha = profile.solve_negative_slope(m - t)?;
    // -alpha t - psi(alpha) = alpha (m - t) + sum ln r_i(alpha)
    let value = (alpha * (m - t) + profile.log_ratio_sum(alpha)).max(0.0);
    Ok(TailExponent {
        t,
        side: Side::Lower,
        value: Exponent::Finite(value),
        alpha_star: Some(alpha),
    })
}

pub fn dual(profile: &DeviationProfile, t: f64, side: Side) -> Result<TailExponent> {
    match side {
        Side::Upper => dual_upper(profile, t),
        Side::Lower => dual_lower(profile, t),
    }
}

/// Cramer-Chernoff bound on `P(h~ - h > t)` (upper) or `P(h~ - h < -t)` (lower).
pub fn tail_bound(profile: &DeviationProfile, t: f64, side: Side) -> Result<f64> {
    Ok(dual(profile, t, side)?.tail_bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ConvexParams;
    use proptest::prelude::*;

    fn prof(n: usize, beta: f64) -> DeviationProfile {
        DeviationProfile::Convex(ConvexParams::new(n, beta).unwrap())
    }

    /// Derivative-free oracle: dense grid maximization with local grid refinement.
    fn grid_max<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..6 {
            let k = 20_000;
            let h = (b - a) / k as f64;
            let mut arg = a;
            for i in 1..k {
                let x = a + i as f64 * h;
                let v = g(x);
                if v > best {
                    best = v;
                    arg = x;
                }
            }
            a = (arg - 2.0 * h).max(lo);
            b = (arg + 2.0 * h).min(hi);
        }
        best
    }

    #[test]
    fn upper_closed_form() {
        // n=1, beta=2: psi+*(t) = t/2 - ln((t+2)/2), alpha* = t/(2(t+2))
        let p = prof(1, 2.0);
        let e = dual_upper(&p, 2.0).unwrap();
        assert!((e.value.as_f64() - (1.0 - 2f64.ln())).abs() < 1e-14);
        assert!((e.alpha_star.unwrap() - 0.25).abs() < 1e-15);
        for &t in &[0.1, 0.7, 5.0, 40.0] {
            let e = dual_upper(&p, t).unwrap();
            let exact = t / 2.0 - ((t + 2.0) / 2.0).ln();
            assert!((e.value.as_f64() - exact).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn lower_closed_form() {
        // n=1, beta=2, t=1: alpha* = -1/2, value = ln 2 - 1/2
        let p = prof(1, 2.0);
        let e = dual_lower(&p, 1.0).unwrap();
        assert!((e.alpha_star.unwrap() + 0.5).abs() < 1e-15);
        assert!((e.value.as_f64() - (2f64.ln() - 0.5)).abs() < 1e-14);
        let inf = dual_lower(&p, 3.0).unwrap();
        assert!(inf.value.is_infinite());
        assert_eq!(inf.alpha_star, None);
        assert_eq!(inf.tail_bound(), 0.0);
    }

    #[test]
    fn threshold_convention() {
        let p = prof(2, 6.0);
        let m = p.slope_at_zero();
        assert!(dual_lower(&p, m).unwrap().value.is_infinite());
        assert!(dual_lower(&p, m * (1.0 + 1e-12)).unwrap().value.is_infinite());
        let below = dual_lower(&p, m * (1.0 - 1e-12)).unwrap();
        assert!(!below.value.is_infinite());
        // objective grows like n ln|alpha|
        assert!(below.value.as_f64() > 40.0);
    }

    #[test]
    fn small_t_limits() {
        let p = prof(3, 5.5);
        for side in [Side::Upper, Side::Lower] {
            let e = dual(&p, 1e-9, side).unwrap();
            assert!(e.value.as_f64() < 1e-16);
            assert!((e.tail_bound() - 1.0).abs() < 1e-15);
        }
        assert!(dual_upper(&p, 0.0).is_err());
        assert!(dual_lower(&p, -1.0).is_err());
    }

    #[test]
    fn tail_bound_example() {
        let b = tail_bound(&prof(1, 2.0), 2.0, Side::Upper).unwrap();
        assert!((b - 0.735_758_882_342_884_7).abs() < 1e-14);
        assert_eq!(tail_bound(&prof(1, 2.0), 2.0, Side::Lower).unwrap(), 0.0);
    }

    #[test]
    fn grid_oracle_multivariate() {
        let p = prof(2, 6.0);
        let e = dual_upper(&p, 5.0).unwrap();
        let oracle = grid_max(|a| a * 5.0 - p.psi_unchecked(a), 0.0, p.alpha_max() * (1.0 - 1e-15));
        assert!((e.value.as_f64() - oracle).abs() < 1e-8);
    }

    #[test]
    fn log_concave_profile_duals() {
        // n(-a - ln(1-a)): psi+*(t) = t - n ln(1 + t/n)
        let p = DeviationProfile::LogConcave { n: 2 };
        let e = dual_upper(&p, 3.0).unwrap();
        assert!((e.value.as_f64() - (3.0 - 2.0 * 2.5f64.ln())).abs() < 1e-13);
        // lower: -t - n ln(1 - t/n) for t < n
        let l = dual_lower(&p, 1.0).unwrap();
        assert!((l.value.as_f64() - (-1.0 - 2.0 * 0.5f64.ln())).abs() < 1e-13);
        assert!(dual_lower(&p, 2.0).unwrap().value.is_infinite());
    }

    proptest! {
        #[test]
        fn stationarity_and_duality(n in 1usize..6, extra in 0.05f64..10.0, t in 0.01f64..20.0, lower in any::<bool>()) {
            let p = prof(n, n as f64 + extra);
            let side = if lower { Side::Lower } else { Side::Upper };
            let e = dual(&p, t, side).unwrap();
            if let (Exponent::Finite(v), Some(a)) = (e.value, e.alpha_star) {
                let sign = if lower { -1.0 } else { 1.0 };
                let direct = sign * a * t - p.psi_unchecked(a);
                prop_assert!((v - direct).abs() < 1e-10 * v.abs().max(1.0));
                let slope = p.psi_prime(a).unwrap();
                prop_assert!((slope - sign * t).abs() < 1e-10 * t.max(1.0));
                prop_assert!(v >= 0.0);
            } else {
                prop_assert!(lower && t >= p.slope_at_zero());
            }
        }

        #[test]
        fn upper_exponent_monotone_convex(n in 1usize..5, extra in 0.1f64..8.0) {
            let p = prof(n, n as f64 + extra);
            let vals: Vec<f64> = (1..60).map(|k| dual_upper(&p, 0.1 * k as f64).unwrap().value.as_f64()).collect();
            for w in vals.windows(3) {
                prop_assert!(w[1] >= w[0]);
                prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-10);
            }
        }
    }
}
