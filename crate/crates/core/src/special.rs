//! Thin wrappers over `statrs` special functions plus the few closed forms
//! the families need.

use std::f64::consts::PI;

pub use statrs::function::beta::ln_beta;
pub use statrs::function::gamma::ln_gamma;

/// `log(k!)` for small integer `k`.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Log-volume of the unit ball of the `l_q` norm in dimension `n`,
/// for `q` in {1, 2, infinity}.
pub fn ln_unit_ball_volume(n: usize, q: NormKind) -> f64 {
    let nf = n as f64;
    match q {
        NormKind::L1 => nf * 2f64.ln() - ln_factorial(n),
        NormKind::L2 => 0.5 * nf * PI.ln() - ln_gamma(0.5 * nf + 1.0),
        NormKind::LInf => nf * 2f64.ln(),
    }
}

/// The norms admitted as homogeneous potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NormKind {
    L1,
    L2,
    LInf,
}

impl NormKind {
    pub fn from_q(q: &str) -> Option<Self> {
        match q.trim() {
            "1" => Some(NormKind::L1),
            "2" => Some(NormKind::L2),
            "inf" | "infinity" | "oo" => Some(NormKind::LInf),
            _ => None,
        }
    }

    pub fn as_q(&self) -> &'static str {
        match self {
            NormKind::L1 => "1",
            NormKind::L2 => "2",
            NormKind::LInf => "inf",
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}
