//! Bracketed root finding for strictly increasing functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `f(x) = target` for a strictly increasing `f` on `[lo, hi]`.
///
/// Bisects until the bracket collapses to adjacent floats, then applies up to
/// two Newton steps from the better endpoint, keeping any step that stays in
/// the bracket and lowers the residual.
pub fn solve_increasing<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, target: f64) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let g = |x: f64| f(x) - target;
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo <= 0.0 && ghi >= 0.0) {
        return Err(Error::Solver(format!(
            "root not bracketed on [{lo}, {hi}]: residuals {glo:e}, {ghi:e}"
        )));
    }
    let mut iterations = 0;
    while iterations < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut x, mut r) = {
        let (rl, rh) = (g(lo), g(hi));
        if rl.abs() <= rh.abs() {
            (lo, rl)
        } else {
            (hi, rh)
        }
    };
    for _ in 0..2 {
        let d = df(x);
        if !(d > 0.0) || r == 0.0 {
            break;
        }
        let cand = x - r / d;
        if !(cand >= lo && cand <= hi) {
            break;
        }
        let rc = g(cand);
        if rc.abs() < r.abs() {
            x = cand;
            r = rc;
        } else {
            break;
        }
    }
    if !r.is_finite() {
        return Err(Error::Solver(format!("non-finite residual at x = {x}")));
    }
    Ok(Root {
        x,
        residual: r,
        iterations,
    })
}
