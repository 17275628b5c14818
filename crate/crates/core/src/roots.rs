//! Scalar root finding and 1-D maximization.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Finds a bracket around a sign change of `g` by geometric expansion from
/// `start`: upward when `g(start) > 0`, downward otherwise.
///
/// The residuals handled here are positive left of the root and negative
/// right of it. Returns `(lo, hi)` with `g(lo) > 0 > g(hi)`.
pub fn expand_bracket<G: Fn(f64) -> f64>(g: G, start: f64) -> Result<(f64, f64)> {
    let g0 = g(start);
    if g0 == 0.0 {
        return Ok((start, start));
    }
    let (mut lo, mut hi) = (start, start);
    if g0 > 0.0 {
        while hi < 1e300 {
            hi *= 2.0;
            if g(hi) <= 0.0 {
                return Ok((hi / 2.0, hi));
            }
        }
    } else {
        while lo > 1e-300 {
            lo /= 2.0;
            if g(lo) > 0.0 {
                return Ok((lo, lo * 2.0));
            }
        }
    }
    Err(Error::Bracketing { lo, hi })
}

/// Bisection with safeguarded secant steps on a bracket `[lo, hi]` where
/// `g` changes sign.
///
/// Iterates until the bracket collapses to a few ulps, so the returned root
/// is accurate to machine precision whenever `g` is monotone near the root.
pub fn solve_bracketed<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::Bracketing { lo, hi });
    }

    let mut last_width = hi - lo;
    for _ in 0..MAX_ITER {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // secant only while it keeps shrinking the bracket by at least half
        let secant = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        let margin = 1e-3 * width;
        let x = if width <= 0.5 * last_width
            && secant.is_finite()
            && secant > lo + margin
            && secant < hi - margin
        {
            secant
        } else {
            mid
        };
        last_width = width;
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx.signum() == g_lo.signum() {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
    }
    Ok(if g_lo.abs() < g_hi.abs() { lo } else { hi })
}

/// Golden-section search for the maximum of a unimodal `h` on `[a, b]`.
///
/// Returns `(argmax, max)`. The endpoints are compared too, so monotone
/// functions return the better boundary.
pub fn golden_section_max<H: Fn(f64) -> f64>(h: H, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut h1 = h(x1);
    let mut h2 = h(x2);
    let mut iter = 0;
    while hi - lo > tol && iter < 10_000 {
        if h1 < h2 {
            lo = x1;
            x1 = x2;
            h1 = h2;
            x2 = lo + inv_phi * (hi - lo);
            h2 = h(x2);
        } else {
            hi = x2;
            x2 = x1;
            h2 = h1;
            x1 = hi - inv_phi * (hi - lo);
            h1 = h(x1);
        }
        iter += 1;
    }
    let mut best = if h1 >= h2 { (x1, h1) } else { (x2, h2) };
    for x in [a, b] {
        let hx = h(x);
        if hx > best.1 {
            best = (x, hx);
        }
    }
    best
}
