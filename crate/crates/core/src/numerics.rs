//! Special functions and log-domain helpers.
//!
//! Everything here works in `f64`. Quantities of the form `(1 + x)^k` with
//! `k` in the thousands and `x` tiny are always evaluated as
//! `exp(k * ln_1p(x))`; callers should never form `1.0 + x` first.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::domain("abs_tol", abs_tol, "must be positive"));
        }
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::domain("rel_tol", rel_tol, "must be positive"));
        }
        if max_iter == 0 {
            return Err(Error::domain("max_iter", 0.0, "must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Below this argument `g` switches to its small-x expansion.
const G_SERIES_THRESHOLD: f64 = 1e-10;

/// Entropy in bits of a zero-mean thermal state with mean photon number `x`:
/// `g(x) = (1+x) log2(1+x) - x log2(x)`, with `g(0) = 0`.
pub fn g_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(
            "x",
            x,
            "g(x) needs a finite, nonnegative argument",
        ));
    }
    Ok(g_unchecked(x))
}

pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < G_SERIES_THRESHOLD {
        (x * (1.0 - x.ln()) + 0.5 * x * x) / LN_2
    } else {
        ((1.0 + x) * x.ln_1p() - x * x.ln()) / LN_2
    }
}

/// `g(a + d) - g(a)` without forming the two large entropies separately.
///
/// Uses `(1+a)ln(1+d/(1+a)) - a ln(1+d/a) + d ln(1 + 1/(a+d))`; the first two
/// terms cancel to second order in `d`, the last carries the result.
pub fn g_entropy_diff(a: f64, d: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::domain(
            "a",
            a,
            "g difference needs a nonnegative base",
        ));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain(
            "d",
            d,
            "g difference needs a nonnegative increment",
        ));
    }
    Ok(g_diff_unchecked(a, d))
}

pub(crate) fn g_diff_unchecked(a: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return g_unchecked(d);
    }
    let upper = (1.0 + a) * (d / (1.0 + a)).ln_1p();
    let lower = a * (d / a).ln_1p();
    let tail = d * (1.0 / (a + d)).ln_1p();
    (upper - lower + tail) / LN_2
}

/// `ln(1 + x)` for `x > -1`.
pub fn log1p_stable(x: f64) -> Result<f64> {
    if x.is_nan() || x <= -1.0 {
        return Err(Error::domain("x", x, "log1p needs x > -1"));
    }
    Ok(x.ln_1p())
}

/// `exp(x) - 1`.
pub fn expm1_stable(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("x", x, "expm1 of NaN"));
    }
    Ok(x.exp_m1())
}

/// `base^exponent` evaluated as `exp(exponent * ln(base))`, using `ln_1p`
/// when `base` is close to one.
pub fn pow_log_domain(base: f64, exponent: f64) -> Result<f64> {
    if !(base > 0.0) || !base.is_finite() {
        return Err(Error::domain(
            "base",
            base,
            "power base must be positive and finite",
        ));
    }
    if exponent.is_nan() {
        return Err(Error::domain("exponent", exponent, "exponent is NaN"));
    }
    Ok((exponent * ln_near_one(base)).exp())
}

fn ln_near_one(base: f64) -> f64 {
    // base - 1 is exact for base in [0.5, 2].
    if (0.5..=2.0).contains(&base) {
        (base - 1.0).ln_1p()
    } else {
        base.ln()
    }
}

/// `k * ln(1 + x)`, the log of `(1 + x)^k`.
pub(crate) fn ln_pow1p(x: f64, k: f64) -> f64 {
    k * x.ln_1p()
}

/// `1 - exp(log_q)` for `log_q <= 0`, i.e. a probability from the log of its
/// complement.
pub(crate) fn one_minus_exp(log_q: f64) -> f64 {
    -log_q.exp_m1()
}

/// `(1+t) ln(1+t) - t`, accurate for small `|t|`. Nonnegative for `t >= -1`.
pub(crate) fn xlogx_excess(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        t2 * (0.5 - t / 6.0 + t2 / 12.0 - t * t2 / 20.0)
    } else if t == -1.0 {
        1.0
    } else {
        (1.0 + t) * t.ln_1p() - t
    }
}

const INV_E: f64 = 1.0 / E;

/// Principal branch `W0` of the Lambert W function: the `w >= -1` with
/// `w e^w = x`.
///
/// Halley iteration on `w - x e^{-w}` (the defining equation scaled by
/// `e^{-w}`, which cannot overflow), seeded by a branch-point series near
/// `-1/e`, `ln(1+x)` for moderate `x`, and `ln x - ln ln x` above `e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("x", x, "Lambert W of NaN"));
    }
    // Allow a few ulp of slack so that a rounded -1/e maps to the branch point.
    let branch = -INV_E;
    if x < branch - 4.0 * f64::EPSILON * INV_E {
        return Err(Error::domain("x", x, "Lambert W0 needs x >= -1/e"));
    }
    if x <= branch {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..64 {
        let r = w - x * (-w).exp();
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = r / (wp1 - (w + 2.0) * r / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-14 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x <= E {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Evenly spaced samples on a log scale, endpoints included.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            // base 10 so that decade grids land on exact powers of ten
            let (a, b) = (start.log10(), stop.log10());
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| match i {
                    0 => start,
                    i if i == count - 1 => stop,
                    i => 10f64.powf(a + step * i as f64),
                })
                .collect()
        }
    }
}
