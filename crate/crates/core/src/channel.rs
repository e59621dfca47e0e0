//! Capacities of the single-mode lossy thermal bosonic channel.
//!
//! All capacities are in bits per channel use (mode).

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{g_diff_unchecked, g_unchecked};

/// Transmissivity, mean transmitted photons and mean thermal photons per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta: f64,
    pub n_s: f64,
    pub n_b: f64,
}

/// Quantities derived from [`ChannelParams`] that appear in the
/// entanglement-assisted capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedChannel {
    /// Mean received photons per mode, `eta * n_s + (1 - eta) * n_b`.
    pub n_s_prime: f64,
    pub d_big: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    /// `n_s_prime - a_plus == n_s - a_minus`, kept for the stable capacity
    /// difference.
    pub(crate) shift: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, n_s: f64, n_b: f64) -> Result<Self> {
        let ch = Self { eta, n_s, n_b };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain(
                "eta",
                self.eta,
                "transmissivity must lie in (0, 1]",
            ));
        }
        if !self.n_s.is_finite() || self.n_s < 0.0 {
            return Err(Error::domain(
                "n_s",
                self.n_s,
                "signal photon number must be finite and >= 0",
            ));
        }
        if !self.n_b.is_finite() || self.n_b < 0.0 {
            return Err(Error::domain(
                "n_b",
                self.n_b,
                "thermal photon number must be finite and >= 0",
            ));
        }
        Ok(())
    }

    /// Same channel with a different signal brightness.
    pub fn with_n_s(&self, n_s: f64) -> Self {
        Self { n_s, ..*self }
    }

    /// Thermal photons reaching the receiver, `(1 - eta) * n_b`.
    pub fn received_noise(&self) -> f64 {
        (1.0 - self.eta) * self.n_b
    }

    pub fn n_s_prime(&self) -> f64 {
        self.eta * self.n_s + self.received_noise()
    }

    pub fn derived(&self) -> DerivedChannel {
        let (eta, ns) = (self.eta, self.n_s);
        let b = self.received_noise();
        let nsp = self.n_s_prime();
        let s = ns + nsp + 1.0;
        // D^2 - 1 expanded so that every term is nonnegative.
        let one_m_eta = 1.0 - eta;
        let q = one_m_eta * one_m_eta * ns * ns
            + 2.0 * one_m_eta * ns
            + b * b
            + 2.0 * b
            + 2.0 * (1.0 + eta) * ns * b;
        let d_big = (1.0 + q).sqrt();
        let shift = 2.0 * eta * ns * (ns + 1.0) / (s + d_big);
        DerivedChannel {
            n_s_prime: nsp,
            d_big,
            a_plus: (nsp - shift).max(0.0),
            a_minus: (ns - shift).max(0.0),
            shift,
        }
    }
}

/// Holevo capacity `g(N_S') - g((1-eta) N_B)`.
pub fn holevo_capacity(ch: &ChannelParams) -> Result<f64> {
    ch.validate()?;
    Ok(holevo_unchecked(ch))
}

pub(crate) fn holevo_unchecked(ch: &ChannelParams) -> f64 {
    g_diff_unchecked(ch.received_noise(), ch.eta * ch.n_s)
}

/// Entanglement-assisted capacity `g(N_S) + g(N_S') - g(A+) - g(A-)`.
pub fn ea_capacity(ch: &ChannelParams) -> Result<f64> {
    ch.validate()?;
    Ok(ea_unchecked(ch))
}

pub(crate) fn ea_unchecked(ch: &ChannelParams) -> f64 {
    let d = ch.derived();
    let eps = d.shift.min(ch.n_s);
    // g(N_S) - g(A-) and g(N_S') - g(A+) share the same increment.
    let signal = g_diff_unchecked(d.a_minus, eps);
    let received = g_diff_unchecked(d.a_plus, eps.min(d.n_s_prime));
    (signal + received).max(0.0)
}

/// Limit of `C_E / (C ln(1/N_S))` as `N_S -> 0`. Zero for a noiseless channel.
pub fn ea_ratio_limit_constant(eta: f64, n_b: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(
            "eta",
            eta,
            "limit constant needs 0 < eta < 1",
        ));
    }
    if !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::domain(
            "n_b",
            n_b,
            "thermal photon number must be finite and >= 0",
        ));
    }
    let b = (1.0 - eta) * n_b;
    if b == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / ((1.0 + b) * (1.0 / b).ln_1p()))
}

/// Leading small-`N_S` term of the Holevo capacity,
/// `eta N_S log2(1 + 1/((1-eta) N_B))`.
pub fn holevo_taylor_leading(ch: &ChannelParams) -> Result<f64> {
    ch.validate()?;
    let b = ch.received_noise();
    if b <= 0.0 {
        return Err(Error::domain(
            "n_b",
            ch.n_b,
            "leading Holevo term diverges without received thermal noise",
        ));
    }
    Ok(ch.eta * ch.n_s * (1.0 / b).ln_1p() / LN_2)
}

/// `C_E / C`; `None` when `C = 0`.
pub fn capacity_ratio(ch: &ChannelParams) -> Result<Option<f64>> {
    let c = holevo_capacity(ch)?;
    if c <= 0.0 {
        return Ok(None);
    }
    Ok(Some(ea_unchecked(ch) / c))
}

/// Direct (unstabilized) evaluation, kept for cross-checks in tests.
#[doc(hidden)]
pub fn ea_capacity_textbook(ch: &ChannelParams) -> f64 {
    let nsp = ch.n_s_prime();
    let s = ch.n_s + nsp + 1.0;
    let d = (s * s - 4.0 * ch.eta * ch.n_s * (ch.n_s + 1.0))
        .max(0.0)
        .sqrt();
    let ap = 0.5 * (d - 1.0 + (nsp - ch.n_s));
    let am = 0.5 * (d - 1.0 - (nsp - ch.n_s));
    g_unchecked(ch.n_s) + g_unchecked(nsp) - g_unchecked(ap.max(0.0)) - g_unchecked(am.max(0.0))
}
