//! Closed-form approximations of the receiver in the low-brightness,
//! high-noise regime, and the optimal-order estimates built on them.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use super::{regime_warnings, DmcProbs, ReceiverConfig, RegimeWarning};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::numerics::{g_unchecked, lambert_w0};

fn received_noise_checked(ch: &ChannelParams) -> Result<f64> {
    ch.validate()?;
    let b = ch.received_noise();
    if !(b > 0.0) {
        return Err(Error::domain(
            "n_b",
            ch.n_b,
            "approximations need nonzero received thermal noise",
        ));
    }
    Ok(b)
}

/// `1 - exp(-2 (1 + (1-eta) N_B))`, the large-K value of `1 - mu^K`.
fn gamma(b: f64) -> f64 {
    -(-2.0 * (1.0 + b)).exp_m1()
}

/// Approximate click statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorProbs {
    /// Exponential forms of `p_c`, `p_b` and the `p_e`, `p_d` they imply.
    pub exponential: DmcProbs,
    /// `N_S n M eta gamma / (2 (1-eta) N_B)`.
    pub p_e_linear: f64,
    /// `N_S (1-eta) N_B`.
    pub p_d_linear: f64,
    pub warnings: Vec<RegimeWarning>,
}

pub fn taylor_probs(ch: &ChannelParams, cfg: &ReceiverConfig) -> Result<TaylorProbs> {
    let b = received_noise_checked(ch)?;
    let gm = gamma(b);
    let n = cfg.n_order() as f64;
    let m = cfg.m_modes() as f64;
    let pulse_rate = n * m * ch.eta * gm / (2.0 * b);
    let ln_qb = -ch.n_s * b;
    let ln_qc = -ch.n_s * (pulse_rate + b);
    Ok(TaylorProbs {
        exponential: DmcProbs::from_no_click_logs(ln_qc, ln_qb, cfg.n_order()),
        p_e_linear: ch.n_s * pulse_rate,
        p_d_linear: ch.n_s * b,
        warnings: regime_warnings(ch, cfg.k_stages()),
    })
}

/// Lambert-W estimate of the best code order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalOrder {
    pub u: f64,
    pub v: f64,
    /// Stationary point of `(u + v n) ln n`: `(u/v) / W0(e u/v)`.
    pub n_star: f64,
    /// `log2 X - log2 ln(e X)` with `X = u/v`; `None` when `e X <= 1`.
    pub log2_n_star_approx: Option<f64>,
    /// Set when the estimate falls below order 2.
    pub degenerate: bool,
}

pub fn optimal_order_lambertw(ch: &ChannelParams, m_modes: u64) -> Result<OptimalOrder> {
    let b = received_noise_checked(ch)?;
    if !(ch.n_s > 0.0) {
        return Err(Error::domain("n_s", ch.n_s, "optimal order needs N_S > 0"));
    }
    let gm = gamma(b);
    let m = m_modes as f64;
    let mg = m * ch.eta * gm;
    let u = ch.n_s * mg / (2.0 * b * LN_2);
    let v = ch.n_s * ch.n_s * mg * (mg + 4.0 * b * b) / (8.0 * b * b * LN_2);
    let ratio = 4.0 * b / (ch.n_s * (mg + 4.0 * b * b));
    let n_star = ratio / lambert_w0(ratio * E)?;
    let log_arg = (ratio * E).ln();
    let log2_n_star_approx = (log_arg > 0.0).then(|| ratio.log2() - log_arg.log2());
    Ok(OptimalOrder {
        u,
        v,
        n_star,
        log2_n_star_approx,
        degenerate: !(n_star >= 2.0),
    })
}

/// Approximate envelope rate (bits per mode) from the quadratic-Taylor
/// optimal order.
pub fn rate_approx_jb(ch: &ChannelParams, m_modes: u64) -> Result<f64> {
    let b = received_noise_checked(ch)?;
    if ch.n_s == 0.0 {
        return Ok(0.0);
    }
    let gm = gamma(b);
    let mg = m_modes as f64 * ch.eta * gm;
    let ratio = 4.0 * b / (ch.n_s * (mg + 4.0 * b * b));
    let log_arg = (ratio * E).ln();
    if !(log_arg > 0.0) {
        return Err(Error::domain(
            "n_s",
            ch.n_s,
            "signal too bright for the logarithmic rate approximation",
        ));
    }
    let bracket = ratio.log2() - log_arg.log2() - g_unchecked(2.0 * b * b / mg);
    Ok(ch.eta * ch.n_s * gm / (2.0 * b) * bracket)
}

/// Approximate envelope rate (bits per mode) from the PPM capacity with
/// dark clicks proportional to the per-slot energy.
pub fn rate_approx_ww(ch: &ChannelParams, m_modes: u64) -> Result<f64> {
    ch.validate()?;
    if !(ch.n_b > 0.0) {
        return Err(Error::domain("n_b", ch.n_b, "approximation needs N_B > 0"));
    }
    let m = m_modes as f64;
    let energy = m * ch.eta * ch.n_s / (2.0 * ch.n_b);
    if energy >= 1.0 {
        return Err(Error::domain(
            "E",
            energy,
            "per-slot energy must be below 1",
        ));
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / energy;
    Ok((energy * inv.log2() - energy * inv.ln().log2()) / m)
}

/// PPM-order and idler-brightness estimate for the direct-PPM variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    /// `(E ln(1/E))^-1`.
    pub n_opt: f64,
    /// `n_opt * N_S`, approximately `N_0 / ln(N_0 / N_S)`.
    pub n_times_ns: f64,
    /// Per-slot energy `E = M eta N_S / (2 N_B)`.
    pub energy: f64,
    /// `N_0 = 2 N_B / (M eta)`.
    pub n0: f64,
    /// `E < 1/e`.
    pub in_regime: bool,
}

pub fn ppm_photon_budget(ch: &ChannelParams, m_modes: u64) -> Result<PhotonBudget> {
    ch.validate()?;
    if !(ch.n_b > 0.0) {
        return Err(Error::domain("n_b", ch.n_b, "photon budget needs N_B > 0"));
    }
    let m = m_modes as f64;
    let n0 = 2.0 * ch.n_b / (m * ch.eta);
    let energy = ch.n_s / n0;
    let (n_opt, n_times_ns) = if energy == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let n_opt = 1.0 / (energy * (1.0 / energy).ln());
        (n_opt, n_opt * ch.n_s)
    };
    Ok(PhotonBudget {
        n_opt,
        n_times_ns,
        energy,
        n0,
        in_regime: energy < 1.0 / E,
    })
}

/// Every approximation-side quantity at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxBundle {
    pub gamma: f64,
    pub u_coef: f64,
    pub v_coef: f64,
    pub n_star: f64,
    pub r_approx_jb: Option<f64>,
    pub r_approx_ww: Option<f64>,
    /// Per-slot energy `E`.
    pub cal_e: f64,
    pub n0: f64,
    /// `c = 2 N_B^2 / (M eta)`.
    pub c_dark: f64,
    /// Dark-click probability per slot, `c E`.
    pub lambda_dark: f64,
    pub warnings: Vec<RegimeWarning>,
}

pub fn approx_bundle(ch: &ChannelParams, m_modes: u64) -> Result<ApproxBundle> {
    let b = received_noise_checked(ch)?;
    let order = optimal_order_lambertw(ch, m_modes)?;
    let budget = ppm_photon_budget(ch, m_modes)?;
    let m = m_modes as f64;
    let c_dark = 2.0 * ch.n_b * ch.n_b / (m * ch.eta);
    let mut warnings = Vec::new();
    if order.degenerate {
        warnings.push(RegimeWarning::OrderEstimateDegenerate);
    }
    if budget.energy >= 1.0 {
        warnings.push(RegimeWarning::EnergyPerSlotTooLarge);
    }
    if !budget.in_regime {
        warnings.push(RegimeWarning::PhotonBudgetOutOfRange);
    }
    Ok(ApproxBundle {
        gamma: gamma(b),
        u_coef: order.u,
        v_coef: order.v,
        n_star: order.n_star,
        r_approx_jb: rate_approx_jb(ch, m_modes).ok(),
        r_approx_ww: rate_approx_ww(ch, m_modes).ok(),
        cal_e: budget.energy,
        n0: budget.n0,
        c_dark,
        lambda_dark: c_dark * budget.energy,
        warnings,
    })
}
