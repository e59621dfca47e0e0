use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{default_stages, dmc_probs, DmcProbs, FrameBits, ReceiverConfig};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Largest Hadamard order `2^20` used by default for envelopes.
pub const DEFAULT_MAX_ORDER_LOG2: u32 = 20;

/// `2^1, 2^2, ..., 2^max_log2`.
pub fn hadamard_orders(max_log2: u32) -> Vec<u64> {
    (1..=max_log2.min(63)).map(|j| 1u64 << j).collect()
}

/// Mutual information of the induced PPM channel under a uniform prior, in
/// bits per frame:
///
/// `p_e log n + (n-1) p_d log(n p_d / p_e) - (p_e + (n-1) p_d) log(1 + (n-1) p_d / p_e)`.
///
/// Evaluated as `p_e [log(n/(1+r)) + r log(n r / ((n-1)(1+r)))]` with
/// `r = (n-1) p_d / p_e`, which has no large cancelling terms. Returns zero
/// when `p_e = 0`.
pub fn ppm_mutual_info(probs: &DmcProbs, n_order: u64) -> FrameBits {
    FrameBits(ppm_mi_bits(probs.p_e, probs.p_d, n_order))
}

pub(crate) fn ppm_mi_bits(p_e: f64, p_d: f64, n_order: u64) -> f64 {
    if !(p_e > 0.0) || n_order < 2 {
        return 0.0;
    }
    let n = n_order as f64;
    let r = (n - 1.0) * p_d / p_e;
    let mut nats = n.ln() - r.ln_1p();
    if r > 0.0 {
        nats += r * ((n / (n - 1.0)).ln() + r.ln() - r.ln_1p());
    }
    (p_e * nats / LN_2).max(0.0)
}

/// Rate of the modulation/code/receiver combination in bits per mode.
pub fn rate_exact(ch: &ChannelParams, cfg: &ReceiverConfig) -> Result<f64> {
    let probs = dmc_probs(ch, cfg)?;
    Ok(ppm_mutual_info(&probs, cfg.n_order()).per_mode(cfg.m_modes(), cfg.n_order()))
}

/// Best rate over a set of code orders and the order attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// Bits per mode.
    pub rate: f64,
    pub n_order: u64,
}

/// Envelope over `n_grid` with the default cascade depth.
pub fn rate_envelope(ch: &ChannelParams, m_modes: u64, n_grid: &[u64]) -> Result<Envelope> {
    rate_envelope_with_stages(ch, m_modes, default_stages(ch.n_b), n_grid)
}

/// Envelope over `n_grid` at cascade depth `k_stages`. Ties go to the
/// smaller order.
pub fn rate_envelope_with_stages(
    ch: &ChannelParams,
    m_modes: u64,
    k_stages: u64,
    n_grid: &[u64],
) -> Result<Envelope> {
    let mut orders = n_grid.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let mut best: Option<Envelope> = None;
    for n in orders {
        let cfg = ReceiverConfig::new(m_modes, n, k_stages)?;
        let rate = rate_exact(ch, &cfg)?;
        if best.is_none_or(|b| rate > b.rate) {
            best = Some(Envelope { rate, n_order: n });
        }
    }
    best.ok_or_else(|| Error::Grid("empty code-order grid".into()))
}
