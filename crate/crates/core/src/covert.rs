//! Covert photon budgets and the throughput they allow.
//!
//! Throughputs here are achievability-side estimates: total bits over `m`
//! modes at the largest undetectable brightness. No converse is implied.

use serde::{Deserialize, Serialize};

use crate::channel::{holevo_capacity, ChannelParams};
use crate::error::{Error, Result};
use crate::opa::{opa_capacity_leading, OpaConfig};
use crate::receiver::{hadamard_orders, rate_envelope, DEFAULT_MAX_ORDER_LOG2};

/// Default OPA gain for covert comparisons (the low-gain limit).
pub const DEFAULT_OPA_GAIN: f64 = 1.0001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertBudget {
    pub m_total: u64,
    pub delta: f64,
    /// Largest mean photon number per mode keeping the warden's error
    /// probability at least `1/2 - delta`.
    pub n_s_max: f64,
}

/// `N_S <= sqrt(2 eta N_B (1 + eta N_B)) / (1 - eta) * sqrt(delta / m)`.
pub fn covert_ns_budget(eta: f64, n_b: f64, m_total: u64, delta: f64) -> Result<CovertBudget> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain("eta", eta, "covert budget needs 0 < eta < 1"));
    }
    if !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::domain(
            "n_b",
            n_b,
            "thermal photon number must be finite and >= 0",
        ));
    }
    if m_total == 0 {
        return Err(Error::domain("m", 0.0, "need at least one mode"));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::domain(
            "delta",
            delta,
            "detectability bound must lie in [0, 1/2]",
        ));
    }
    let warden = eta * n_b;
    let n_s_max =
        (2.0 * warden * (1.0 + warden)).sqrt() / (1.0 - eta) * (delta / m_total as f64).sqrt();
    Ok(CovertBudget {
        m_total,
        delta,
        n_s_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ThroughputMode {
    /// Holevo capacity, no entanglement.
    Holevo,
    /// Leading-order OPA-receiver capacity per mode.
    Opa { gain: f64 },
    /// Joint detection receiver envelope over Hadamard orders `2..2^20` at
    /// `m_modes` modes per BPSK symbol. How `m` splits into `M` and `n` is
    /// left to the caller.
    Jdr { m_modes: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertThroughput {
    pub budget: CovertBudget,
    /// Bits per mode at `n_s_max`.
    pub rate_per_mode: f64,
    /// `m * rate_per_mode`.
    pub bits: f64,
    /// Best code order in JDR mode.
    pub n_order: Option<u64>,
}

/// Total bits over `m` modes at the covert brightness. `ch.n_s` is ignored.
pub fn covert_throughput(
    ch: &ChannelParams,
    m_total: u64,
    delta: f64,
    mode: ThroughputMode,
) -> Result<CovertThroughput> {
    let budget = covert_ns_budget(ch.eta, ch.n_b, m_total, delta)?;
    let at = ch.with_n_s(budget.n_s_max);
    let (rate_per_mode, n_order) = match mode {
        ThroughputMode::Holevo => (holevo_capacity(&at)?, None),
        ThroughputMode::Opa { gain } => (
            opa_capacity_leading(&OpaConfig::new(gain, 1, None)?, &at)?,
            None,
        ),
        ThroughputMode::Jdr { m_modes } => {
            let env = rate_envelope(&at, m_modes, &hadamard_orders(DEFAULT_MAX_ORDER_LOG2))?;
            (env.rate, Some(env.n_order))
        }
    };
    Ok(CovertThroughput {
        budget,
        rate_per_mode,
        bits: m_total as f64 * rate_per_mode,
        n_order,
    })
}
