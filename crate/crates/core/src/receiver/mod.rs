//! Analytic model of the BPSK / Hadamard / FF-SFG / Green-Machine joint
//! detection receiver.
//!
//! A Hadamard codeword of order `n` spends `M` modes per BPSK symbol, so one
//! PPM frame is `M * n` channel uses. Mutual information is computed per frame
//! ([`FrameBits`]) and converted explicitly; nothing in this module divides by
//! `M * n` implicitly.

mod approx;
mod cascade;
mod rate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

pub use approx::{
    approx_bundle, optimal_order_lambertw, ppm_photon_budget, rate_approx_jb, rate_approx_ww,
    taylor_probs, ApproxBundle, OptimalOrder, PhotonBudget, TaylorProbs,
};
pub use cascade::{cascade_state, dmc_probs, CascadeState, DmcProbs};
pub(crate) use rate::ppm_mi_bits;
pub use rate::{
    hadamard_orders, ppm_mutual_info, rate_envelope, rate_envelope_with_stages, rate_exact,
    Envelope, DEFAULT_MAX_ORDER_LOG2,
};

/// Receiver-chain parameters: modes per BPSK symbol, code order and SFG
/// cascade depth. The per-stage tap `kappa` is always `1 / k_stages`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverConfig {
    m_modes: u64,
    n_order: u64,
    k_stages: u64,
}

impl ReceiverConfig {
    pub fn new(m_modes: u64, n_order: u64, k_stages: u64) -> Result<Self> {
        if m_modes == 0 {
            return Err(Error::domain(
                "m_modes",
                0.0,
                "need at least one mode per symbol",
            ));
        }
        if n_order < 2 {
            return Err(Error::domain(
                "n_order",
                n_order as f64,
                "PPM order must be at least 2",
            ));
        }
        if k_stages == 0 {
            return Err(Error::domain(
                "k_stages",
                0.0,
                "need at least one SFG stage",
            ));
        }
        Ok(Self {
            m_modes,
            n_order,
            k_stages,
        })
    }

    /// Like [`ReceiverConfig::new`], but requires a Hadamard order (power of 2).
    pub fn hadamard(m_modes: u64, n_order: u64, k_stages: u64) -> Result<Self> {
        if !n_order.is_power_of_two() {
            return Err(Error::domain(
                "n_order",
                n_order as f64,
                "Hadamard codes need a power-of-two order",
            ));
        }
        Self::new(m_modes, n_order, k_stages)
    }

    /// Config with the default cascade depth for this channel.
    pub fn with_default_stages(m_modes: u64, n_order: u64, ch: &ChannelParams) -> Result<Self> {
        Self::new(m_modes, n_order, default_stages(ch.n_b))
    }

    pub fn m_modes(&self) -> u64 {
        self.m_modes
    }

    pub fn n_order(&self) -> u64 {
        self.n_order
    }

    pub fn k_stages(&self) -> u64 {
        self.k_stages
    }

    pub fn kappa(&self) -> f64 {
        1.0 / self.k_stages as f64
    }

    pub fn with_order(&self, n_order: u64) -> Result<Self> {
        Self::new(self.m_modes, n_order, self.k_stages)
    }

    /// Channel uses per PPM frame, `M * n`.
    pub fn frame_modes(&self) -> f64 {
        self.m_modes as f64 * self.n_order as f64
    }
}

/// Default cascade depth `max(1000, ceil(100 N_B))`.
pub fn default_stages(n_b: f64) -> u64 {
    let scaled = (100.0 * n_b).ceil();
    if scaled.is_finite() && scaled > 1000.0 {
        scaled as u64
    } else {
        1000
    }
}

/// Mutual information per PPM frame, in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct FrameBits(pub f64);

impl FrameBits {
    pub fn bits(self) -> f64 {
        self.0
    }

    /// Bits per channel use: divide by the `M * n` modes of a frame.
    pub fn per_mode(self, m_modes: u64, n_order: u64) -> f64 {
        self.0 / (m_modes as f64 * n_order as f64)
    }

    /// Bits per PPM slot (one BPSK symbol of `M` modes).
    pub fn per_slot(self, n_order: u64) -> f64 {
        self.0 / n_order as f64
    }
}

/// Advisory flags for parameters outside the regime
/// `eta N_S << N_S << 1 << N_B << K` where the receiver analysis and its
/// approximations are derived. "<<" is read as a factor of 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeWarning {
    SignalNotSmall,
    NoiseNotLarge,
    TransmissivityNotSmall,
    CascadeTooShallow,
    /// Per-slot energy `E = M eta N_S / (2 N_B)` is not below 1.
    EnergyPerSlotTooLarge,
    /// `E >= 1/e`, outside the region where `E log(1/E)` is monotone.
    PhotonBudgetOutOfRange,
    /// Lambert-W optimal-order estimate fell below order 2.
    OrderEstimateDegenerate,
}

impl RegimeWarning {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeWarning::SignalNotSmall => "signal_not_small",
            RegimeWarning::NoiseNotLarge => "noise_not_large",
            RegimeWarning::TransmissivityNotSmall => "transmissivity_not_small",
            RegimeWarning::CascadeTooShallow => "cascade_too_shallow",
            RegimeWarning::EnergyPerSlotTooLarge => "energy_per_slot_too_large",
            RegimeWarning::PhotonBudgetOutOfRange => "photon_budget_out_of_range",
            RegimeWarning::OrderEstimateDegenerate => "order_estimate_degenerate",
        }
    }
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime checks for the cascade analysis at depth `k_stages`.
pub fn regime_warnings(ch: &ChannelParams, k_stages: u64) -> Vec<RegimeWarning> {
    let mut out = Vec::new();
    if ch.n_s >= 0.1 {
        out.push(RegimeWarning::SignalNotSmall);
    }
    if ch.n_b < 10.0 {
        out.push(RegimeWarning::NoiseNotLarge);
    }
    if ch.eta > 0.1 {
        out.push(RegimeWarning::TransmissivityNotSmall);
    }
    if (k_stages as f64) < 10.0 * ch.n_b {
        out.push(RegimeWarning::CascadeTooShallow);
    }
    out
}
