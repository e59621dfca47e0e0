//! Capacity and rate models for entanglement-assisted classical communication
//! over the lossy thermal bosonic channel.
//!
//! * [`channel`]: Holevo and entanglement-assisted capacities.
//! * [`receiver`]: the BPSK / Hadamard / FF-SFG / Green-Machine joint
//!   detection receiver, its induced PPM channel and closed-form asymptotics.
//! * [`opa`]: the OPA-receiver benchmark.
//! * [`dmc`]: generic channel oracles (plug-in MI, Blahut-Arimoto, Monte Carlo).
//! * [`covert`]: covert photon budgets and throughput scaling.
//! * [`sweep`]: parameter grids, figure presets and CSV/JSON export.
//!
//! Logarithms are base 2 unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod covert;
pub mod dmc;
pub mod error;
pub mod numerics;
pub mod opa;
pub mod receiver;
pub mod sweep;

pub use channel::{
    ea_capacity, ea_ratio_limit_constant, holevo_capacity, holevo_taylor_leading, ChannelParams,
};
pub use error::{Error, Result};
pub use receiver::{DmcProbs, ReceiverConfig};

/// Crate version, echoed in sweep metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
