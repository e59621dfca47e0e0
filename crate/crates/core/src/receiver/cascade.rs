use serde::{Deserialize, Serialize};

use super::ReceiverConfig;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::numerics::{ln_pow1p, one_minus_exp};

/// Per-stage statistics of the K-stage feed-forward SFG cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeState {
    /// Thermal occupancy of each sum-frequency mode, `kappa N_S N_S'`.
    pub n_t: f64,
    /// Per-stage attenuation `(1 - kappa (1 + N_S'))^2`.
    pub mu: f64,
    /// `n M kappa eta N_S (N_S + 1) / (N_T + 1)`.
    pub a_coef: f64,
    /// `N_1 = M kappa eta N_S (1 + N_S)`; `N_k = N_1 mu^(k-1)`.
    pub n_first: f64,
    pub k_stages: u64,
    /// `(1 - mu^K) / (1 - mu)`.
    pub geometric_sum: f64,
}

impl CascadeState {
    /// Displaced energy `|alpha^(k)|^2` of stage `k` (1-based).
    pub fn n_k(&self, k: u64) -> f64 {
        assert!(
            k >= 1 && k <= self.k_stages,
            "stage index {k} out of 1..={}",
            self.k_stages
        );
        self.n_first * self.mu.powf((k - 1) as f64)
    }

    /// Log no-click probability of one stage on the pulse-containing output.
    pub fn ln_no_click_pulse_stage(&self, k: u64, n_order: u64) -> f64 {
        -self.n_t.ln_1p() - n_order as f64 * self.n_k(k) / (1.0 + self.n_t)
    }

    /// Log no-click probability of one stage on any other output.
    pub fn ln_no_click_other_stage(&self) -> f64 {
        -self.n_t.ln_1p()
    }
}

/// Click statistics of the combined detector outputs and the induced
/// `n`-input, `(n+1)`-output channel they define.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmcProbs {
    /// At least one click on the pulse-containing output.
    pub p_c: f64,
    /// At least one click on a given non-pulse output.
    pub p_b: f64,
    /// Click on the correct output only.
    pub p_e: f64,
    /// Click on one specific wrong output only.
    pub p_d: f64,
}

impl DmcProbs {
    /// Builds the quadruple from `p_c`, `p_b` for order `n`.
    pub fn from_click(p_c: f64, p_b: f64, n_order: u64) -> Result<Self> {
        for (name, p) in [("p_c", p_c), ("p_b", p_b)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(
                    name,
                    p,
                    "click probability must lie in [0, 1]",
                ));
            }
        }
        if n_order < 2 {
            return Err(Error::domain(
                "n_order",
                n_order as f64,
                "PPM order must be at least 2",
            ));
        }
        let ln_qb = (-p_b).ln_1p();
        let p_e = p_c * ((n_order - 1) as f64 * ln_qb).exp();
        let p_d = (1.0 - p_c) * p_b * ((n_order - 2) as f64 * ln_qb).exp();
        Ok(Self { p_c, p_b, p_e, p_d })
    }

    /// From the logs of the two no-click probabilities.
    pub(crate) fn from_no_click_logs(ln_qc: f64, ln_qb: f64, n_order: u64) -> Self {
        let p_c = one_minus_exp(ln_qc);
        let p_b = one_minus_exp(ln_qb);
        let n = n_order as f64;
        let p_e = p_c * ((n - 1.0) * ln_qb).exp();
        let p_d = p_b * (ln_qc + (n - 2.0) * ln_qb).exp();
        Self { p_c, p_b, p_e, p_d }
    }

    /// Probability of a zero-click or multi-click frame.
    pub fn erasure(&self, n_order: u64) -> f64 {
        (1.0 - self.p_e - (n_order - 1) as f64 * self.p_d).max(0.0)
    }

    pub fn validate(&self, n_order: u64) -> Result<()> {
        for (name, p) in [
            ("p_c", self.p_c),
            ("p_b", self.p_b),
            ("p_e", self.p_e),
            ("p_d", self.p_d),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(name, p, "probability must lie in [0, 1]"));
            }
        }
        let used = self.p_e + (n_order - 1) as f64 * self.p_d;
        if used > 1.0 + 1e-12 {
            return Err(Error::Consistency(format!(
                "p_e + (n-1) p_d = {used} exceeds 1 for n = {n_order}"
            )));
        }
        Ok(())
    }
}

/// Cascade statistics for the given channel and receiver.
pub fn cascade_state(ch: &ChannelParams, cfg: &ReceiverConfig) -> Result<CascadeState> {
    ch.validate()?;
    let kappa = cfg.kappa();
    let nsp = ch.n_s_prime();
    let tap = kappa * (1.0 + nsp);
    if tap >= 1.0 {
        return Err(Error::Validity(format!(
            "kappa (1 + N_S') = {tap} >= 1 with {} SFG stages",
            cfg.k_stages()
        )));
    }
    let k = cfg.k_stages() as f64;
    let n_t = kappa * ch.n_s * nsp;
    let mu = (1.0 - tap) * (1.0 - tap);
    // 1 - mu = tap (2 - tap); 1 - mu^K = -expm1(2 K ln(1 - tap)).
    let geometric_sum = -(2.0 * k * (-tap).ln_1p()).exp_m1() / (tap * (2.0 - tap));
    let n_first = cfg.m_modes() as f64 * kappa * ch.eta * ch.n_s * (1.0 + ch.n_s);
    let a_coef = cfg.n_order() as f64 * n_first / (n_t + 1.0);
    Ok(CascadeState {
        n_t,
        mu,
        a_coef,
        n_first,
        k_stages: cfg.k_stages(),
        geometric_sum,
    })
}

/// Click and induced-channel probabilities of the joint detection receiver.
pub fn dmc_probs(ch: &ChannelParams, cfg: &ReceiverConfig) -> Result<DmcProbs> {
    let st = cascade_state(ch, cfg)?;
    let ln_qb = -ln_pow1p(st.n_t, cfg.k_stages() as f64);
    let ln_qc = ln_qb - st.a_coef * st.geometric_sum;
    Ok(DmcProbs::from_no_click_logs(ln_qc, ln_qb, cfg.n_order()))
}
