//! Entanglement-assisted benchmark with an OPA receiver: BPSK on `M`-mode
//! TMSV blocks, an optical parametric amplifier of gain `G`, and photon
//! counting over the block.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::numerics::xlogx_excess;

/// Gain, block length and (optionally fixed) prior `P(theta = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaConfig {
    pub gain: f64,
    pub m_modes: u64,
    pub q_prior: Option<f64>,
}

impl OpaConfig {
    pub fn new(gain: f64, m_modes: u64, q_prior: Option<f64>) -> Result<Self> {
        let cfg = Self {
            gain,
            m_modes,
            q_prior,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 1.0) || !self.gain.is_finite() {
            return Err(Error::domain("gain", self.gain, "OPA gain must exceed 1"));
        }
        if self.m_modes == 0 {
            return Err(Error::domain(
                "m_modes",
                0.0,
                "block length must be at least 1",
            ));
        }
        if let Some(q) = self.q_prior {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::domain("q_prior", q, "prior must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theta {
    Zero,
    Pi,
}

/// Received statistics at the OPA output.
///
/// `ns_prime_opa` is `eta N_S + (1-eta) N_B + 1`, which is *not* the main
/// channel's `N_S'` (no `+1` there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaDerived {
    /// Signal-idler cross-correlation `sqrt(eta N_S (N_S + 1))`.
    pub c_p: f64,
    pub n_theta_0: f64,
    pub n_theta_pi: f64,
    /// `1 + (1-eta) N_B`.
    pub n_b_prime: f64,
    pub ns_prime_opa: f64,
    /// `n_theta_0 - n_theta_pi`, computed without cancellation.
    pub spread: f64,
}

impl OpaDerived {
    pub fn new(cfg: &OpaConfig, ch: &ChannelParams) -> Result<Self> {
        cfg.validate()?;
        ch.validate()?;
        let g = cfg.gain;
        let c_p = (ch.eta * ch.n_s * (ch.n_s + 1.0)).sqrt();
        let ns_prime_opa = ch.eta * ch.n_s + (1.0 - ch.eta) * ch.n_b + 1.0;
        let base = g * ch.n_s + (g - 1.0) * ns_prime_opa;
        let cross = 2.0 * c_p * (g * (g - 1.0)).sqrt();
        let n_theta_pi = base - cross;
        if n_theta_pi < 0.0 {
            return Err(Error::domain(
                "n_theta_pi",
                n_theta_pi,
                "negative mean photon number at the OPA output",
            ));
        }
        Ok(Self {
            c_p,
            n_theta_0: base + cross,
            n_theta_pi,
            n_b_prime: 1.0 + (1.0 - ch.eta) * ch.n_b,
            ns_prime_opa,
            spread: 2.0 * cross,
        })
    }

    pub fn mean(&self, theta: Theta) -> f64 {
        match theta {
            Theta::Zero => self.n_theta_0,
            Theta::Pi => self.n_theta_pi,
        }
    }
}

fn ln_binom_multiset(k: u64, m: u64) -> f64 {
    // ln C(k + M - 1, k)
    if k == 0 || m == 1 {
        return 0.0;
    }
    ln_gamma((k + m) as f64) - ln_gamma((k + 1) as f64) - ln_gamma(m as f64)
}

fn ln_pmf(k: u64, mean: f64, m: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -(m as f64) * mean.ln_1p() + ln_binom_multiset(k, m) + k as f64 * (mean.ln() - mean.ln_1p())
}

/// Probability of `k` counts over the `M`-mode block given phase `theta`.
pub fn photon_count_pmf(k: u64, theta: Theta, cfg: &OpaConfig, ch: &ChannelParams) -> Result<f64> {
    let d = OpaDerived::new(cfg, ch)?;
    Ok(ln_pmf(k, d.mean(theta), cfg.m_modes).exp())
}

/// Largest count summed over before giving up.
const K_MAX_BUDGET: u64 = 1 << 26;
const TAIL_MASS: f64 = 1e-12;

/// Upper bound on `P(N > k)` for the count distribution with the given mean.
fn tail_bound(k: u64, mean: f64, m: u64) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let p = mean / (1.0 + mean);
    let next = k + 1;
    let ratio = (next + m) as f64 / (next + 1) as f64 * p;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    ln_pmf(next, mean, m).exp() / (1.0 - ratio)
}

/// Cutoff with tail mass below `1e-12` for both phases.
pub fn truncation_point(cfg: &OpaConfig, ch: &ChannelParams) -> Result<u64> {
    let d = OpaDerived::new(cfg, ch)?;
    let m = cfg.m_modes;
    let top = d.n_theta_0;
    let mf = m as f64;
    let mut k_max = (mf * top + 20.0 * (mf * top * (1.0 + top)).sqrt())
        .ceil()
        .max(16.0) as u64;
    loop {
        let tail = tail_bound(k_max, top, m);
        if tail < TAIL_MASS {
            return Ok(k_max);
        }
        if k_max >= K_MAX_BUDGET {
            return Err(Error::Resolution { k_max, tail });
        }
        k_max = (2 * k_max).min(K_MAX_BUDGET);
    }
}

/// Count statistics tabulated up to a cutoff, reusable across priors.
struct CountTable {
    /// `ln P(k | pi)`.
    ln_pi: Vec<f64>,
    /// `ln P(k | 0) - ln P(k | pi)`.
    llr: Vec<f64>,
}

impl CountTable {
    fn new(d: &OpaDerived, m: u64, k_max: u64) -> Self {
        let mf = m as f64;
        let n_pi = d.n_theta_pi;
        let len = k_max as usize + 1;
        let mut ln_pi = Vec::with_capacity(len);
        let mut llr = Vec::with_capacity(len);
        let rel_1p = (d.spread / (1.0 + n_pi)).ln_1p();
        let per_count = if n_pi > 0.0 {
            (d.spread / n_pi).ln_1p() - rel_1p
        } else {
            f64::INFINITY
        };
        let ln_p = if n_pi > 0.0 {
            n_pi.ln() - n_pi.ln_1p()
        } else {
            f64::NEG_INFINITY
        };
        let mut ln_mass = -mf * n_pi.ln_1p();
        for k in 0..=k_max {
            if k > 0 {
                ln_mass += ((k - 1 + m) as f64 / k as f64).ln() + ln_p;
            }
            ln_pi.push(ln_mass);
            let l = -mf * rel_1p + if k == 0 { 0.0 } else { k as f64 * per_count };
            llr.push(l);
        }
        Self { ln_pi, llr }
    }

    /// `I(theta; N)` in bits for prior `q = P(theta = 0)`.
    fn mutual_info(&self, q: f64) -> f64 {
        if q <= 0.0 || q >= 1.0 {
            return 0.0;
        }
        let qc = 1.0 - q;
        let mut nats = 0.0;
        for (&ln_pi, &l) in self.ln_pi.iter().zip(&self.llr) {
            // ln P(k) - ln P(k|pi) and posterior shift d = P(0|k) - q.
            let (ln_mix, shift) = if l <= 0.0 {
                let e = l.exp_m1();
                ((q * e).ln_1p(), q * qc * e / (1.0 + q * e))
            } else {
                let e = (-l).exp_m1();
                (l + (qc * e).ln_1p(), -q * qc * e / (1.0 + qc * e))
            };
            let weight = (ln_pi + ln_mix).exp();
            if weight == 0.0 {
                continue;
            }
            let kl = q * xlogx_excess(shift / q) + qc * xlogx_excess(-shift / qc);
            nats += weight * kl;
        }
        nats / LN_2
    }
}

/// Exact mutual information and the prior that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaMutualInfo {
    /// Bits per `M`-mode block.
    pub bits: f64,
    pub q_star: f64,
    pub k_max: u64,
}

/// `I(theta; N)` by truncated summation, maximized over the prior by
/// golden-section search unless `cfg.q_prior` is set.
pub fn opa_mutual_info(cfg: &OpaConfig, ch: &ChannelParams) -> Result<OpaMutualInfo> {
    let k_max = truncation_point(cfg, ch)?;
    opa_mutual_info_truncated(cfg, ch, k_max)
}

/// As [`opa_mutual_info`] with an explicit cutoff.
pub fn opa_mutual_info_truncated(
    cfg: &OpaConfig,
    ch: &ChannelParams,
    k_max: u64,
) -> Result<OpaMutualInfo> {
    let d = OpaDerived::new(cfg, ch)?;
    let table = CountTable::new(&d, cfg.m_modes, k_max);
    let (q_star, bits) = match cfg.q_prior {
        Some(q) => (q, table.mutual_info(q)),
        None => golden_section_max(|q| table.mutual_info(q), 0.0, 1.0, 1e-10),
    };
    Ok(OpaMutualInfo {
        bits,
        q_star,
        k_max,
    })
}

/// Mutual information at 21 evenly spaced priors, for checking concavity.
pub fn mutual_info_prior_scan(cfg: &OpaConfig, ch: &ChannelParams) -> Result<Vec<(f64, f64)>> {
    let k_max = truncation_point(cfg, ch)?;
    let d = OpaDerived::new(cfg, ch)?;
    let table = CountTable::new(&d, cfg.m_modes, k_max);
    Ok((0..=20)
        .map(|i| {
            let q = i as f64 / 20.0;
            (q, table.mutual_info(q))
        })
        .collect())
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizer of a unimodal function on `[lo, hi]`; returns `(argmax, max)`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Leading small-`N_S` term of the OPA capacity, in bits per block:
/// `2 eta G M N_S / (N_B' (G + (1-eta)(G-1) N_B))`, converted from nats.
pub fn opa_capacity_leading(cfg: &OpaConfig, ch: &ChannelParams) -> Result<f64> {
    cfg.validate()?;
    ch.validate()?;
    let g = cfg.gain;
    let b = ch.received_noise();
    let nats = 2.0 * ch.eta * g * cfg.m_modes as f64 * ch.n_s / ((1.0 + b) * (g + b * (g - 1.0)));
    Ok(nats / LN_2)
}

/// `opa_capacity_leading / (M * holevo_taylor_leading)`; independent of
/// `M`, `N_S` and (given `(1-eta) N_B`) of `eta`.
pub fn opa_gain_ratio(cfg: &OpaConfig, ch: &ChannelParams) -> Result<f64> {
    cfg.validate()?;
    ch.validate()?;
    let b = ch.received_noise();
    if !(b > 0.0) {
        return Err(Error::domain(
            "n_b",
            ch.n_b,
            "gain ratio needs received thermal noise",
        ));
    }
    let g = cfg.gain;
    Ok(2.0 * g / ((1.0 + b) * (g + b * (g - 1.0)) * (1.0 / b).ln_1p()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::holevo_taylor_leading;

    fn ch(n_s: f64) -> ChannelParams {
        ChannelParams::new(0.01, n_s, 10.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(OpaConfig::new(1.0, 1, None).is_err());
        assert!(OpaConfig::new(1.1, 0, None).is_err());
        assert!(OpaConfig::new(1.1, 1, Some(1.5)).is_err());
    }

    #[test]
    fn derived_means() {
        let cfg = OpaConfig::new(1.01, 1, None).unwrap();
        let d = OpaDerived::new(&cfg, &ch(1e-3)).unwrap();
        assert!(d.n_theta_0 > d.n_theta_pi);
        assert!((d.n_theta_0 - d.n_theta_pi - d.spread).abs() < 1e-15);
        assert!((d.ns_prime_opa - (0.01 * 1e-3 + 9.9 + 1.0)).abs() < 1e-14);
        assert!((d.n_b_prime - 10.9).abs() < 1e-14);
    }

    #[test]
    fn pmf_zero_count_and_normalization() {
        let cfg = OpaConfig::new(1.01, 50, None).unwrap();
        let p = ch(1e-3);
        let d = OpaDerived::new(&cfg, &p).unwrap();
        for theta in [Theta::Zero, Theta::Pi] {
            let n = d.mean(theta);
            let p0 = photon_count_pmf(0, theta, &cfg, &p).unwrap();
            assert!((p0 / (1.0 + n).powf(-50.0) - 1.0).abs() < 1e-13);
            let k_max = truncation_point(&cfg, &p).unwrap();
            let (mut total, mut mean) = (0.0, 0.0);
            for k in 0..=k_max {
                let pk = photon_count_pmf(k, theta, &cfg, &p).unwrap();
                total += pk;
                mean += k as f64 * pk;
            }
            assert!((total - 1.0).abs() < 1e-10);
            assert!((mean / (50.0 * n) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn recurrence_table_matches_pmf() {
        let cfg = OpaConfig::new(1.05, 200, None).unwrap();
        let p = ch(1e-2);
        let d = OpaDerived::new(&cfg, &p).unwrap();
        let table = CountTable::new(&d, 200, 400);
        for k in [0u64, 1, 17, 150, 400] {
            let direct = ln_pmf(k, d.n_theta_pi, 200);
            assert!((table.ln_pi[k as usize] - direct).abs() < 1e-10);
            let l = ln_pmf(k, d.n_theta_0, 200) - direct;
            assert!((table.llr[k as usize] - l).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_signal_carries_nothing() {
        let cfg = OpaConfig::new(1.01, 10, None).unwrap();
        let mi = opa_mutual_info(&cfg, &ch(0.0)).unwrap();
        assert_eq!(mi.bits, 0.0);
        let fixed = OpaConfig::new(1.01, 10, Some(0.3)).unwrap();
        assert_eq!(opa_mutual_info(&fixed, &ch(0.0)).unwrap().bits, 0.0);
    }

    #[test]
    fn exact_vs_leading_order() {
        // Truncated sum at 40 digits (mpmath): 2.3889207347e-6 bits at q = 1/2.
        let cfg = OpaConfig::new(1.01, 1, None).unwrap();
        let p = ch(1e-3);
        let lead = opa_capacity_leading(&cfg, &p).unwrap();
        assert!((lead * LN_2 / 1.6710649316269718e-6 - 1.0).abs() < 1e-12);
        let mi = opa_mutual_info(&cfg, &p).unwrap();
        assert!((mi.bits / lead - 1.0).abs() < 0.05);
        let half = opa_mutual_info(&OpaConfig::new(1.01, 1, Some(0.5)).unwrap(), &p).unwrap();
        assert!((half.bits / 2.388920734719685e-6 - 1.0).abs() < 1e-6);
        assert!(mi.bits >= half.bits);
    }

    #[test]
    fn optimal_prior_tends_to_half() {
        let cfg = OpaConfig::new(1.01, 10, None).unwrap();
        let q_far = opa_mutual_info(&cfg, &ch(1e-2)).unwrap().q_star;
        let q_near = opa_mutual_info(&cfg, &ch(1e-7)).unwrap().q_star;
        assert!((q_near - 0.5).abs() < 1e-3);
        assert!((q_near - 0.5).abs() <= (q_far - 0.5).abs() + 1e-9);
    }

    #[test]
    fn concave_in_prior() {
        for n_s in [1e-6, 1e-3, 0.1] {
            let cfg = OpaConfig::new(1.2, 20, None).unwrap();
            let scan = mutual_info_prior_scan(&cfg, &ch(n_s)).unwrap();
            for w in scan.windows(3) {
                let second = w[0].1 - 2.0 * w[1].1 + w[2].1;
                assert!(second <= 1e-15 * w[1].1.max(1e-300), "n_s={n_s}: {second}");
            }
        }
    }

    #[test]
    fn at_most_one_bit() {
        let cfg = OpaConfig::new(3.0, 100, None).unwrap();
        let bright = ChannelParams::new(0.9, 5.0, 0.1).unwrap();
        let mi = opa_mutual_info(&cfg, &bright).unwrap();
        assert!(mi.bits <= 1.0 + 1e-9 && mi.bits > 0.99, "{mi:?}");
    }

    #[test]
    fn truncation_is_converged() {
        let cfg = OpaConfig::new(1.01, 100, Some(0.5)).unwrap();
        let p = ch(1e-4);
        let k = truncation_point(&cfg, &p).unwrap();
        let a = opa_mutual_info_truncated(&cfg, &p, k).unwrap().bits;
        let b = opa_mutual_info_truncated(&cfg, &p, 2 * k).unwrap().bits;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gain_ratio_properties() {
        let p = ch(1e-6);
        let ratio = |g: f64, m: u64, p: &ChannelParams| {
            opa_gain_ratio(&OpaConfig::new(g, m, None).unwrap(), p).unwrap()
        };
        // closed form agrees with the defining quotient
        let cfg = OpaConfig::new(1.3, 7, None).unwrap();
        let quotient =
            opa_capacity_leading(&cfg, &p).unwrap() / (7.0 * holevo_taylor_leading(&p).unwrap());
        assert!((quotient / ratio(1.3, 7, &p) - 1.0).abs() < 1e-12);
        for m in [1, 10, 100] {
            assert!((ratio(1.01, m, &p) - ratio(1.01, 1, &p)).abs() < 1e-15);
        }
        let big = ChannelParams::new(0.01, 1e-6, 1e6).unwrap();
        assert!(ratio(2.0, 1, &big) < 2.0);
        // G -> 1 then N_B -> inf approaches 2 from below
        let r = ratio(
            1.0 + 1e-12,
            1,
            &ChannelParams::new(0.01, 1e-6, 1e4).unwrap(),
        );
        assert!((r - 2.0).abs() < 1e-3 && r < 2.0);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, y) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        // f is flat to rounding within sqrt(eps) of the peak
        assert!((x - 0.3).abs() < 1e-7);
        assert!((y - 2.0).abs() < 1e-15);
    }
}
