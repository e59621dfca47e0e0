use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::receiver::{
    cascade_state, dmc_probs, ppm_mi_bits, CascadeState, DmcProbs, ReceiverConfig,
};

/// Classified outcome of one PPM frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    /// Single click on this (wrong) output index.
    Wrong(u64),
    /// No click, or more than one.
    Erasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// One Bernoulli for the pulse output, one binomial count for the rest.
    #[default]
    Collapsed,
    /// Every SFG stage of every output sampled separately.
    Stages,
}

/// Generator for trial `index`; independent of how trials are scheduled.
fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn wrong_index<R: Rng + ?Sized>(rng: &mut R, n_order: u64, codeword: u64) -> u64 {
    let j = rng.random_range(0..n_order - 1);
    if j >= codeword {
        j + 1
    } else {
        j
    }
}

fn classify(pulse_click: bool, other_clicks: u64) -> Option<Outcome> {
    match (pulse_click, other_clicks) {
        (true, 0) => Some(Outcome::Correct),
        (false, 1) => None,
        _ => Some(Outcome::Erasure),
    }
}

struct Collapsed {
    p_c: f64,
    others: Binomial,
}

impl Collapsed {
    fn new(probs: &DmcProbs, n_order: u64) -> Result<Self> {
        let others = Binomial::new(n_order - 1, probs.p_b)
            .map_err(|e| Error::Consistency(format!("binomial sampler: {e}")))?;
        Ok(Self {
            p_c: probs.p_c,
            others,
        })
    }

    fn trial<R: Rng + ?Sized>(&self, n_order: u64, codeword: u64, rng: &mut R) -> Outcome {
        let pulse = rng.random::<f64>() < self.p_c;
        let others = self.others.sample(rng);
        classify(pulse, others)
            .unwrap_or_else(|| Outcome::Wrong(wrong_index(rng, n_order, codeword)))
    }
}

/// One frame with the collapsed sampler.
pub fn mc_click_trial<R: Rng + ?Sized>(
    probs: &DmcProbs,
    n_order: u64,
    codeword: u64,
    rng: &mut R,
) -> Result<Outcome> {
    probs.validate(n_order)?;
    if codeword >= n_order {
        return Err(Error::domain(
            "codeword",
            codeword as f64,
            "index must be below n",
        ));
    }
    Ok(Collapsed::new(probs, n_order)?.trial(n_order, codeword, rng))
}

struct Stages {
    /// Click probability of each stage on the pulse output.
    pulse: Vec<f64>,
    /// Click probability of any stage on another output.
    other: f64,
}

impl Stages {
    fn new(st: &CascadeState, n_order: u64) -> Self {
        let pulse = (1..=st.k_stages)
            .map(|k| -st.ln_no_click_pulse_stage(k, n_order).exp_m1())
            .collect();
        Self {
            pulse,
            other: -st.ln_no_click_other_stage().exp_m1(),
        }
    }

    fn trial<R: Rng + ?Sized>(&self, n_order: u64, codeword: u64, rng: &mut R) -> Outcome {
        // Draw every stage so the stream layout does not depend on earlier outcomes.
        let mut pulse = false;
        for &p in &self.pulse {
            pulse |= rng.random::<f64>() < p;
        }
        let mut clicks = 0;
        let mut last = 0;
        for out in (0..n_order).filter(|&j| j != codeword) {
            let mut click = false;
            for _ in 0..self.pulse.len() {
                click |= rng.random::<f64>() < self.other;
            }
            if click {
                clicks += 1;
                last = out;
            }
        }
        classify(pulse, clicks).unwrap_or(Outcome::Wrong(last))
    }
}

/// One frame with every SFG stage sampled; `O(n K)` draws.
pub fn mc_click_trial_stages<R: Rng + ?Sized>(
    ch: &ChannelParams,
    cfg: &ReceiverConfig,
    codeword: u64,
    rng: &mut R,
) -> Result<Outcome> {
    if codeword >= cfg.n_order() {
        return Err(Error::domain(
            "codeword",
            codeword as f64,
            "index must be below n",
        ));
    }
    let st = cascade_state(ch, cfg)?;
    Ok(Stages::new(&st, cfg.n_order()).trial(cfg.n_order(), codeword, rng))
}

/// Outcome tallies; `wrong` counts all wrong single clicks together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct McCounts {
    pub correct: u64,
    pub wrong: u64,
    pub erasure: u64,
}

impl McCounts {
    fn record(mut self, outcome: Outcome) -> Self {
        match outcome {
            Outcome::Correct => self.correct += 1,
            Outcome::Wrong(_) => self.wrong += 1,
            Outcome::Erasure => self.erasure += 1,
        }
        self
    }

    fn merge(self, other: Self) -> Self {
        Self {
            correct: self.correct + other.correct,
            wrong: self.wrong + other.wrong,
            erasure: self.erasure + other.erasure,
        }
    }

    pub fn total(&self) -> u64 {
        self.correct + self.wrong + self.erasure
    }
}

/// Binomial standard errors of the three estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McStdErr {
    pub p_e: f64,
    pub p_d: f64,
    pub p_erasure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub n_order: u64,
    pub p_e_hat: f64,
    /// Per specific wrong output: wrong count over `(n-1) trials`.
    pub p_d_hat: f64,
    pub p_erasure_hat: f64,
    pub std_err: McStdErr,
    pub seed: u64,
    pub sampler: Sampler,
    pub counts: McCounts,
}

fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn z_score(hat: f64, exact: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        (hat - exact) / sigma
    } else if hat == exact {
        0.0
    } else {
        f64::INFINITY
    }
}

impl McEstimate {
    fn from_counts(counts: McCounts, n_order: u64, seed: u64, sampler: Sampler) -> Self {
        let trials = counts.total();
        let t = trials as f64;
        let wrong_outputs = (n_order - 1) as f64;
        let p_e_hat = counts.correct as f64 / t;
        let wrong_frac = counts.wrong as f64 / t;
        let p_erasure_hat = counts.erasure as f64 / t;
        Self {
            trials,
            n_order,
            p_e_hat,
            p_d_hat: wrong_frac / wrong_outputs,
            p_erasure_hat,
            std_err: McStdErr {
                p_e: binomial_se(p_e_hat, trials),
                p_d: binomial_se(wrong_frac, trials) / wrong_outputs,
                p_erasure: binomial_se(p_erasure_hat, trials),
            },
            seed,
            sampler,
            counts,
        }
    }

    /// Deviations from the analytic values in units of the analytic
    /// binomial standard error: `(z_e, z_d, z_erasure)`.
    pub fn z_scores(&self, probs: &DmcProbs) -> (f64, f64, f64) {
        let wrong_outputs = (self.n_order - 1) as f64;
        let wrong = wrong_outputs * probs.p_d;
        let erasure = probs.erasure(self.n_order);
        (
            z_score(self.p_e_hat, probs.p_e, binomial_se(probs.p_e, self.trials)),
            z_score(
                self.p_d_hat * wrong_outputs,
                wrong,
                binomial_se(wrong, self.trials),
            ),
            z_score(
                self.p_erasure_hat,
                erasure,
                binomial_se(erasure, self.trials),
            ),
        )
    }

    pub fn max_abs_z(&self, probs: &DmcProbs) -> f64 {
        let (a, b, c) = self.z_scores(probs);
        a.abs().max(b.abs()).max(c.abs())
    }

    /// Plug-in mutual information of the estimated channel, bits per frame.
    pub fn mutual_info_hat(&self) -> f64 {
        ppm_mi_bits(self.p_e_hat, self.p_d_hat, self.n_order)
    }
}

/// Collapsed-sampler estimate; see [`mc_estimate_with`].
pub fn mc_estimate(
    ch: &ChannelParams,
    cfg: &ReceiverConfig,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_estimate_with(ch, cfg, trials, seed, Sampler::Collapsed)
}

/// Frequencies over `trials` frames. Trial `i` draws from ChaCha8 keyed by
/// `seed` on stream `i`, and tallies are integers, so the result is the same
/// for any thread count.
pub fn mc_estimate_with(
    ch: &ChannelParams,
    cfg: &ReceiverConfig,
    trials: u64,
    seed: u64,
    sampler: Sampler,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "need at least one trial"));
    }
    let n = cfg.n_order();
    let counts = match sampler {
        Sampler::Collapsed => {
            let probs = dmc_probs(ch, cfg)?;
            probs.validate(n)?;
            let s = Collapsed::new(&probs, n)?;
            run(trials, seed, n, |cw, rng| s.trial(n, cw, rng))
        }
        Sampler::Stages => {
            let s = Stages::new(&cascade_state(ch, cfg)?, n);
            run(trials, seed, n, |cw, rng| s.trial(n, cw, rng))
        }
    };
    Ok(McEstimate::from_counts(counts, n, seed, sampler))
}

fn run<F>(trials: u64, seed: u64, n_order: u64, trial: F) -> McCounts
where
    F: Fn(u64, &mut ChaCha8Rng) -> Outcome + Sync,
{
    (0..trials)
        .into_par_iter()
        .fold(McCounts::default, |acc, i| {
            let mut rng = trial_rng(seed, i);
            let codeword = rng.random_range(0..n_order);
            acc.record(trial(codeword, &mut rng))
        })
        .reduce(McCounts::default, McCounts::merge)
}

/// Plug-in MI of an estimate with its bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMi {
    /// Bits per frame.
    pub mi_hat: f64,
    pub std_err: f64,
    pub resamples: u32,
}

/// Multinomial bootstrap of the plug-in mutual information.
pub fn bootstrap_mutual_info(est: &McEstimate, resamples: u32, seed: u64) -> Result<BootstrapMi> {
    if resamples < 2 {
        return Err(Error::domain(
            "resamples",
            resamples as f64,
            "need at least two resamples",
        ));
    }
    let t = est.trials;
    let p_correct = est.counts.correct as f64 / t as f64;
    let rest = 1.0 - p_correct;
    let p_wrong_given = if rest > 0.0 {
        (est.counts.wrong as f64 / t as f64 / rest).min(1.0)
    } else {
        0.0
    };
    let draw = |i: u32| -> Result<f64> {
        let mut rng = trial_rng(seed, i as u64);
        let bad = |e: rand_distr::BinomialError| Error::Consistency(format!("bootstrap: {e}"));
        let correct = Binomial::new(t, p_correct).map_err(bad)?.sample(&mut rng);
        let wrong = Binomial::new(t - correct, p_wrong_given)
            .map_err(bad)?
            .sample(&mut rng);
        let counts = McCounts {
            correct,
            wrong,
            erasure: t - correct - wrong,
        };
        Ok(McEstimate::from_counts(counts, est.n_order, seed, est.sampler).mutual_info_hat())
    };
    let values = (0..resamples).map(draw).collect::<Result<Vec<f64>>>()?;
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(BootstrapMi {
        mi_hat: est.mutual_info_hat(),
        std_err: var.sqrt(),
        resamples,
    })
}
