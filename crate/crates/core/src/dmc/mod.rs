//! Discrete memoryless channels: plug-in mutual information, Blahut-Arimoto
//! capacity and Monte Carlo simulation of the receiver's click channel.

mod monte_carlo;

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tolerance;
use crate::receiver::DmcProbs;

pub use monte_carlo::{
    bootstrap_mutual_info, mc_click_trial, mc_click_trial_stages, mc_estimate, mc_estimate_with,
    BootstrapMi, McCounts, McEstimate, McStdErr, Outcome, Sampler,
};

const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic transition matrix, `inputs x outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dmc {
    outputs: usize,
    transition: Vec<f64>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || outputs == 0 {
            return Err(Error::Consistency(
                "channel matrix must be non-empty".into(),
            ));
        }
        let mut transition = Vec::with_capacity(rows.len() * outputs);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::Consistency(format!(
                    "row {i} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(&p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Consistency(format!(
                    "row {i} has entry {p} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Consistency(format!("row {i} sums to {sum}")));
            }
            transition.extend_from_slice(row);
        }
        Ok(Self {
            outputs,
            transition,
        })
    }

    pub fn inputs(&self) -> usize {
        self.transition.len() / self.outputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.transition[input * self.outputs..(input + 1) * self.outputs]
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.row(input)[output]
    }

    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.transition.chunks_exact(self.outputs)
    }

    fn output_dist(&self, input_dist: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs];
        for (p, row) in input_dist.iter().zip(self.rows()) {
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += p * w;
            }
        }
        q
    }

    /// `D(W(.|x) || q)` in nats for every input `x`.
    fn divergences(&self, q: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(q)
                    .filter(|(&w, _)| w > 0.0)
                    .map(|(&w, &qy)| w * (w / qy).ln())
                    .sum()
            })
            .collect()
    }

    /// `I(X; Y)` in bits for the given input distribution.
    pub fn mutual_info(&self, input_dist: &[f64]) -> f64 {
        let q = self.output_dist(input_dist);
        let nats: f64 = input_dist
            .iter()
            .zip(self.divergences(&q))
            .map(|(p, d)| p * d)
            .sum();
        nats / LN_2
    }
}

/// The `n`-input, `(n+1)`-output channel of the PPM receiver. Output `n`
/// is the erasure.
pub fn build_induced_dmc(probs: &DmcProbs, n_order: u64) -> Result<Dmc> {
    probs.validate(n_order)?;
    let n = n_order as usize;
    let p_erasure = 1.0 - probs.p_e - (n - 1) as f64 * probs.p_d;
    if p_erasure < -ROW_SUM_TOL {
        return Err(Error::Consistency(format!(
            "erasure probability {p_erasure} is negative"
        )));
    }
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![probs.p_d; n + 1];
            row[i] = probs.p_e;
            row[n] = p_erasure.max(0.0);
            row
        })
        .collect();
    Dmc::new(rows)
}

/// Plug-in mutual information under the equiprobable input, in bits.
pub fn mutual_info_uniform(dmc: &Dmc) -> f64 {
    let n = dmc.inputs();
    dmc.mutual_info(&vec![1.0 / n as f64; n])
}

/// Capacity with a certified error bar and the input law attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlahutArimoto {
    /// Lower capacity bound at termination, bits.
    pub capacity: f64,
    /// Upper minus lower bound, bits.
    pub gap: f64,
    pub input_dist: Vec<f64>,
    pub iterations: usize,
}

/// Blahut-Arimoto iteration, stopped once `max_x D(W_x || q) - I` falls
/// below `tol.abs_tol` bits.
pub fn blahut_arimoto(dmc: &Dmc, tol: &Tolerance) -> Result<BlahutArimoto> {
    let n = dmc.inputs();
    let mut p = vec![1.0 / n as f64; n];
    let mut gap = f64::INFINITY;
    for iterations in 0..tol.max_iter {
        let q = dmc.output_dist(&p);
        let div = dmc.divergences(&q);
        let d_max = div.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Shifted by d_max so the weights stay bounded.
        let weights: Vec<f64> = p
            .iter()
            .zip(&div)
            .map(|(pi, d)| pi * (d - d_max).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let lower = (d_max + z.ln()) / LN_2;
        let upper = d_max / LN_2;
        gap = (upper - lower).max(0.0);
        if gap < tol.abs_tol {
            return Ok(BlahutArimoto {
                capacity: lower,
                gap,
                input_dist: p,
                iterations,
            });
        }
        p = weights.into_iter().map(|w| w / z).collect();
    }
    Err(Error::Convergence {
        iterations: tol.max_iter,
        gap,
    })
}
