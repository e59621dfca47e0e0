use std::time::Duration;

use ea_core::channel::capacity_ratio;
use ea_core::covert::{covert_throughput, ThroughputMode, DEFAULT_OPA_GAIN};
use ea_core::dmc::{blahut_arimoto, build_induced_dmc, mc_estimate, mutual_info_uniform};
use ea_core::numerics::{g_entropy, lambert_w0, logspace, Tolerance};
use ea_core::opa::{opa_capacity_leading, opa_gain_ratio, opa_mutual_info, OpaConfig};
use ea_core::receiver::{
    dmc_probs, hadamard_orders, ppm_mutual_info, rate_approx_jb, rate_approx_ww, rate_envelope,
};
use ea_core::sweep::{preset, run_sweep, write_csv_to};
use ea_core::{
    ea_capacity, ea_ratio_limit_constant, holevo_capacity, ChannelParams, DmcProbs, ReceiverConfig,
};
use ea_validation::{run_all, Criterion, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ch(eta: f64, n_s: f64, n_b: f64) -> ChannelParams {
    ChannelParams::new(eta, n_s, n_b).unwrap()
}

/// Envelope over `n = 2..2^20` divided by the Holevo capacity.
fn envelope_ratio(p: &ChannelParams, m: u64) -> f64 {
    let env = rate_envelope(p, m, &hadamard_orders(20)).unwrap();
    env.rate / holevo_capacity(p).unwrap()
}

fn noiseless_ceiling() -> Outcome {
    let mut worst = 0.0f64;
    let mut at_small = f64::INFINITY;
    for eta in [0.1, 0.5, 0.9] {
        for n_s in logspace(1e-6, 1.0, 61) {
            let r = capacity_ratio(&ch(eta, n_s, 0.0)).unwrap().unwrap();
            worst = worst.max(r);
            if n_s == 1e-6 {
                at_small = at_small.min(r);
            }
        }
    }
    Outcome::new(
        worst <= 2.0 + 1e-9 && at_small >= 1.9,
        format!("max C_E/C = {worst:.12}, min at N_S=1e-6 = {at_small:.6}"),
    )
}

fn log_ratio_limit() -> Outcome {
    let n_s = 1e-10;
    let p = ch(0.01, n_s, 10.0);
    let v = ea_capacity(&p).unwrap() / (holevo_capacity(&p).unwrap() * (1.0 / n_s).ln());
    let c = ea_ratio_limit_constant(0.01, 10.0).unwrap();
    let rel = (v / c - 1.0).abs();
    Outcome::new(
        rel < 0.03,
        format!("C_E/(C ln(1/N_S)) = {v:.6}, constant = {c:.6}, rel. diff {rel:.4}"),
    )
}

fn envelope_scaling() -> Outcome {
    let points = [1e-4, 1e-5, 1e-6, 1e-7];
    let ratios: Vec<f64> = points
        .iter()
        .map(|&n_s| envelope_ratio(&ch(0.01, n_s, 10.0), 100_000))
        .collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let above_two = ratios[1..].iter().all(|&r| r > 2.0);
    // d ratio / d ln(1/N_S) between adjacent points
    let slopes: Vec<f64> = ratios
        .windows(2)
        .map(|w| (w[1] - w[0]) / 10f64.ln())
        .collect();
    let positive = slopes.iter().all(|&s| s > 0.0);
    let stable = slopes.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() <= 0.25);
    Outcome::new(
        increasing && above_two && positive && stable,
        format!("ratios {ratios:.4?}, slopes {slopes:.4?}"),
    )
}

fn half_constant() -> Outcome {
    let n_s = 1e-8;
    let p = ch(0.01, n_s, 1e3);
    let env = rate_envelope(&p, 100_000, &hadamard_orders(20)).unwrap();
    let v = env.rate / holevo_capacity(&p).unwrap() / (1.0 / n_s).ln();
    Outcome::new(
        (0.35..=0.65).contains(&v),
        format!(
            "(R_E/C)/ln(1/N_S) = {v:.4} at best n = {} (required [0.35, 0.65])",
            env.n_order
        ),
    )
}

fn optimal_m() -> Outcome {
    let grid = logspace(1e-6, 1e-3, 13);
    let best = |m: u64| {
        grid.iter()
            .map(|&n_s| envelope_ratio(&ch(0.01, n_s, 10.0), m))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let target = best(100_000);
    let others: Vec<(u64, f64)> = [1_000, 10_000, 1_000_000]
        .iter()
        .map(|&m| (m, best(m)))
        .collect();
    Outcome::new(
        others.iter().all(|&(_, v)| target > v),
        format!("max ratio at M=1e5: {target:.4}; others {others:.4?}"),
    )
}

fn approximation_ordering() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n_s in [1e-6, 1e-5, 1e-4] {
        let p = ch(0.01, n_s, 10.0);
        let exact = rate_envelope(&p, 1000, &hadamard_orders(20)).unwrap().rate;
        let jb = (rate_approx_jb(&p, 1000).unwrap() - exact).abs();
        let ww = (rate_approx_ww(&p, 1000).unwrap() - exact).abs();
        pass &= jb < ww;
        detail.push(format!(
            "N_S={n_s:e}: |jb-env|/env={:.3} |ww-env|/env={:.3}",
            jb / exact,
            ww / exact
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn opa_gain_limit() -> Outcome {
    let cfg = OpaConfig::new(1.0 + 1e-4, 1, None).unwrap();
    let r = opa_gain_ratio(&cfg, &ch(0.01, 1e-6, 1e4)).unwrap();
    Outcome::new(
        (r / 2.0 - 1.0).abs() <= 0.01,
        format!("gain ratio = {r:.6} (required 2 within 1%)"),
    )
}

fn opa_exact_vs_leading() -> Outcome {
    let cfg = OpaConfig::new(1.01, 100, None).unwrap();
    let p = ch(0.01, 1e-6, 10.0);
    let mi = opa_mutual_info(&cfg, &p).unwrap();
    let lead = opa_capacity_leading(&cfg, &p).unwrap();
    let rel = (mi.bits / lead - 1.0).abs();
    Outcome::new(
        rel <= 0.02,
        format!(
            "exact {:.6e} bits (q*={:.6}), leading {lead:.6e} bits, rel. diff {rel:.2e}",
            mi.bits, mi.q_star
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..20 {
        let (p_c, p_b): (f64, f64) = (rng.random(), rng.random());
        for n in [2u64, 4, 8, 16] {
            let probs = DmcProbs::from_click(p_c, p_b, n).unwrap();
            let dmc = build_induced_dmc(&probs, n).unwrap();
            let ba = blahut_arimoto(&dmc, &Tolerance::default())
                .unwrap()
                .capacity;
            let uniform = mutual_info_uniform(&dmc);
            let closed = ppm_mutual_info(&probs, n).bits();
            worst = worst
                .max((ba - uniform).abs())
                .max((uniform - closed).abs())
                .max((ba - closed).abs());
            count += 1;
        }
    }
    Outcome::new(
        worst <= 1e-9,
        format!("{count} channels, max pairwise difference {worst:.2e} bits"),
    )
}

fn monte_carlo() -> Outcome {
    let p = ch(0.01, 1e-4, 10.0);
    let cfg = ReceiverConfig::new(100_000, 64, 10_000).unwrap();
    let probs = dmc_probs(&p, &cfg).unwrap();
    let est = mc_estimate(&p, &cfg, 1_000_000, 20_240_611).unwrap();
    let again = mc_estimate(&p, &cfg, 1_000_000, 20_240_611).unwrap();
    let (ze, zd, zx) = est.z_scores(&probs);
    let within = [ze, zd, zx].iter().all(|z| z.abs() <= 4.0);
    Outcome::new(
        within && est == again,
        format!(
            "z(p_e)={ze:.2} z(p_d)={zd:.2} z(erasure)={zx:.2}; rerun identical: {}",
            est == again
        ),
    )
}

fn special_functions() -> Outcome {
    let mut worst_round = 0.0f64;
    let mut worst_inverse = 0.0f64;
    for x in logspace(1e-12, 1e6, 91) {
        let y = x * x.exp();
        if y.is_finite() {
            let w = lambert_w0(y).unwrap();
            worst_round = worst_round.max((w - x).abs() / x.max(1.0));
        }
        // x e^x overflows past ~709; there the inverse identity is checked instead.
        let w = lambert_w0(x).unwrap();
        worst_inverse = worst_inverse.max((w * w.exp() / x - 1.0).abs());
    }
    let g0 = g_entropy(0.0).unwrap();
    let g1 = g_entropy(1.0).unwrap();
    let g10 = g_entropy(10.0).unwrap();
    let g10_err = (g10 - 4.834_466_856_136_646).abs();
    Outcome::new(
        worst_round <= 1e-12 && worst_inverse <= 1e-12 && g0 == 0.0 && g1 == 2.0 && g10_err <= 1e-12,
        format!(
            "W round trip {worst_round:.1e}, W e^W {worst_inverse:.1e}, g(0)={g0}, g(1)={g1}, |g(10)-ref|={g10_err:.1e}"
        ),
    )
}

fn covert_scaling() -> Outcome {
    let p = ch(0.01, 0.0, 10.0);
    let ms = [1e4f64, 1e6, 1e8];
    let bits = |mode| -> Vec<f64> {
        ms.iter()
            .map(|&m| covert_throughput(&p, m as u64, 0.01, mode).unwrap().bits)
            .collect()
    };
    let holevo = bits(ThroughputMode::Holevo);
    let opa = bits(ThroughputMode::Opa {
        gain: DEFAULT_OPA_GAIN,
    });
    let jdr = bits(ThroughputMode::Jdr { m_modes: 100_000 });
    let per_root: Vec<f64> = holevo.iter().zip(&ms).map(|(b, m)| b / m.sqrt()).collect();
    let root_stable = per_root
        .iter()
        .all(|r| (r / per_root[0] - 1.0).abs() <= 0.1);
    let slopes: Vec<f64> = jdr
        .windows(2)
        .zip(ms.windows(2))
        .map(|(b, m)| (b[1] / b[0]).ln() / (m[1] / m[0]).ln())
        .collect();
    let super_root = slopes.iter().all(|&s| s > 0.5);
    let opa_ok = opa.iter().zip(&holevo).all(|(o, h)| *o <= 2.0 * h);
    Outcome::new(
        root_stable && super_root && opa_ok,
        format!(
            "holevo/sqrt(m) {}, jdr log-log slopes {slopes:.3?}, opa/holevo {:.3?}",
            sci(&per_root),
            opa.iter()
                .zip(&holevo)
                .map(|(o, h)| o / h)
                .collect::<Vec<_>>()
        ),
    )
}

fn figure_regression() -> Outcome {
    let golden_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/golden/fig2.csv");
    let golden = match std::fs::read(golden_path) {
        Ok(g) => g,
        Err(e) => return Outcome::new(false, format!("cannot read golden file: {e}")),
    };
    let result = run_sweep(&preset("fig2").unwrap()).unwrap();
    let mut fresh = Vec::new();
    write_csv_to(&result, &mut fresh).unwrap();
    let first_diff = fresh.iter().zip(&golden).position(|(a, b)| a != b);
    Outcome::new(
        fresh == golden,
        format!(
            "{} rows, {} bytes vs golden {} bytes, first differing byte {:?}",
            result.rows.len(),
            fresh.len(),
            golden.len(),
            first_diff
        ),
    )
}

fn main() -> std::process::ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion {
            id: "1",
            title: "noiseless ceiling C_E/C <= 2",
            budget: s(1),
            run: noiseless_ceiling,
        },
        Criterion {
            id: "2",
            title: "C_E/(C ln(1/N_S)) limit",
            budget: s(1),
            run: log_ratio_limit,
        },
        Criterion {
            id: "3",
            title: "envelope ratio grows with ln(1/N_S)",
            budget: s(30),
            run: envelope_scaling,
        },
        Criterion {
            id: "4",
            title: "half-constant at N_B=1e3, N_S=1e-8",
            budget: s(5),
            run: half_constant,
        },
        Criterion {
            id: "5",
            title: "optimal M near 1e5",
            budget: s(120),
            run: optimal_m,
        },
        Criterion {
            id: "6",
            title: "JB approximation tighter than WW at M=1e3",
            budget: s(30),
            run: approximation_ordering,
        },
        Criterion {
            id: "7a",
            title: "OPA gain ratio equals 2",
            budget: s(60),
            run: opa_gain_limit,
        },
        Criterion {
            id: "7b",
            title: "OPA exact MI vs leading term",
            budget: s(60),
            run: opa_exact_vs_leading,
        },
        Criterion {
            id: "8",
            title: "BA = uniform MI = closed form",
            budget: s(10),
            run: oracle_equivalence,
        },
        Criterion {
            id: "9",
            title: "Monte Carlo within 4 sigma, reproducible",
            budget: s(60),
            run: monte_carlo,
        },
        Criterion {
            id: "10",
            title: "Lambert W and g",
            budget: s(1),
            run: special_functions,
        },
        Criterion {
            id: "11",
            title: "covert scaling separation",
            budget: s(120),
            run: covert_scaling,
        },
        Criterion {
            id: "12",
            title: "fig2 CSV matches golden",
            budget: s(60),
            run: figure_regression,
        },
    ];
    run_all(&criteria)
}
