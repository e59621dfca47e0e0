use ea_core::channel::ChannelParams;
use ea_core::dmc::{bootstrap_mutual_info, mc_estimate, mc_estimate_with, Sampler};
use ea_core::receiver::{dmc_probs, ppm_mutual_info, ReceiverConfig};

const TRIALS: u64 = 1_000_000;

/// (eta, N_S, N_B, M, n, K)
const POINTS: [(f64, f64, f64, u64, u64, u64); 5] = [
    (0.01, 1e-4, 10.0, 100_000, 64, 10_000),
    (0.01, 1e-5, 10.0, 100_000, 1024, 1_000),
    (0.01, 1e-3, 100.0, 10_000, 16, 10_000),
    (0.05, 1e-4, 20.0, 50_000, 8, 2_000),
    (0.001, 1e-2, 10.0, 1_000, 256, 1_000),
];

fn setup(i: usize) -> (ChannelParams, ReceiverConfig) {
    point(POINTS[i])
}

fn point(
    (eta, n_s, n_b, m, n, k): (f64, f64, f64, u64, u64, u64),
) -> (ChannelParams, ReceiverConfig) {
    (
        ChannelParams::new(eta, n_s, n_b).unwrap(),
        ReceiverConfig::hadamard(m, n, k).unwrap(),
    )
}

#[test]
fn estimates_within_four_sigma() {
    for (i, &p) in POINTS.iter().enumerate() {
        let (ch, cfg) = point(p);
        let seed = 1000 + i as u64;
        let probs = dmc_probs(&ch, &cfg).unwrap();
        let est = mc_estimate(&ch, &cfg, TRIALS, seed).unwrap();
        let z = est.z_scores(&probs);
        assert!(
            est.max_abs_z(&probs) < 4.0,
            "point {p:?} seed {seed}: z = {z:?}"
        );
    }
}

#[test]
fn same_seed_same_counts() {
    let (ch, cfg) = setup(0);
    let a = mc_estimate(&ch, &cfg, 200_000, 7).unwrap();
    let b = mc_estimate(&ch, &cfg, 200_000, 7).unwrap();
    let c = mc_estimate(&ch, &cfg, 200_000, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
}

#[test]
fn result_independent_of_thread_count() {
    let (ch, cfg) = setup(1);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| mc_estimate(&ch, &cfg, 100_000, 3).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| mc_estimate(&ch, &cfg, 100_000, 3).unwrap());
    assert_eq!(single, many);
}

/// Stage-by-stage sampling against the collapsed sampler, via a
/// two-proportion z statistic on each outcome class.
#[test]
fn stage_sampler_agrees_with_collapsed() {
    let ch = ChannelParams::new(0.05, 1e-2, 2.0).unwrap();
    let cfg = ReceiverConfig::hadamard(2_000, 8, 200).unwrap();
    let trials = 100_000;
    let a = mc_estimate_with(&ch, &cfg, trials, 11, Sampler::Collapsed).unwrap();
    let b = mc_estimate_with(&ch, &cfg, trials, 12, Sampler::Stages).unwrap();
    let pairs = [
        (a.counts.correct, b.counts.correct),
        (a.counts.wrong, b.counts.wrong),
        (a.counts.erasure, b.counts.erasure),
    ];
    for (x, y) in pairs {
        let (p1, p2) = (x as f64 / trials as f64, y as f64 / trials as f64);
        let pooled = (p1 + p2) / 2.0;
        let se = (pooled * (1.0 - pooled) * 2.0 / trials as f64).sqrt();
        let z = if se > 0.0 { (p1 - p2) / se } else { 0.0 };
        assert!(z.abs() < 4.0, "counts {x} vs {y}: z = {z}");
    }
    let probs = dmc_probs(&ch, &cfg).unwrap();
    assert!(b.max_abs_z(&probs) < 4.0);
}

#[test]
fn bootstrap_mutual_info_covers_analytic() {
    let (ch, cfg) = setup(0);
    let probs = dmc_probs(&ch, &cfg).unwrap();
    let exact = ppm_mutual_info(&probs, cfg.n_order()).bits();
    let est = mc_estimate(&ch, &cfg, TRIALS, 2024).unwrap();
    let bs = bootstrap_mutual_info(&est, 100, 99).unwrap();
    assert!(bs.std_err > 0.0);
    assert!(
        (bs.mi_hat - exact).abs() < 3.0 * bs.std_err,
        "MI hat {} exact {exact} se {}",
        bs.mi_hat,
        bs.std_err
    );
}
