use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use ea_core::channel::{capacity_ratio, ea_capacity, ea_ratio_limit_constant, holevo_capacity};
use ea_core::covert::{covert_ns_budget, covert_throughput, ThroughputMode};
use ea_core::dmc::{bootstrap_mutual_info, mc_estimate_with, Sampler};
use ea_core::opa::{opa_capacity_leading, opa_gain_ratio, opa_mutual_info, OpaConfig};
use ea_core::receiver::{
    default_stages, dmc_probs, hadamard_orders, ppm_mutual_info, rate_approx_jb, rate_approx_ww,
    rate_envelope_with_stages, regime_warnings, ReceiverConfig, RegimeWarning,
};
use ea_core::sweep::{self, Axis, FixedParams, Param, Quantity, Scale, SweepGrid};
use ea_core::ChannelParams;
use serde::Serialize;

use crate::report::emit;
use crate::{parse_count, ChannelArgs, CliError, CovertMode, ReceiverArgs, SamplerArg};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Monte Carlo estimates farther than this many standard errors fail.
pub const MC_Z_LIMIT: f64 = 4.0;

fn channel(a: &ChannelArgs) -> Result<ChannelParams, CliError> {
    Ok(ChannelParams::new(a.eta, a.n_s, a.n_b)?)
}

fn warning_names(w: Vec<RegimeWarning>) -> Vec<&'static str> {
    w.into_iter().map(RegimeWarning::as_str).collect()
}

#[derive(Serialize)]
struct Header {
    command: &'static str,
    version: &'static str,
}

impl Header {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            version: VERSION,
        }
    }
}

#[derive(Serialize)]
struct CapacityReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_s: f64,
    n_b: f64,
    /// bits per mode
    holevo_capacity: f64,
    ea_capacity: f64,
    ratio: Option<f64>,
    limit_constant: f64,
}

pub fn capacity(a: &ChannelArgs, json: bool) -> Result<(), CliError> {
    let ch = channel(a)?;
    let limit_constant = if ch.eta < 1.0 {
        ea_ratio_limit_constant(ch.eta, ch.n_b)?
    } else {
        0.0
    };
    emit(
        &CapacityReport {
            header: Header::new("capacity"),
            eta: ch.eta,
            n_s: ch.n_s,
            n_b: ch.n_b,
            holevo_capacity: holevo_capacity(&ch)?,
            ea_capacity: ea_capacity(&ch)?,
            ratio: capacity_ratio(&ch)?,
            limit_constant,
        },
        json,
    )
}

#[derive(Serialize)]
struct Probs {
    p_c: f64,
    p_b: f64,
    p_e: f64,
    p_d: f64,
    p_erasure: f64,
}

#[derive(Serialize)]
struct RateReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_s: f64,
    n_b: f64,
    m_modes: u64,
    n_order: u64,
    k_stages: u64,
    probs: Probs,
    frame_bits: f64,
    rate: f64,
    holevo_capacity: f64,
    rate_ratio: Option<f64>,
    warnings: Vec<&'static str>,
}

fn receiver(r: &ReceiverArgs, ch: &ChannelParams) -> Result<ReceiverConfig, CliError> {
    let k = r.k_stages.unwrap_or_else(|| default_stages(ch.n_b));
    Ok(ReceiverConfig::hadamard(r.m_modes, r.n_order, k)?)
}

fn ratio(x: f64, c: f64) -> Option<f64> {
    (c > 0.0).then(|| x / c)
}

pub fn rate(a: &ChannelArgs, r: &ReceiverArgs, json: bool) -> Result<(), CliError> {
    let ch = channel(a)?;
    let cfg = receiver(r, &ch)?;
    let p = dmc_probs(&ch, &cfg)?;
    let n = cfg.n_order();
    let frame = ppm_mutual_info(&p, n);
    let rate = frame.per_mode(cfg.m_modes(), n);
    let c = holevo_capacity(&ch)?;
    emit(
        &RateReport {
            header: Header::new("rate"),
            eta: ch.eta,
            n_s: ch.n_s,
            n_b: ch.n_b,
            m_modes: cfg.m_modes(),
            n_order: n,
            k_stages: cfg.k_stages(),
            probs: Probs {
                p_c: p.p_c,
                p_b: p.p_b,
                p_e: p.p_e,
                p_d: p.p_d,
                p_erasure: p.erasure(n),
            },
            frame_bits: frame.bits(),
            rate,
            holevo_capacity: c,
            rate_ratio: ratio(rate, c),
            warnings: warning_names(regime_warnings(&ch, cfg.k_stages())),
        },
        json,
    )
}

#[derive(Serialize)]
struct EnvelopeReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_s: f64,
    n_b: f64,
    m_modes: u64,
    k_stages: u64,
    max_order_log2: u32,
    rate: f64,
    best_n: u64,
    holevo_capacity: f64,
    envelope_ratio: Option<f64>,
    approx_jb: Option<f64>,
    approx_ww: Option<f64>,
    warnings: Vec<&'static str>,
}

pub fn envelope(
    a: &ChannelArgs,
    m_modes: u64,
    k_stages: Option<u64>,
    max_order_log2: u32,
    json: bool,
) -> Result<(), CliError> {
    let ch = channel(a)?;
    if !(1..=40).contains(&max_order_log2) {
        return Err(ea_core::Error::Domain {
            name: "max_order_log2",
            value: max_order_log2 as f64,
            reason: "must lie in 1..=40",
        }
        .into());
    }
    let k = k_stages.unwrap_or_else(|| default_stages(ch.n_b));
    let env = rate_envelope_with_stages(&ch, m_modes, k, &hadamard_orders(max_order_log2))?;
    let c = holevo_capacity(&ch)?;
    emit(
        &EnvelopeReport {
            header: Header::new("envelope"),
            eta: ch.eta,
            n_s: ch.n_s,
            n_b: ch.n_b,
            m_modes,
            k_stages: k,
            max_order_log2,
            rate: env.rate,
            best_n: env.n_order,
            holevo_capacity: c,
            envelope_ratio: ratio(env.rate, c),
            approx_jb: rate_approx_jb(&ch, m_modes).ok(),
            approx_ww: rate_approx_ww(&ch, m_modes).ok(),
            warnings: warning_names(regime_warnings(&ch, k)),
        },
        json,
    )
}

#[derive(Serialize)]
struct OpaReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_s: f64,
    n_b: f64,
    gain: f64,
    m_modes: u64,
    /// bits per block of `m_modes` modes
    leading_bits: f64,
    exact_bits: f64,
    q_star: f64,
    k_max: u64,
    exact_bits_per_mode: f64,
    holevo_capacity: f64,
    exact_to_holevo: Option<f64>,
    gain_ratio: Option<f64>,
}

pub fn opa(
    a: &ChannelArgs,
    gain: f64,
    m_modes: u64,
    q_prior: Option<f64>,
    json: bool,
) -> Result<(), CliError> {
    let ch = channel(a)?;
    let cfg = OpaConfig::new(gain, m_modes, q_prior)?;
    let exact = opa_mutual_info(&cfg, &ch)?;
    let per_mode = exact.bits / m_modes as f64;
    let c = holevo_capacity(&ch)?;
    emit(
        &OpaReport {
            header: Header::new("opa"),
            eta: ch.eta,
            n_s: ch.n_s,
            n_b: ch.n_b,
            gain,
            m_modes,
            leading_bits: opa_capacity_leading(&cfg, &ch)?,
            exact_bits: exact.bits,
            q_star: exact.q_star,
            k_max: exact.k_max,
            exact_bits_per_mode: per_mode,
            holevo_capacity: c,
            exact_to_holevo: ratio(per_mode, c),
            gain_ratio: opa_gain_ratio(&cfg, &ch).ok(),
        },
        json,
    )
}

#[derive(Serialize)]
struct CovertRow {
    mode: &'static str,
    rate_per_mode: f64,
    bits: f64,
    n_order: Option<u64>,
}

#[derive(Serialize)]
struct CovertReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_b: f64,
    m_total: u64,
    delta: f64,
    n_s_max: f64,
    throughput: Vec<CovertRow>,
}

#[allow(clippy::too_many_arguments)]
pub fn covert(
    eta: f64,
    n_b: f64,
    m_total: u64,
    delta: f64,
    mode: CovertMode,
    gain: f64,
    m_modes: u64,
    json: bool,
) -> Result<(), CliError> {
    let budget = covert_ns_budget(eta, n_b, m_total, delta)?;
    let ch = ChannelParams::new(eta, budget.n_s_max, n_b)?;
    let modes: Vec<(&'static str, ThroughputMode)> = [
        ("holevo", ThroughputMode::Holevo),
        ("opa", ThroughputMode::Opa { gain }),
        ("jdr", ThroughputMode::Jdr { m_modes }),
    ]
    .into_iter()
    .filter(|(name, _)| match mode {
        CovertMode::All => true,
        CovertMode::Holevo => *name == "holevo",
        CovertMode::Opa => *name == "opa",
        CovertMode::Jdr => *name == "jdr",
    })
    .collect();
    let throughput = modes
        .into_iter()
        .map(|(name, m)| {
            let t = covert_throughput(&ch, m_total, delta, m)?;
            Ok(CovertRow {
                mode: name,
                rate_per_mode: t.rate_per_mode,
                bits: t.bits,
                n_order: t.n_order,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(
        &CovertReport {
            header: Header::new("covert"),
            eta,
            n_b,
            m_total,
            delta,
            n_s_max: budget.n_s_max,
            throughput,
        },
        json,
    )
}

#[derive(Serialize)]
struct McRow {
    quantity: &'static str,
    analytic: f64,
    empirical: f64,
    std_err: f64,
    z: f64,
}

#[derive(Serialize)]
struct McBootstrap {
    analytic_bits: f64,
    mi_hat_bits: f64,
    std_err: f64,
    resamples: u32,
}

#[derive(Serialize)]
struct McReport {
    #[serde(flatten)]
    header: Header,
    eta: f64,
    n_s: f64,
    n_b: f64,
    m_modes: u64,
    n_order: u64,
    k_stages: u64,
    trials: u64,
    seed: u64,
    sampler: &'static str,
    estimates: Vec<McRow>,
    max_abs_z: f64,
    z_limit: f64,
    pass: bool,
    bootstrap: Option<McBootstrap>,
}

pub fn mc_validate(
    a: &ChannelArgs,
    r: &ReceiverArgs,
    trials: u64,
    seed: u64,
    sampler: SamplerArg,
    bootstrap: Option<u64>,
    json: bool,
) -> Result<(), CliError> {
    let ch = channel(a)?;
    let cfg = receiver(r, &ch)?;
    let (sampler, sampler_name) = match sampler {
        SamplerArg::Collapsed => (Sampler::Collapsed, "collapsed"),
        SamplerArg::Stages => (Sampler::Stages, "stages"),
    };
    let p = dmc_probs(&ch, &cfg)?;
    let n = cfg.n_order();
    let est = mc_estimate_with(&ch, &cfg, trials, seed, sampler)?;
    let (z_e, z_d, z_x) = est.z_scores(&p);
    let estimates = vec![
        McRow {
            quantity: "p_e",
            analytic: p.p_e,
            empirical: est.p_e_hat,
            std_err: est.std_err.p_e,
            z: z_e,
        },
        McRow {
            quantity: "p_d",
            analytic: p.p_d,
            empirical: est.p_d_hat,
            std_err: est.std_err.p_d,
            z: z_d,
        },
        McRow {
            quantity: "p_erasure",
            analytic: p.erasure(n),
            empirical: est.p_erasure_hat,
            std_err: est.std_err.p_erasure,
            z: z_x,
        },
    ];
    let max_abs_z = est.max_abs_z(&p);
    let bootstrap = match bootstrap {
        Some(b) => {
            let resamples = u32::try_from(b).map_err(|_| ea_core::Error::Domain {
                name: "bootstrap",
                value: b as f64,
                reason: "too many resamples",
            })?;
            let bs = bootstrap_mutual_info(&est, resamples, seed)?;
            Some(McBootstrap {
                analytic_bits: ppm_mutual_info(&p, n).bits(),
                mi_hat_bits: bs.mi_hat,
                std_err: bs.std_err,
                resamples: bs.resamples,
            })
        }
        None => None,
    };
    let pass = max_abs_z <= MC_Z_LIMIT;
    emit(
        &McReport {
            header: Header::new("mc-validate"),
            eta: ch.eta,
            n_s: ch.n_s,
            n_b: ch.n_b,
            m_modes: cfg.m_modes(),
            n_order: n,
            k_stages: cfg.k_stages(),
            trials: est.trials,
            seed,
            sampler: sampler_name,
            estimates,
            max_abs_z,
            z_limit: MC_Z_LIMIT,
            pass,
            bootstrap,
        },
        json,
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::McOutside {
            max_z: max_abs_z,
            limit: MC_Z_LIMIT,
        })
    }
}

#[derive(Serialize)]
struct FilesReport {
    #[serde(flatten)]
    header: Header,
    name: String,
    points: usize,
    rows: usize,
    files: Vec<PathBuf>,
}

fn write_outputs(
    result: &sweep::SweepResult,
    csv: Option<&Path>,
    json_path: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in [csv, json_path].into_iter().flatten() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    if let Some(p) = csv {
        sweep::write_csv(result, p)?;
        files.push(p.to_path_buf());
    }
    if let Some(p) = json_path {
        sweep::write_json(result, p)?;
        files.push(p.to_path_buf());
    }
    Ok(files)
}

pub fn figures(
    name: &str,
    out: &Path,
    with_json: bool,
    eta: Option<f64>,
    n_b: Option<f64>,
    m_modes: Option<u64>,
    json: bool,
) -> Result<(), CliError> {
    let mut grid =
        sweep::preset(name).ok_or_else(|| CliError::Config(format!("unknown preset '{name}'")))?;
    if let Some(v) = eta {
        grid.fixed.eta = v;
    }
    if let Some(v) = n_b {
        grid.fixed.n_b = v;
    }
    if let Some(v) = m_modes {
        grid.fixed.m_modes = v;
    }
    grid.validate()?;
    let result = sweep::run_sweep(&grid)?;
    let csv = out.join(format!("{name}.csv"));
    let js = with_json.then(|| out.join(format!("{name}.json")));
    let files = write_outputs(&result, Some(&csv), js.as_deref())?;
    emit(
        &FilesReport {
            header: Header::new("figures"),
            name: name.to_string(),
            points: grid.len(),
            rows: result.rows.len(),
            files,
        },
        json,
    )
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [param, scale, start, stop, count] = parts[..] else {
        return Err(format!("axis '{s}' is not PARAM:SCALE:START:STOP:COUNT"));
    };
    let param: Param = param.parse().map_err(|e: ea_core::Error| e.to_string())?;
    let scale = match scale {
        "log" => Scale::Log,
        "lin" | "linear" => Scale::Linear,
        other => return Err(format!("unknown scale '{other}' (log or lin)")),
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| format!("'{v}' is not a number"))
    };
    let count = parse_count(count)? as usize;
    Ok(Axis {
        param,
        scale,
        start: num(start)?,
        stop: num(stop)?,
        count,
    })
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse().map_err(|e: ea_core::Error| e.to_string())
}

/// Grid over up to six parameters; unswept ones take the fixed values.
#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Axes as PARAM:SCALE:START:STOP:COUNT, comma separated; PARAM is one
    /// of n_s, n_b, eta, m_modes, n_order, gain and SCALE is log or lin.
    #[arg(long = "axis", value_delimiter = ',', value_parser = parse_axis, required = true)]
    axes: Vec<Axis>,
    /// Quantities to evaluate, comma separated.
    #[arg(long = "quantity", value_delimiter = ',', value_parser = parse_quantity, required = true)]
    quantities: Vec<Quantity>,
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "ns")]
    n_s: Option<f64>,
    #[arg(long = "nb")]
    n_b: Option<f64>,
    #[arg(long = "m", value_parser = parse_count)]
    m_modes: Option<u64>,
    #[arg(long = "n", value_parser = parse_count)]
    n_order: Option<u64>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long = "k", value_parser = parse_count)]
    k_stages: Option<u64>,
    #[arg(long)]
    max_order_log2: Option<u32>,
}

pub fn sweep(a: &SweepArgs, json: bool) -> Result<(), CliError> {
    let d = FixedParams::default();
    let fixed = FixedParams {
        eta: a.eta.unwrap_or(d.eta),
        n_s: a.n_s.unwrap_or(d.n_s),
        n_b: a.n_b.unwrap_or(d.n_b),
        m_modes: a.m_modes.unwrap_or(d.m_modes),
        n_order: a.n_order.unwrap_or(d.n_order),
        gain: a.gain.unwrap_or(d.gain),
        k_stages: a.k_stages.or(d.k_stages),
        max_order_log2: a.max_order_log2.unwrap_or(d.max_order_log2),
    };
    let grid = SweepGrid::new(a.axes.clone(), fixed, a.quantities.clone())?;
    let result = sweep::run_sweep(&grid)?;
    let is_json = a.out.extension().is_some_and(|e| e == "json");
    let files = if is_json {
        write_outputs(&result, None, Some(&a.out))?
    } else {
        write_outputs(&result, Some(&a.out), None)?
    };
    emit(
        &FilesReport {
            header: Header::new("sweep"),
            name: "sweep".into(),
            points: grid.len(),
            rows: result.rows.len(),
            files,
        },
        json,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_spec_parses() {
        let a = parse_axis("n_s:log:1e-7:1e-2:21").unwrap();
        assert_eq!(a, Axis::log(Param::NS, 1e-7, 1e-2, 21));
        let b = parse_axis("eta:lin:0.1:0.9:5").unwrap();
        assert_eq!(b, Axis::linear(Param::Eta, 0.1, 0.9, 5));
        assert!(parse_axis("n_s:log:1e-7:1e-2").is_err());
        assert!(parse_axis("x:log:1:2:3").is_err());
        assert!(parse_axis("n_s:cubic:1:2:3").is_err());
    }
}
