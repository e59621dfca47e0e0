//! Parameter sweeps over `(N_S, N_B, eta, M, n, G)` and their tabular output.

mod io;
mod presets;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{capacity_ratio, ea_capacity, holevo_capacity, ChannelParams};
use crate::error::{Error, Result};
use crate::numerics::logspace;
use crate::opa::{opa_capacity_leading, opa_gain_ratio, opa_mutual_info, OpaConfig};
use crate::receiver::{
    default_stages, hadamard_orders, optimal_order_lambertw, rate_approx_jb, rate_approx_ww,
    rate_envelope_with_stages, rate_exact, regime_warnings, ReceiverConfig, DEFAULT_MAX_ORDER_LOG2,
};

pub use io::{
    read_csv, to_json, write_csv, write_csv_to, write_json, CsvRecord, JSON_SCHEMA_VERSION,
};
pub use presets::{preset, PRESET_NAMES};

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    NS,
    NB,
    Eta,
    MModes,
    NOrder,
    Gain,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::NS,
        Param::NB,
        Param::Eta,
        Param::MModes,
        Param::NOrder,
        Param::Gain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Param::NS => "n_s",
            Param::NB => "n_b",
            Param::Eta => "eta",
            Param::MModes => "m_modes",
            Param::NOrder => "n_order",
            Param::Gain => "gain",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Param::MModes | Param::NOrder)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep parameter '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub scale: Scale,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn log(param: Param, start: f64, stop: f64, count: usize) -> Self {
        Self {
            param,
            scale: Scale::Log,
            start,
            stop,
            count,
        }
    }

    pub fn linear(param: Param, start: f64, stop: f64, count: usize) -> Self {
        Self {
            param,
            scale: Scale::Linear,
            start,
            stop,
            count,
        }
    }

    /// Grid values; integer parameters are rounded to the nearest integer.
    pub fn values(&self) -> Vec<f64> {
        let raw = match (self.scale, self.count) {
            (_, 1) => vec![self.start],
            (Scale::Log, c) => logspace(self.start, self.stop, c),
            (Scale::Linear, c) => {
                let step = (self.stop - self.start) / (c - 1) as f64;
                (0..c).map(|i| self.start + step * i as f64).collect()
            }
        };
        if self.param.is_integer() {
            raw.into_iter().map(f64::round).collect()
        } else {
            raw
        }
    }
}

/// Values used for every parameter without an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub eta: f64,
    pub n_s: f64,
    pub n_b: f64,
    pub m_modes: u64,
    pub n_order: u64,
    pub gain: f64,
    /// SFG stages; `None` picks the default for each point's `N_B`.
    pub k_stages: Option<u64>,
    /// Envelopes maximize over `n = 2, 4, ..., 2^max_order_log2`.
    pub max_order_log2: u32,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            eta: 0.01,
            n_s: 1e-4,
            n_b: 10.0,
            m_modes: 100_000,
            n_order: 64,
            gain: 1.01,
            k_stages: None,
            max_order_log2: DEFAULT_MAX_ORDER_LOG2,
        }
    }
}

/// What to evaluate at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    HolevoCapacity,
    EaCapacity,
    /// `C_E / C`.
    EaRatio,
    /// Receiver rate at the point's `n`.
    RateExact,
    /// `R(M, n) / C`.
    RateRatio,
    /// Best rate over Hadamard orders.
    Envelope,
    /// Envelope over `C`.
    EnvelopeRatio,
    /// Order attaining the envelope.
    EnvelopeOrder,
    RateApproxJb,
    RateApproxWw,
    /// Continuous optimal order from the Lambert-W formula.
    OptimalOrder,
    OpaLeading,
    OpaGainRatio,
    OpaMutualInfo,
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::HolevoCapacity,
        Quantity::EaCapacity,
        Quantity::EaRatio,
        Quantity::RateExact,
        Quantity::RateRatio,
        Quantity::Envelope,
        Quantity::EnvelopeRatio,
        Quantity::EnvelopeOrder,
        Quantity::RateApproxJb,
        Quantity::RateApproxWw,
        Quantity::OptimalOrder,
        Quantity::OpaLeading,
        Quantity::OpaGainRatio,
        Quantity::OpaMutualInfo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::HolevoCapacity => "holevo_capacity",
            Quantity::EaCapacity => "ea_capacity",
            Quantity::EaRatio => "ea_ratio",
            Quantity::RateExact => "rate_exact",
            Quantity::RateRatio => "rate_ratio",
            Quantity::Envelope => "envelope",
            Quantity::EnvelopeRatio => "envelope_ratio",
            Quantity::EnvelopeOrder => "envelope_order",
            Quantity::RateApproxJb => "rate_approx_jb",
            Quantity::RateApproxWw => "rate_approx_ww",
            Quantity::OptimalOrder => "optimal_order",
            Quantity::OpaLeading => "opa_leading",
            Quantity::OpaGainRatio => "opa_gain_ratio",
            Quantity::OpaMutualInfo => "opa_mutual_info",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Quantity::HolevoCapacity
            | Quantity::EaCapacity
            | Quantity::RateExact
            | Quantity::Envelope
            | Quantity::RateApproxJb
            | Quantity::RateApproxWw => "bits/mode",
            Quantity::EaRatio
            | Quantity::RateRatio
            | Quantity::EnvelopeRatio
            | Quantity::OpaGainRatio => "ratio",
            Quantity::EnvelopeOrder | Quantity::OptimalOrder => "order",
            Quantity::OpaLeading | Quantity::OpaMutualInfo => "bits/block",
        }
    }

    fn uses_receiver(self) -> bool {
        matches!(
            self,
            Quantity::RateExact
                | Quantity::RateRatio
                | Quantity::Envelope
                | Quantity::EnvelopeRatio
                | Quantity::EnvelopeOrder
                | Quantity::RateApproxJb
                | Quantity::RateApproxWw
                | Quantity::OptimalOrder
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown quantity '{s}'")))
    }
}

/// Cartesian grid; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub fixed: FixedParams,
    pub quantities: Vec<Quantity>,
    /// Require `n_order` values to be powers of two.
    pub hadamard: bool,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>, fixed: FixedParams, quantities: Vec<Quantity>) -> Result<Self> {
        let grid = Self {
            axes,
            fixed,
            quantities,
            hadamard: true,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, axis) in self.axes.iter().enumerate() {
            let name = axis.param;
            if self.axes[..i].iter().any(|a| a.param == name) {
                return Err(Error::Grid(format!("axis {name} appears twice")));
            }
            if axis.count == 0 {
                return Err(Error::Grid(format!("axis {name} has no points")));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return Err(Error::Grid(format!(
                    "axis {name} has a non-finite endpoint"
                )));
            }
            if axis.scale == Scale::Log && !(axis.start > 0.0 && axis.stop > 0.0) {
                return Err(Error::Grid(format!(
                    "log axis {name} needs positive endpoints"
                )));
            }
            if name.is_integer() {
                let bad = axis.values().into_iter().find(|&v| v < 1.0);
                if let Some(v) = bad {
                    return Err(Error::Grid(format!("axis {name} has value {v} below 1")));
                }
            }
            if name == Param::NOrder && self.hadamard {
                if let Some(v) = axis
                    .values()
                    .into_iter()
                    .find(|&v| !(v as u64).is_power_of_two())
                {
                    return Err(Error::Grid(format!(
                        "n_order value {v} is not a power of two"
                    )));
                }
            }
        }
        if self.fixed.max_order_log2 == 0 || self.fixed.max_order_log2 > 40 {
            return Err(Error::Grid(format!(
                "max_order_log2 = {} outside 1..=40",
                self.fixed.max_order_log2
            )));
        }
        Ok(())
    }

    pub fn axis_names(&self) -> Vec<&'static str> {
        self.axes.iter().map(|a| a.param.as_str()).collect()
    }

    /// All grid points as axis-value tuples, in output order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn resolve(&self, point: &[f64]) -> FixedParams {
        let mut p = self.fixed;
        for (axis, &v) in self.axes.iter().zip(point) {
            match axis.param {
                Param::NS => p.n_s = v,
                Param::NB => p.n_b = v,
                Param::Eta => p.eta = v,
                Param::MModes => p.m_modes = v as u64,
                Param::NOrder => p.n_order = v as u64,
                Param::Gain => p.gain = v,
            }
        }
        p
    }
}

/// One evaluated quantity at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Axis values in axis order.
    pub point: Vec<f64>,
    pub quantity: Quantity,
    /// `None` when the point is invalid; the reason is in `flags`.
    pub value: Option<f64>,
    pub units: &'static str,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub rows: Vec<SweepRow>,
    pub seed: Option<u64>,
}

impl SweepResult {
    /// Rows for one quantity, in grid order.
    pub fn column(&self, q: Quantity) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.quantity == q)
    }
}

/// Evaluates every quantity at every point. Failures become flagged rows.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let rows = grid
        .points()
        .into_par_iter()
        .flat_map_iter(|point| {
            let params = grid.resolve(&point);
            let ctx = PointContext::new(params);
            grid.quantities
                .iter()
                .map(|&q| ctx.row(&point, q))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SweepResult {
        grid: grid.clone(),
        rows,
        seed: None,
    })
}

struct PointContext {
    params: FixedParams,
    ch: ChannelParams,
    k_stages: u64,
}

impl PointContext {
    fn new(params: FixedParams) -> Self {
        let ch = ChannelParams {
            eta: params.eta,
            n_s: params.n_s,
            n_b: params.n_b,
        };
        let k_stages = params
            .k_stages
            .unwrap_or_else(|| default_stages(params.n_b));
        Self {
            params,
            ch,
            k_stages,
        }
    }

    fn row(&self, point: &[f64], quantity: Quantity) -> SweepRow {
        let mut flags = Vec::new();
        if quantity.uses_receiver() && self.ch.validate().is_ok() {
            let warnings = regime_warnings(&self.ch, self.k_stages);
            flags.extend(warnings.iter().map(|w| w.as_str().to_string()));
        }
        let value = match self.eval(quantity) {
            Ok(v) if v.is_finite() => Some(v),
            Ok(v) => {
                flags.push(format!("invalid:non-finite value {v}"));
                None
            }
            Err(e) => {
                flags.push(format!("invalid:{e}"));
                None
            }
        };
        SweepRow {
            point: point.to_vec(),
            quantity,
            value,
            units: quantity.units(),
            flags,
        }
    }

    fn eval(&self, q: Quantity) -> Result<f64> {
        let ch = &self.ch;
        ch.validate()?;
        let p = &self.params;
        let cfg = || ReceiverConfig::new(p.m_modes, p.n_order, self.k_stages);
        let envelope = || {
            rate_envelope_with_stages(
                ch,
                p.m_modes,
                self.k_stages,
                &hadamard_orders(p.max_order_log2),
            )
        };
        let over_holevo = |x: f64| -> Result<f64> {
            let c = holevo_capacity(ch)?;
            if c > 0.0 {
                Ok(x / c)
            } else {
                Err(Error::domain(
                    "holevo_capacity",
                    c,
                    "ratio undefined at zero capacity",
                ))
            }
        };
        let opa = || OpaConfig::new(p.gain, p.m_modes, None);
        match q {
            Quantity::HolevoCapacity => holevo_capacity(ch),
            Quantity::EaCapacity => ea_capacity(ch),
            Quantity::EaRatio => capacity_ratio(ch)?.ok_or_else(|| {
                Error::domain("holevo_capacity", 0.0, "ratio undefined at zero capacity")
            }),
            Quantity::RateExact => rate_exact(ch, &cfg()?),
            Quantity::RateRatio => over_holevo(rate_exact(ch, &cfg()?)?),
            Quantity::Envelope => Ok(envelope()?.rate),
            Quantity::EnvelopeRatio => over_holevo(envelope()?.rate),
            Quantity::EnvelopeOrder => Ok(envelope()?.n_order as f64),
            Quantity::RateApproxJb => rate_approx_jb(ch, p.m_modes),
            Quantity::RateApproxWw => rate_approx_ww(ch, p.m_modes),
            Quantity::OptimalOrder => Ok(optimal_order_lambertw(ch, p.m_modes)?.n_star),
            Quantity::OpaLeading => opa_capacity_leading(&opa()?, ch),
            Quantity::OpaGainRatio => opa_gain_ratio(&opa()?, ch),
            Quantity::OpaMutualInfo => Ok(opa_mutual_info(&opa()?, ch)?.bits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(q: Quantity) -> SweepGrid {
        SweepGrid::new(vec![], FixedParams::default(), vec![q]).unwrap()
    }

    #[test]
    fn one_point_matches_direct_call() {
        let res = run_sweep(&single(Quantity::HolevoCapacity)).unwrap();
        assert_eq!(res.rows.len(), 1);
        let ch = ChannelParams::new(0.01, 1e-4, 10.0).unwrap();
        assert_eq!(res.rows[0].value, Some(holevo_capacity(&ch).unwrap()));
        assert_eq!(res.rows[0].units, "bits/mode");
    }

    #[test]
    fn row_count_and_order() {
        let grid = SweepGrid::new(
            vec![
                Axis::log(Param::NS, 1e-6, 1e-4, 3),
                Axis::log(Param::NOrder, 2.0, 16.0, 4),
            ],
            FixedParams::default(),
            vec![Quantity::RateExact, Quantity::HolevoCapacity],
        )
        .unwrap();
        let res = run_sweep(&grid).unwrap();
        assert_eq!(res.rows.len(), 3 * 4 * 2);
        assert_eq!(res.rows[0].point, vec![1e-6, 2.0]);
        assert_eq!(res.rows[2].point, vec![1e-6, 4.0]);
        assert_eq!(res.rows[23].point[1], 16.0);
        let direct = rate_exact(
            &ChannelParams::new(0.01, 1e-5, 10.0).unwrap(),
            &ReceiverConfig::new(100_000, 8, 1000).unwrap(),
        )
        .unwrap();
        let row = res
            .rows
            .iter()
            .find(|r| r.point == vec![1e-5, 8.0])
            .unwrap();
        assert!((row.value.unwrap() / direct - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_point_is_isolated() {
        let fixed = FixedParams {
            k_stages: Some(5),
            ..FixedParams::default()
        };
        let grid = SweepGrid::new(
            vec![Axis::linear(Param::NB, 0.01, 10.0, 2)],
            fixed,
            vec![Quantity::RateExact],
        )
        .unwrap();
        let res = run_sweep(&grid).unwrap();
        assert!(res.rows[0].value.is_some());
        assert!(res.rows[1].value.is_none());
        assert!(res.rows[1]
            .flags
            .iter()
            .any(|f| f.starts_with("invalid:cascade")));
        assert!(res.rows[1].flags.iter().any(|f| f == "cascade_too_shallow"));
    }

    #[test]
    fn grid_validation() {
        let f = FixedParams::default;
        let q = || vec![Quantity::HolevoCapacity];
        assert!(SweepGrid::new(vec![Axis::log(Param::NS, 0.0, 1.0, 3)], f(), q()).is_err());
        assert!(SweepGrid::new(vec![Axis::log(Param::NS, 1e-3, 1.0, 0)], f(), q()).is_err());
        assert!(SweepGrid::new(vec![Axis::linear(Param::NOrder, 2.0, 6.0, 3)], f(), q()).is_err());
        let twice = vec![
            Axis::log(Param::NS, 1e-3, 1.0, 2),
            Axis::log(Param::NS, 1e-3, 1.0, 2),
        ];
        assert!(SweepGrid::new(twice, f(), q()).is_err());
        assert!(SweepGrid::new(vec![Axis::log(Param::NOrder, 2.0, 1024.0, 10)], f(), q()).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.as_str().parse::<Quantity>().unwrap(), q);
        }
        for p in Param::ALL {
            assert_eq!(p.as_str().parse::<Param>().unwrap(), p);
        }
        assert!("nope".parse::<Quantity>().is_err());
    }

    #[test]
    fn zero_capacity_ratio_is_flagged() {
        let fixed = FixedParams {
            n_s: 0.0,
            ..FixedParams::default()
        };
        let grid = SweepGrid::new(vec![], fixed, vec![Quantity::EaRatio]).unwrap();
        let res = run_sweep(&grid).unwrap();
        assert!(res.rows[0].value.is_none());
    }
}
