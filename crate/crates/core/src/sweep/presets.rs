use super::{Axis, FixedParams, Param, Quantity, SweepGrid};

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3-si", "fig4-si", "fig5-si"];

fn figure_channel() -> FixedParams {
    FixedParams {
        eta: 0.01,
        n_b: 10.0,
        m_modes: 100_000,
        ..FixedParams::default()
    }
}

fn n_orders(max_log2: u32) -> Axis {
    Axis::log(
        Param::NOrder,
        2.0,
        (1u64 << max_log2) as f64,
        max_log2 as usize,
    )
}

/// Built-in figure grids:
///
/// * `fig2`: per-order rate ratios, envelope ratio and `C_E/C` against `N_S`
///   at `eta = 0.01`, `N_B = 10`, `M = 1e5`.
/// * `fig3-si`: `C_E/C` over `N_S` and `N_B` at `eta = 0.01`.
/// * `fig4-si`: per-order ratios, exact envelope and both closed-form
///   envelope approximations for `M = 1e3, 1e4, 1e5`.
/// * `fig5-si`: envelope ratio (orders up to `2^14`) for `M = 10 .. 1e6`.
pub fn preset(name: &str) -> Option<SweepGrid> {
    let ns_axis = Axis::log(Param::NS, 1e-7, 1e-2, 21);
    let (axes, fixed, quantities) = match name {
        "fig2" => (
            vec![ns_axis, n_orders(20)],
            figure_channel(),
            vec![
                Quantity::RateRatio,
                Quantity::EnvelopeRatio,
                Quantity::EaRatio,
            ],
        ),
        "fig3-si" => (
            vec![
                Axis::log(Param::NB, 1e-6, 1e2, 9),
                Axis::log(Param::NS, 1e-6, 1e2, 33),
            ],
            figure_channel(),
            vec![Quantity::EaRatio],
        ),
        "fig4-si" => (
            vec![Axis::log(Param::MModes, 1e3, 1e5, 3), ns_axis, n_orders(20)],
            figure_channel(),
            vec![
                Quantity::RateRatio,
                Quantity::EnvelopeRatio,
                Quantity::Envelope,
                Quantity::RateApproxJb,
                Quantity::RateApproxWw,
                Quantity::HolevoCapacity,
            ],
        ),
        "fig5-si" => (
            vec![Axis::log(Param::MModes, 10.0, 1e6, 6), ns_axis],
            FixedParams {
                max_order_log2: 14,
                ..figure_channel()
            },
            vec![Quantity::EnvelopeRatio, Quantity::EnvelopeOrder],
        ),
        _ => return None,
    };
    Some(SweepGrid {
        axes,
        fixed,
        quantities,
        hadamard: true,
    })
}
