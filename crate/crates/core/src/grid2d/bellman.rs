use serde::{Deserialize, Serialize};

use super::grid::CartesianGrid2;
use crate::operator::theta;
use crate::params::ProblemParams;

/// Which extremal operator the scheme discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extremal {
    #[default]
    Plus,
    Minus,
}

/// A control at one node: direction pair `pair` with coefficient `a` on the
/// pair's first direction and `b` on its partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyEntry {
    pub pair: usize,
    pub a: f64,
    pub b: f64,
}

pub type Policy = Vec<PolicyEntry>;

/// `a u_vv + b u_ww` for the control `entry`.
pub fn controlled_value(grid: &CartesianGrid2, u: &[f64], boundary: &[f64], node: usize, entry: PolicyEntry) -> f64 {
    entry.a * grid.second_difference(u, boundary, node, 2 * entry.pair)
        + entry.b * grid.second_difference(u, boundary, node, 2 * entry.pair + 1)
}

/// Discrete `M+`: max over pairs of `theta(d_v) d_v + theta(d_w) d_w`.
///
/// A control with equal coefficients is the isotropic diffusion `a I` for
/// every pair, so it is always realised on pair 0 (the axes). Ties go to
/// the lowest pair index.
pub fn discrete_pucci_plus(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    node: usize,
    params: &ProblemParams,
) -> (f64, PolicyEntry) {
    let axes = [
        grid.second_difference(u, boundary, node, 0),
        grid.second_difference(u, boundary, node, 1),
    ];
    let mut best = f64::NEG_INFINITY;
    let mut entry = PolicyEntry { pair: 0, a: 0.0, b: 0.0 };
    for k in 0..grid.stencil().len() {
        let (dv, dw) = if k == 0 {
            (axes[0], axes[1])
        } else {
            (
                grid.second_difference(u, boundary, node, 2 * k),
                grid.second_difference(u, boundary, node, 2 * k + 1),
            )
        };
        let (a, b) = (theta(dv, params), theta(dw, params));
        let (pair, value) = if a == b { (0, a * (axes[0] + axes[1])) } else { (k, a * dv + b * dw) };
        if value > best {
            best = value;
            entry = PolicyEntry { pair, a, b };
        }
    }
    (best, entry)
}

/// Discrete `M-` through `M-(u) = -M+(-u)`. The returned entry is the
/// control realising the minimum, so `controlled_value` reproduces the value.
pub fn discrete_pucci_minus(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    node: usize,
    params: &ProblemParams,
) -> (f64, PolicyEntry) {
    let neg: Vec<f64> = u.iter().map(|v| -v).collect();
    let negb: Vec<f64> = boundary.iter().map(|v| -v).collect();
    let (value, entry) = discrete_pucci_plus(grid, &neg, &negb, node, params);
    (-value, entry)
}

pub fn discrete_pucci(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    node: usize,
    params: &ProblemParams,
    which: Extremal,
) -> (f64, PolicyEntry) {
    match which {
        Extremal::Plus => discrete_pucci_plus(grid, u, boundary, node, params),
        Extremal::Minus => discrete_pucci_minus(grid, u, boundary, node, params),
    }
}

/// Magnitude of the terms entering the controlled value, used for rounding
/// floors.
pub(crate) fn value_magnitude(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    node: usize,
    entry: PolicyEntry,
) -> f64 {
    let mut total = 0.0;
    for (dir, coef) in [(2 * entry.pair, entry.a), (2 * entry.pair + 1, entry.b)] {
        let [p, m] = grid.arms(node, dir);
        let up = grid.end_value(p.end, u, boundary).abs();
        let um = grid.end_value(m.end, u, boundary).abs();
        let s = 2.0 / (p.length + m.length);
        total += coef * s * (up / p.length + um / m.length + u[node].abs() * (1.0 / p.length + 1.0 / m.length));
    }
    total
}
