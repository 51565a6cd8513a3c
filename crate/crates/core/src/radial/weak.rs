use serde::Serialize;

use super::grid::RadialGrid;
use super::weights::{slopes, RadialState, RadialWeights};
use crate::error::{Error, Result};
use crate::operator::power_nonlinearity;
use crate::params::ProblemParams;

#[derive(Debug, Clone, Serialize)]
pub struct WeakResidualReport {
    pub test_functions: usize,
    /// Largest `|int rho u' phi' + rho~ (c u + F(u) - f) phi|` over the hats.
    pub max_residual: f64,
    /// Same, divided by `1 + int rho~ |f| phi` for each hat.
    pub max_relative_residual: f64,
    pub int_rho_us: f64,
    pub int_rho_du: f64,
    /// `(q, int rho |u'|^q)`.
    pub int_rho_du_q: Vec<(f64, f64)>,
    /// `rho u'` at the innermost node.
    pub flux_at_zero: f64,
    pub all_finite: bool,
}

/// Nodal values of a piecewise-linear test function.
#[derive(Debug, Clone)]
struct Hat {
    values: Vec<f64>,
}

fn nearest(nodes: &[f64], x: f64) -> usize {
    let k = nodes.partition_point(|&r| r < x);
    if k == 0 {
        0
    } else if k >= nodes.len() {
        nodes.len() - 1
    } else if x - nodes[k - 1] <= nodes[k] - x {
        k - 1
    } else {
        k
    }
}

fn hat(nodes: &[f64], a: f64, b: f64) -> Option<Hat> {
    let (ia, ip, ib) = (nearest(nodes, a), nearest(nodes, 0.5 * (a + b)), nearest(nodes, b));
    if !(ia < ip && ip < ib) || ib >= nodes.len() - 1 {
        return None;
    }
    let (ra, rp, rb) = (nodes[ia], nodes[ip], nodes[ib]);
    let values = nodes
        .iter()
        .map(|&r| {
            if r <= ra || r >= rb {
                0.0
            } else if r <= rp {
                (r - ra) / (rp - ra)
            } else {
                (rb - r) / (rb - rp)
            }
        })
        .collect();
    Some(Hat { values })
}

/// Cone `(1 - r/b)^+`, the trace of a Lipschitz function that does not
/// vanish at the origin.
fn cone(nodes: &[f64], b: f64) -> Option<Hat> {
    let ib = nearest(nodes, b);
    if ib == 0 || ib >= nodes.len() - 1 {
        return None;
    }
    let rb = nodes[ib];
    Some(Hat {
        values: nodes.iter().map(|&r| (1.0 - r / rb).max(0.0)).collect(),
    })
}

/// Test functions in a fixed order: a cone, hats on dyadic shells toward the
/// origin, then hats on the dyadic subdivisions of `(0, R)`.
fn test_functions(grid: &RadialGrid, n_test: usize) -> Vec<Hat> {
    let nodes = grid.nodes();
    let radius = grid.radius();
    let mut out = Vec::new();
    out.extend(cone(nodes, 0.5 * radius));
    let mut j = 1;
    while radius * 0.5f64.powi(j + 1) >= nodes[0] && j < 60 {
        out.extend(hat(nodes, radius * 0.5f64.powi(j + 1), radius * 0.5f64.powi(j - 1)));
        j += 1;
    }
    let mut level = 1;
    while out.len() < n_test && level < 20 {
        let parts = 1usize << level;
        for k in 0..parts - 1 {
            let a = radius * k as f64 / parts as f64;
            let b = radius * (k + 2) as f64 / parts as f64;
            out.extend(hat(nodes, a, b));
        }
        level += 1;
    }
    out.truncate(n_test);
    out
}

/// Evaluates the weak identity against `n_test` hat functions together with
/// the integrability diagnostics, by the trapezoid rule (the flux term is
/// exact per interval).
pub fn weak_residual_check(
    grid: &RadialGrid,
    state: &RadialState,
    weights: &RadialWeights,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
    n_test: usize,
) -> Result<WeakResidualReport> {
    if n_test < 8 {
        return Err(Error::Parameter(format!("need at least 8 test functions, got {n_test}")));
    }
    let r = grid.nodes();
    let m = r.len();
    let s = params.s();
    let u = &state.u;
    let slope = slopes(grid, u);
    let flux: Vec<f64> = (0..m - 1).map(|k| weights.rho_face[k + 1] * slope[k]).collect();
    let reaction: Vec<f64> = (0..m)
        .map(|i| weights.rho_tilde[i] * (c_reg * u[i] + power_nonlinearity(u[i], s) - f[i]))
        .collect();
    let source: Vec<f64> = (0..m).map(|i| weights.rho_tilde[i] * f[i].abs()).collect();

    let hats = test_functions(grid, n_test);
    let mut max_residual = 0.0f64;
    let mut max_relative = 0.0f64;
    for h in &hats {
        let phi = &h.values;
        let diffusion: f64 = (0..m - 1).map(|k| flux[k] * (phi[k + 1] - phi[k])).sum();
        let react: Vec<f64> = reaction.iter().zip(phi).map(|(a, p)| a * p).collect();
        let weighted: Vec<f64> = source.iter().zip(phi).map(|(a, p)| a * p).collect();
        let value = (diffusion + grid.trapezoid(&react)).abs();
        max_residual = max_residual.max(value);
        max_relative = max_relative.max(value / (1.0 + grid.trapezoid(&weighted)));
    }

    let integrate = |g: &dyn Fn(usize) -> f64| grid.trapezoid(&(0..m).map(g).collect::<Vec<_>>());
    let rho = &weights.rho;
    let int_rho_us = integrate(&|i| rho[i] * u[i].abs().powf(s));
    let int_rho_du = integrate(&|i| rho[i] * state.du[i].abs());
    let qs = [1.1, 0.5 * (1.0 + 2.0 * s / (s + 1.0))];
    let int_rho_du_q: Vec<(f64, f64)> = qs
        .iter()
        .map(|&q| (q, integrate(&|i| rho[i] * state.du[i].abs().powf(q))))
        .collect();
    let flux_at_zero = rho[0] * state.du[0];
    let all_finite = max_residual.is_finite()
        && int_rho_us.is_finite()
        && int_rho_du.is_finite()
        && flux_at_zero.is_finite()
        && int_rho_du_q.iter().all(|(_, v)| v.is_finite());
    Ok(WeakResidualReport {
        test_functions: hats.len(),
        max_residual,
        max_relative_residual: max_relative,
        int_rho_us,
        int_rho_du,
        int_rho_du_q,
        flux_at_zero,
        all_finite,
    })
}
