use serde::Serialize;

use super::bellman::discrete_pucci_plus;
use super::grid::{ArmEnd, CartesianGrid2};
use super::solve::{policy_iteration_solve, Grid2Config, Grid2Solution};
use super::stencil::DirectionStencil;
use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::operator::power_nonlinearity;
use crate::params::ProblemParams;
use crate::schedule::LadderSchedule;

#[derive(Debug, Clone, Serialize)]
pub struct Grid2Rung {
    pub radius: f64,
    pub c_n: f64,
    pub epsilon: f64,
    pub nodes: usize,
    pub policy_updates: usize,
    pub residual: f64,
    pub min_u: f64,
    /// `sup u_n` over the monitor window.
    pub monitor_sup: f64,
    /// Discrete `||f_n||_{L^N}` over the ball of radius `norm_radius`.
    pub f_norm: f64,
    pub norm_radius: f64,
    /// `monitor_sup / (1 + f_norm)`, the local-bound diagnostic.
    pub local_bound_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Grid2Ladder {
    pub rungs: Vec<Grid2Rung>,
    pub grids: Vec<CartesianGrid2>,
    pub solutions: Vec<Grid2Solution>,
    /// `sup |u_n - u_{n+1}|` over the monitor window, one per consecutive pair.
    pub monitor_differences: Vec<f64>,
}

/// Discrete `(sum h^2 |f|^p)^{1/p}` over nodes with `|x| < radius`.
pub fn discrete_lp_norm(grid: &CartesianGrid2, values: &[f64], p: f64, radius: f64) -> f64 {
    let h2 = grid.h() * grid.h();
    let sum: f64 = (0..grid.len())
        .filter(|&n| {
            let x = grid.point(n);
            x[0].hypot(x[1]) < radius
        })
        .map(|n| h2 * values[n].abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

/// Copies values between grids of equal spacing by lattice index; nodes
/// absent from `from` get zero.
pub fn transfer_by_lattice(from: &CartesianGrid2, values: &[f64], to: &CartesianGrid2) -> Vec<f64> {
    to.lattice()
        .iter()
        .map(|&[i, j]| from.index_of(i, j).map_or(0.0, |k| values[k]))
        .collect()
}

/// Regularised problems `-M(D^2 u_n) + c_n u_n + |u_n|^{s-1} u_n = f_n` on
/// the balls `B_{R_n}` with zero Dirichlet data, `f_n` the data smoothed at
/// width `eps_n`. Each rung starts from the previous solution.
pub fn whole_space_ladder(
    f: &dyn Fn([f64; 2]) -> f64,
    params: &ProblemParams,
    schedule: &LadderSchedule,
    h: f64,
    stencil: &DirectionStencil,
    cfg: &Grid2Config,
) -> Result<Grid2Ladder> {
    schedule.validate()?;
    let mut out = Grid2Ladder {
        rungs: Vec::new(),
        grids: Vec::new(),
        solutions: Vec::new(),
        monitor_differences: Vec::new(),
    };
    let monitor = schedule.monitor_radius;
    for n in 0..schedule.len() {
        let wrap = |e: Error| Error::Ladder {
            rung: n,
            source: Box::new(e),
        };
        let radius = schedule.radii[n];
        let grid = CartesianGrid2::new(radius, h, stencil.clone()).map_err(wrap)?;
        let moll = Mollifier::new(schedule.epsilons[n]).map_err(wrap)?;
        let fn_vals: Vec<f64> = grid.points().iter().map(|&x| moll.planar(f, x)).collect();
        let initial = out
            .grids
            .last()
            .zip(out.solutions.last())
            .map(|(g, s): (&CartesianGrid2, &Grid2Solution)| transfer_by_lattice(g, &s.u, &grid));
        let sol = policy_iteration_solve(&grid, &fn_vals, params, schedule.c_n[n], &|_| 0.0, cfg, initial.as_deref())
            .map_err(wrap)?;
        let norm_radius = (2.0 * monitor).min(radius);
        let f_norm = discrete_lp_norm(&grid, &fn_vals, params.dim() as f64, norm_radius);
        let monitor_sup = grid.sup_within(&sol.u, monitor);
        if let (Some(g), Some(prev)) = (out.grids.last(), out.solutions.last()) {
            let diff = (0..grid.len())
                .filter(|&k| {
                    let x = grid.point(k);
                    x[0].hypot(x[1]) <= monitor
                })
                .filter_map(|k| {
                    let [i, j] = grid.lattice()[k];
                    g.index_of(i, j).map(|m| (sol.u[k] - prev.u[m]).abs())
                })
                .fold(0.0f64, f64::max);
            out.monitor_differences.push(diff);
        }
        out.rungs.push(Grid2Rung {
            radius,
            c_n: schedule.c_n[n],
            epsilon: schedule.epsilons[n],
            nodes: grid.len(),
            policy_updates: sol.report.policy_updates,
            residual: sol.report.residual,
            min_u: sol.u.iter().copied().fold(f64::INFINITY, f64::min),
            monitor_sup,
            f_norm,
            norm_radius,
            local_bound_ratio: monitor_sup / (1.0 + f_norm),
        });
        out.grids.push(grid);
        out.solutions.push(sol);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct KatoReport {
    pub checked: usize,
    /// Nodes skipped because their stencil straddles a sign change of `u`.
    pub skipped_kinks: usize,
    /// Largest `-M+_h(|u|) + c|u| + ||u|^s| - |f|`, clipped below at 0.
    pub max_excess: f64,
    pub worst_point: Option<[f64; 2]>,
}

/// Evaluates the Kato-type inequality `-M+(D^2|u|) + c|u| + |u|^s <= |f|` on
/// a solved grid function.
pub fn kato_subsolution_check(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
) -> KatoReport {
    let abs_u: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let abs_b: Vec<f64> = boundary.iter().map(|v| v.abs()).collect();
    let mut report = KatoReport {
        checked: 0,
        skipped_kinks: 0,
        max_excess: 0.0,
        worst_point: None,
    };
    let dirs = 2 * grid.stencil().len();
    for n in 0..grid.len() {
        let kink = (0..dirs).any(|d| {
            grid.arms(n, d).iter().any(|arm| {
                let v = match arm.end {
                    ArmEnd::Node(m) => u[m],
                    ArmEnd::Boundary(b) => boundary[b],
                };
                v * u[n] < 0.0
            })
        });
        if kink {
            report.skipped_kinks += 1;
            continue;
        }
        report.checked += 1;
        let (m, _) = discrete_pucci_plus(grid, &abs_u, &abs_b, n, params);
        let excess = -m + c_reg * abs_u[n] + power_nonlinearity(abs_u[n], params.s()) - f[n].abs();
        if excess > report.max_excess {
            report.max_excess = excess;
            report.worst_point = Some(grid.point(n));
        }
    }
    report
}
