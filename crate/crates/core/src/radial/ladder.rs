use serde::Serialize;

use super::grid::RadialGrid;
use super::rhs::{weighted_l1, RadialProfile, RadialRhs};
use super::solve::{solve_radial_bvp_from, RadialSolution, RadialSolverConfig};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::schedule::LadderSchedule;

/// Summary of one rung of the radial approximation ladder.
#[derive(Debug, Clone, Serialize)]
pub struct RadialRung {
    pub radius: f64,
    pub c_n: f64,
    pub epsilon: f64,
    /// `u_n` at the innermost node.
    pub u_first: f64,
    pub r_first: f64,
    /// `int r^{N+ - 1} |f_n|` over the rung's ball.
    pub weighted_l1: f64,
    /// `int rho |u_n|^s`.
    pub int_rho_us: f64,
    pub residual: f64,
    pub outer_iterations: usize,
    pub gate_warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RadialLadder {
    pub rungs: Vec<RadialRung>,
    pub grids: Vec<RadialGrid>,
    pub solutions: Vec<RadialSolution>,
    /// `sup |u_n - u_{n+1}|` over the monitor window, one per consecutive pair.
    pub interior_differences: Vec<f64>,
}

impl RadialLadder {
    /// Successive differences of `u_n(r_1)`.
    pub fn first_node_differences(&self) -> Vec<f64> {
        self.rungs
            .windows(2)
            .map(|w| (w[1].u_first - w[0].u_first).abs())
            .collect()
    }
}

/// Linear interpolant of `values` (on `grid`) at the nodes of `target`,
/// extended by zero outside `grid`'s ball.
pub fn transfer(grid: &RadialGrid, values: &[f64], target: &RadialGrid) -> Vec<f64> {
    if grid == target {
        return values.to_vec();
    }
    target
        .nodes()
        .iter()
        .map(|&r| if r >= grid.radius() { 0.0 } else { grid.interpolate(values, r) })
        .collect()
}

/// `sup |u - v|` over the nodes of both grids lying in `[inner, outer]`.
pub fn window_difference(
    ga: &RadialGrid,
    ua: &[f64],
    gb: &RadialGrid,
    ub: &[f64],
    inner: f64,
    outer: f64,
) -> f64 {
    let lo = inner.max(ga.nodes()[0]).max(gb.nodes()[0]);
    ga.nodes()
        .iter()
        .chain(gb.nodes())
        .filter(|&&r| r >= lo && r <= outer)
        .map(|&r| (ga.interpolate(ua, r) - gb.interpolate(ub, r)).abs())
        .fold(0.0, f64::max)
}

/// Solves the mollified, regularised problems of the schedule in order, each
/// warm-started from the previous rung, on the grid `grid_for(R_n)`.
pub fn approximation_ladder(
    profile: &RadialProfile,
    params: &ProblemParams,
    schedule: &LadderSchedule,
    grid_for: &dyn Fn(f64) -> Result<RadialGrid>,
    cfg: &RadialSolverConfig,
) -> Result<RadialLadder> {
    schedule.validate()?;
    let mut out = RadialLadder {
        rungs: Vec::with_capacity(schedule.len()),
        grids: Vec::with_capacity(schedule.len()),
        solutions: Vec::with_capacity(schedule.len()),
        interior_differences: Vec::new(),
    };
    for n in 0..schedule.len() {
        let wrap = |e: Error| Error::Ladder {
            rung: n,
            source: Box::new(e),
        };
        let radius = schedule.radii[n];
        let grid = grid_for(radius).map_err(wrap)?;
        let rhs = RadialRhs::Mollified {
            profile: profile.clone(),
            epsilon: schedule.epsilons[n],
        };
        let warm = match (out.grids.last(), out.solutions.last()) {
            (Some(g), Some(s)) => Some(transfer(g, &s.state.u, &grid)),
            _ => None,
        };
        let sol = solve_radial_bvp_from(&grid, &rhs, params, schedule.c_n[n], cfg, warm.as_deref())
            .map_err(wrap)?;
        let s = params.s();
        let integrand: Vec<f64> = sol
            .weights
            .rho
            .iter()
            .zip(&sol.state.u)
            .map(|(p, u)| p * u.abs().powf(s))
            .collect();
        out.rungs.push(RadialRung {
            radius,
            c_n: schedule.c_n[n],
            epsilon: schedule.epsilons[n],
            u_first: sol.state.u[0],
            r_first: grid.nodes()[0],
            weighted_l1: weighted_l1(&grid, &sol.rhs, params.n_plus()),
            int_rho_us: grid.trapezoid(&integrand),
            residual: sol.report.residual,
            outer_iterations: sol.report.outer_iterations,
            gate_warning: sol.report.gate_warning.clone(),
        });
        if let (Some(g), Some(prev)) = (out.grids.last(), out.solutions.last()) {
            out.interior_differences.push(window_difference(
                g,
                &prev.state.u,
                &grid,
                &sol.state.u,
                schedule.monitor_inner,
                schedule.monitor_radius,
            ));
        }
        out.grids.push(grid);
        out.solutions.push(sol);
    }
    Ok(out)
}
