use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::rhs::RadialRhs;
use super::weights::{weights_impl, Hysteresis, RadialState, RadialWeights};
use crate::error::{Error, Result};
use crate::operator::{power_nonlinearity, power_nonlinearity_derivative};
use crate::params::ProblemParams;
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSolverConfig {
    /// Max-norm residual tolerance, relative to `max(1, |rho~ f|_inf)`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// Under-relaxation applied to the iterate after an outer step that
    /// flipped branches.
    pub relaxation: f64,
    /// Relative band inside which a branch keeps its previous value.
    pub hysteresis_band: f64,
    /// Skip the weighted-L1 admissibility gate.
    pub exploratory: bool,
    /// A node whose branches have flipped this many times is treated as
    /// sitting on the switching surface for the rest of the solve.
    pub lock_after_flips: usize,
    /// Restarts from the converged state with all locks released, repeated
    /// until the lock set is reproduced.
    pub max_releases: usize,
}

impl Default for RadialSolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_outer: 200,
            max_newton: 100,
            max_halvings: 30,
            relaxation: 0.5,
            hysteresis_band: 1e-9,
            exploratory: false,
            lock_after_flips: 24,
            max_releases: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolveReport {
    pub outer_iterations: usize,
    pub newton_iterations: usize,
    pub residual: f64,
    pub residual_scale: f64,
    pub residual_history: Vec<f64>,
    pub flip_history: Vec<usize>,
    /// Nodes whose branches were locked after repeated flipping.
    pub locked_nodes: usize,
    /// Set when the admissibility gate failed and `exploratory` bypassed it.
    pub gate_warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub state: RadialState,
    pub weights: RadialWeights,
    pub rhs: Vec<f64>,
    pub c_reg: f64,
    pub report: RadialSolveReport,
}

/// Per-node residual of the finite-volume scheme:
/// `-[(rho u')_{i+1/2} - (rho u')_{i-1/2}] / dr_i + rho~_i (c u_i + F(u_i) - f_i)`.
///
/// The flux through the left face of the first volume (at `r = 0`) is zero;
/// the Dirichlet node carries residual zero.
pub fn assemble_residual(
    grid: &RadialGrid,
    state: &RadialState,
    weights: &RadialWeights,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
) -> Vec<f64> {
    residual_parts(grid, &state.u, weights, f, params, c_reg).0
}

/// Residual and the per-node rounding floor.
fn residual_parts(
    grid: &RadialGrid,
    u: &[f64],
    w: &RadialWeights,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
) -> (Vec<f64>, Vec<f64>) {
    let r = grid.nodes();
    let m = r.len();
    let faces = grid.faces();
    let s = params.s();
    let flux: Vec<f64> = (0..=m)
        .map(|k| {
            if k == 0 || k == m {
                0.0
            } else {
                w.rho_face[k] * (u[k] - u[k - 1]) / (r[k] - r[k - 1])
            }
        })
        .collect();
    let mut res = vec![0.0; m];
    let mut floor = vec![0.0; m];
    for i in 0..m - 1 {
        let dr = faces[i + 1] - faces[i];
        let reaction = c_reg * u[i] + power_nonlinearity(u[i], s);
        res[i] = -(flux[i + 1] - flux[i]) / dr + w.rho_tilde[i] * (reaction - f[i]);
        let magnitude = (flux[i + 1].abs() + flux[i].abs()) / dr
            + w.rho_tilde[i] * (c_reg * u[i].abs() + reaction.abs() + f[i].abs())
            + w.rho_face[i + 1] * u[i].abs() / ((r[i + 1] - r[i]) * dr);
        floor[i] = 64.0 * f64::EPSILON * magnitude;
    }
    (res, floor)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

struct Frozen<'a> {
    grid: &'a RadialGrid,
    weights: &'a RadialWeights,
    f: &'a [f64],
    params: &'a ProblemParams,
    c_reg: f64,
    tol_abs: f64,
}

impl Frozen<'_> {
    fn converged(&self, res: &[f64], floor: &[f64]) -> bool {
        res.iter().zip(floor).all(|(r, fl)| r.abs() <= self.tol_abs + fl)
    }

    /// Damped Newton with the weights held fixed.
    fn newton(&self, u: &mut [f64], cfg: &RadialSolverConfig) -> Result<usize> {
        let r = self.grid.nodes();
        let m = r.len();
        let faces = self.grid.faces();
        let s = self.params.s();
        let w = self.weights;
        let mut history = Vec::new();
        for it in 0..=cfg.max_newton {
            let (res, floor) = residual_parts(self.grid, u, w, self.f, self.params, self.c_reg);
            let norm = max_abs(&res);
            history.push(norm);
            if self.converged(&res, &floor) {
                return Ok(it);
            }
            if it == cfg.max_newton {
                break;
            }
            // Jacobian of dr_i * res_i on the interior unknowns 0..m-1
            let n = m - 1;
            let mut lower = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let dr = faces[i + 1] - faces[i];
                let right = w.rho_face[i + 1] / (r[i + 1] - r[i]);
                let left = if i > 0 { w.rho_face[i] / (r[i] - r[i - 1]) } else { 0.0 };
                let mass = w.rho_tilde[i] * dr;
                diag[i] = right + left + mass * (self.c_reg + power_nonlinearity_derivative(u[i], s));
                if i > 0 {
                    lower[i] = -left;
                }
                if i + 1 < n {
                    upper[i] = -right;
                }
                rhs[i] = -res[i] * dr;
            }
            let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs);
            let mut step = 1.0;
            let mut accepted = false;
            let mut trial = u.to_vec();
            for _ in 0..=cfg.max_halvings {
                for i in 0..n {
                    trial[i] = u[i] + step * delta[i];
                }
                let (tr, tf) = residual_parts(self.grid, &trial, w, self.f, self.params, self.c_reg);
                let tn = max_abs(&tr);
                if tn.is_finite() && (tn < norm || self.converged(&tr, &tf)) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            u.copy_from_slice(&trial);
        }
        Err(Error::Convergence {
            iterations: history.len(),
            last: *history.last().unwrap_or(&f64::NAN),
            history,
        })
    }
}

/// Solves `-(rho u')' + rho~ (c u + |u|^{s-1} u) = rho~ f` on `(0, R]` with
/// `u(R) = 0`, starting from `u = 0`.
pub fn solve_radial_bvp(
    grid: &RadialGrid,
    rhs: &RadialRhs,
    params: &ProblemParams,
    c_reg: f64,
    cfg: &RadialSolverConfig,
) -> Result<RadialSolution> {
    solve_radial_bvp_from(grid, rhs, params, c_reg, cfg, None)
}

/// As [`solve_radial_bvp`] with an optional initial guess.
///
/// Picard iteration on the weights: freeze `rho`, `rho~` from the current
/// iterate, solve the frozen problem by damped Newton on the tridiagonal
/// system, recompute the weights. Converged once two consecutive outer steps
/// flip no branch and the residual is below tolerance.
pub fn solve_radial_bvp_from(
    grid: &RadialGrid,
    rhs: &RadialRhs,
    params: &ProblemParams,
    c_reg: f64,
    cfg: &RadialSolverConfig,
    initial: Option<&[f64]>,
) -> Result<RadialSolution> {
    if !(c_reg >= 0.0 && c_reg.is_finite()) {
        return Err(Error::Parameter(format!("regularisation must be nonnegative, got {c_reg}")));
    }
    let gate = rhs.admissibility(grid, params);
    let mut gate_warning = None;
    if !gate.admissible {
        let msg = format!(
            "data fails the weighted-L1 gate (int r^(N+ - 1)|f| = {}, N+ = {})",
            gate.weighted_l1,
            params.n_plus()
        );
        if !cfg.exploratory {
            return Err(Error::Input(msg));
        }
        gate_warning = Some(msg);
    }
    let f = rhs.values(grid)?;
    let u0 = match initial {
        Some(u) => u.to_vec(),
        None => vec![0.0; grid.len()],
    };
    let state = RadialState::from_values(grid, u0)?;
    let weights = weights_impl(grid, &state, &f, params, c_reg, None)?;
    let rho_f = weights
        .rho_tilde
        .iter()
        .zip(&f)
        .fold(0.0f64, |a, (p, v)| a.max((p * v).abs()));
    let scale = rho_f.max(1.0);
    let problem = Problem {
        grid,
        f: &f,
        params,
        c_reg,
        cfg,
        tol_abs: cfg.tol * scale,
    };

    let mut stats = Stats::default();
    let mut pass = problem.picard(state, weights, vec![false; grid.len()], &mut stats)?;
    // Locks depend on the path that led to them. Restarting from the
    // converged state with every lock released leaves locked only the nodes
    // that cycle next to the solution itself.
    for _ in 0..cfg.max_releases {
        if !pass.2.contains(&true) {
            break;
        }
        let previous = pass.2.clone();
        let weights = weights_impl(grid, &pass.0, &f, params, c_reg, None)?;
        pass = problem.picard(pass.0, weights, vec![false; grid.len()], &mut stats)?;
        if pass.2 == previous {
            break;
        }
    }
    let (mut state, weights, locked, norm) = pass;
    state.frozen = true;
    Ok(RadialSolution {
        state,
        weights,
        rhs: f,
        c_reg,
        report: RadialSolveReport {
            outer_iterations: stats.outer,
            newton_iterations: stats.newton,
            residual: norm,
            residual_scale: scale,
            residual_history: stats.residual_history,
            flip_history: stats.flip_history,
            locked_nodes: locked.iter().filter(|&&l| l).count(),
            gate_warning,
        },
    })
}

#[derive(Default)]
struct Stats {
    outer: usize,
    newton: usize,
    residual_history: Vec<f64>,
    flip_history: Vec<usize>,
}

struct Problem<'a> {
    grid: &'a RadialGrid,
    f: &'a [f64],
    params: &'a ProblemParams,
    c_reg: f64,
    cfg: &'a RadialSolverConfig,
    tol_abs: f64,
}

impl Problem<'_> {
    /// One Picard run; returns the state, its weights, the lock mask and the
    /// final residual norm.
    fn picard(
        &self,
        mut state: RadialState,
        mut weights: RadialWeights,
        mut locked: Vec<bool>,
        stats: &mut Stats,
    ) -> Result<(RadialState, RadialWeights, Vec<bool>, f64)> {
        let (grid, f, params, c_reg, cfg) = (self.grid, self.f, self.params, self.c_reg, self.cfg);
        let mut quiet = 0;
        let mut flip_counts = vec![0usize; grid.len()];
        let first = stats.residual_history.len();
        for _ in 0..cfg.max_outer {
            stats.outer += 1;
            let mut u = state.u.clone();
            let frozen = Frozen {
                grid,
                weights: &weights,
                f,
                params,
                c_reg,
                tol_abs: self.tol_abs,
            };
            stats.newton += frozen.newton(&mut u, cfg)?;
            let candidate = RadialState::from_values(grid, u)?;
            let next = weights_impl(
                grid,
                &candidate,
                f,
                params,
                c_reg,
                Some(Hysteresis {
                    previous: &weights,
                    band: cfg.hysteresis_band,
                    locked: &locked,
                }),
            )?;
            let flips = next.branch_flips(&weights);
            for (i, flipped) in next.flipped_nodes(&weights).enumerate() {
                if flipped {
                    flip_counts[i] += 1;
                    if flip_counts[i] >= cfg.lock_after_flips {
                        locked[i] = true;
                    }
                }
            }
            stats.flip_history.push(flips);
            if flips == 0 {
                state = candidate;
                weights = next;
                quiet += 1;
            } else {
                quiet = 0;
                let blended: Vec<f64> = state
                    .u
                    .iter()
                    .zip(&candidate.u)
                    .map(|(a, b)| (1.0 - cfg.relaxation) * a + cfg.relaxation * b)
                    .collect();
                state = RadialState::from_values(grid, blended)?;
                weights = weights_impl(
                    grid,
                    &state,
                    f,
                    params,
                    c_reg,
                    Some(Hysteresis {
                        previous: &weights,
                        band: cfg.hysteresis_band,
                        locked: &locked,
                    }),
                )?;
            }
            let (res, floor) = residual_parts(grid, &state.u, &weights, f, params, c_reg);
            let norm = max_abs(&res);
            stats.residual_history.push(norm);
            let small = res.iter().zip(&floor).all(|(r, fl)| r.abs() <= self.tol_abs + fl);
            if quiet >= 2 && small {
                return Ok((state, weights, locked, norm));
            }
        }
        let history = stats.residual_history[first..].to_vec();
        Err(Error::Convergence {
            iterations: cfg.max_outer,
            last: *history.last().unwrap_or(&f64::NAN),
            history,
        })
    }
}
