//! Large solutions on a disk by escalating Dirichlet data, and the
//! boundary blow-up rate.

use serde::{Deserialize, Serialize};

use crate::barriers::osserman_constant;
use crate::error::{Error, Result};
use crate::grid2d::{policy_iteration_solve, CartesianGrid2, DirectionStencil, Grid2Config};
use crate::params::ProblemParams;

/// Fit samples this close to the circle are dropped, in grid cells.
pub const EXCLUDED_CELLS: f64 = 2.0;
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSchedule {
    pub boundary_values: Vec<f64>,
    pub c_n: Vec<f64>,
    /// `(d_min, d_max)`, distances from the circle.
    pub fit_window: (f64, f64),
}

impl BlowupSchedule {
    pub fn validate(&self, h: f64) -> Result<()> {
        let b = &self.boundary_values;
        if b.len() < 3 {
            return Err(Error::Parameter("escalation needs at least three boundary values".into()));
        }
        if b.iter().any(|v| !(v.is_finite() && *v > 0.0)) || b.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("boundary values must be positive and strictly increasing".into()));
        }
        if b[b.len() - 1] < 100.0 * b[0] {
            return Err(Error::Parameter("boundary values must span at least two decades".into()));
        }
        if self.c_n.len() != b.len()
            || self.c_n.iter().any(|c| !(c.is_finite() && *c >= 0.0))
            || self.c_n.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::Parameter(
                "need one nonnegative, nonincreasing regularisation per boundary value".into(),
            ));
        }
        let (lo, hi) = self.fit_window;
        if !(lo >= EXCLUDED_CELLS * h && hi > lo) {
            return Err(Error::Parameter(format!(
                "fit window ({lo}, {hi}) must be nonempty and start at least {EXCLUDED_CELLS} cells (h = {h}) from the boundary"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub fitted_exponent: f64,
    pub fitted_amplitude: f64,
    pub r_squared: f64,
    pub theoretical_exponent: f64,
    pub theoretical_amplitude: f64,
    pub samples: usize,
    /// Fraction of fit nodes whose control is `(Lambda, Lambda)`, i.e. where
    /// the discrete Hessian is positive in both directions of the chosen
    /// pair. `None` when fitting bare samples.
    pub convex_fraction: Option<f64>,
}

/// Least squares of `log u = log A - e log d` over samples with
/// `d = R - |x|` inside the window and `u > 0`.
pub fn fit_blowup_rate(
    points: &[[f64; 2]],
    values: &[f64],
    domain_radius: f64,
    fit_window: (f64, f64),
    params: &ProblemParams,
) -> Result<RateFit> {
    if points.len() != values.len() {
        return Err(Error::Input(format!("{} points but {} values", points.len(), values.len())));
    }
    let (lo, hi) = fit_window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (x, &u) in points.iter().zip(values) {
        let d = domain_radius - x[0].hypot(x[1]);
        if d >= lo && d <= hi && u > 0.0 && u.is_finite() {
            xs.push(d.ln());
            ys.push(u.ln());
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} usable samples in window ({lo}, {hi}), need {MIN_FIT_SAMPLES}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all samples sit at one distance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 0.0 };
    let alpha = 2.0 / (params.s() - 1.0);
    Ok(RateFit {
        fitted_exponent: -slope,
        fitted_amplitude: intercept.exp(),
        r_squared,
        theoretical_exponent: alpha,
        theoretical_amplitude: (params.Lambda() * alpha * (alpha + 1.0)).powf(1.0 / (params.s() - 1.0)),
        samples: xs.len(),
        convex_fraction: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupRung {
    pub boundary_value: f64,
    pub c_n: f64,
    pub center_value: f64,
    /// `min (u_n - u_{n-1})` over nodes; absent for the first rung.
    pub min_increment: Option<f64>,
    pub policy_updates: usize,
    pub residual: f64,
    /// `max u(x) / [C d(x)^{-a} + (sup f)^{1/s}]` over nodes at least two
    /// cells from the circle, the cap from the barrier on `B(x, d(x))`.
    pub barrier_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ExplosiveRun {
    pub grid: CartesianGrid2,
    pub solutions: Vec<Vec<f64>>,
    pub rungs: Vec<BlowupRung>,
    pub fit: RateFit,
    /// Relative change of the centre value between the last two rungs.
    pub center_change: f64,
}

/// Monotonicity slack: `u_{n+1} >= u_n - MONOTONE_TOL` must hold nodewise.
pub const MONOTONE_TOL: f64 = 1e-8;

/// Solves on the disk of radius `domain_radius` with Dirichlet data raised
/// through `schedule.boundary_values`, each rung warm-started from the last,
/// and fits the blow-up rate on the final rung.
pub fn solve_explosive(
    domain_radius: f64,
    f: &dyn Fn([f64; 2]) -> f64,
    params: &ProblemParams,
    schedule: &BlowupSchedule,
    h: f64,
    cfg: &Grid2Config,
) -> Result<ExplosiveRun> {
    schedule.validate(h)?;
    let grid = CartesianGrid2::new(domain_radius, h, DirectionStencil::standard())?;
    let fv: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
    if let Some(i) = fv.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("data is not finite at {:?}", grid.point(i))));
    }
    let (alpha, c) = osserman_constant(params)?;
    let shift = fv.iter().copied().fold(0.0, f64::max).powf(1.0 / params.s());
    let centre = (0..grid.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (grid.point(a), grid.point(b));
            pa[0].hypot(pa[1]).total_cmp(&pb[0].hypot(pb[1]))
        })
        .unwrap_or(0);
    let mut solutions: Vec<Vec<f64>> = Vec::new();
    let mut rungs = Vec::new();
    let mut last_policy = None;
    for (k, (&g, &cn)) in schedule.boundary_values.iter().zip(&schedule.c_n).enumerate() {
        let sol = policy_iteration_solve(&grid, &fv, params, cn, &|_| g, cfg, solutions.last().map(|v| v.as_slice()))
            .map_err(|e| Error::Escalation(format!("rung {k} (boundary value {g}): {e}")))?;
        let min_increment = solutions.last().map(|prev| {
            sol.u.iter().zip(prev).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
        });
        if let Some(m) = min_increment {
            if m < -MONOTONE_TOL {
                return Err(Error::Escalation(format!(
                    "monotonicity violated at rung {k}: u_n - u_(n-1) reaches {m:.3e}"
                )));
            }
        }
        let barrier_ratio = (0..grid.len())
            .filter_map(|n| {
                let x = grid.point(n);
                let d = domain_radius - x[0].hypot(x[1]);
                (d >= EXCLUDED_CELLS * h).then(|| sol.u[n] / (c * d.powf(-alpha) + shift))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        rungs.push(BlowupRung {
            boundary_value: g,
            c_n: cn,
            center_value: sol.u[centre],
            min_increment,
            policy_updates: sol.report.policy_updates,
            residual: sol.report.residual,
            barrier_ratio,
        });
        solutions.push(sol.u);
        last_policy = Some(sol.policy);
    }
    let u = solutions.last().expect("schedule has rungs");
    let mut fit = fit_blowup_rate(&grid.points(), u, domain_radius, schedule.fit_window, params)?;
    if let Some(policy) = last_policy {
        let big = params.Lambda();
        let (lo, hi) = schedule.fit_window;
        let in_window: Vec<bool> = (0..grid.len())
            .map(|n| {
                let x = grid.point(n);
                let d = domain_radius - x[0].hypot(x[1]);
                d >= lo && d <= hi
            })
            .collect();
        let total = in_window.iter().filter(|&&b| b).count();
        let convex = (0..grid.len())
            .filter(|&n| in_window[n] && policy[n].a == big && policy[n].b == big)
            .count();
        fit.convex_fraction = (total > 0).then(|| convex as f64 / total as f64);
    }
    let m = rungs.len();
    let center_change =
        (rungs[m - 1].center_value - rungs[m - 2].center_value).abs() / rungs[m - 1].center_value.abs().max(f64::MIN_POSITIVE);
    Ok(ExplosiveRun {
        grid,
        solutions,
        rungs,
        fit,
        center_change,
    })
}
