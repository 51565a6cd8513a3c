//! State-dependent coefficients that put the radial equation in divergence
//! form `-(rho u')' + rho~ |u|^{s-1} u = rho~ f`.
//!
//! The branch `Theta` is read off the equation itself,
//! `theta(-theta(u')(N-1)u'/r + c u + |u|^{s-1}u - f)`, so no discrete
//! second difference is involved. The effective dimension is constant on
//! each control volume, which makes `rho = exp(int_1^r (N(t)-1)/t dt)` a
//! product of power laws that is accumulated exactly.

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::operator::{power_nonlinearity, theta};
use crate::params::ProblemParams;

/// Nodal values and the reconstructed derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Set once weights have been computed from this state.
    pub frozen: bool,
}

impl RadialState {
    /// Builds a state from nodal values; the last value is forced to zero.
    pub fn from_values(grid: &RadialGrid, mut u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::Input(format!(
                "state has {} values for {} nodes",
                u.len(),
                grid.len()
            )));
        }
        let last = u.len() - 1;
        u[last] = 0.0;
        let du = reconstruct_derivative(grid, &u);
        Ok(Self {
            u,
            du,
            frozen: false,
        })
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()]).expect("length matches")
    }
}

/// Interval slopes `(u_{i+1} - u_i) / (r_{i+1} - r_i)`.
pub fn slopes(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    grid.nodes()
        .windows(2)
        .zip(u.windows(2))
        .map(|(r, v)| (v[1] - v[0]) / (r[1] - r[0]))
        .collect()
}

/// Nodal `u'`: weighted central slopes inside, `u'(0) = 0` interpolation at
/// the first node and linear extrapolation of the slopes at `R`. All three
/// are exact for quadratics.
pub fn reconstruct_derivative(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let m = r.len();
    let s = slopes(grid, u);
    let mut du = vec![0.0; m];
    du[0] = s[0] * r[0] / (0.5 * (r[0] + r[1]));
    for i in 1..m - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        du[i] = (hm * s[i] + hp * s[i - 1]) / (hm + hp);
    }
    let h1 = r[m - 1] - r[m - 2];
    let h0 = r[m - 2] - r[m - 3];
    du[m - 1] = s[m - 2] + (s[m - 2] - s[m - 3]) * h1 / (h1 + h0);
    du
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialWeights {
    /// `Theta` per node, in `{lambda, Lambda}`.
    pub theta_big: Vec<f64>,
    /// `theta(u')` per node.
    pub theta_slope: Vec<f64>,
    /// Effective dimension per node (and per control volume).
    pub dim_eff: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_tilde: Vec<f64>,
    /// `rho` at the control-volume faces (see [`RadialGrid::faces`]).
    pub rho_face: Vec<f64>,
}

/// Hysteresis used inside the solver: a branch only switches when its
/// argument clears a small band, which keeps rounding noise on plateaus from
/// toggling it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hysteresis<'a> {
    pub previous: &'a RadialWeights,
    pub band: f64,
    /// Nodes whose branch arguments oscillate about zero; both branches take
    /// the value at zero, `Lambda`.
    pub locked: &'a [bool],
}

pub fn compute_weights(
    grid: &RadialGrid,
    state: &RadialState,
    f: &[f64],
    params: &ProblemParams,
) -> Result<RadialWeights> {
    compute_weights_regularized(grid, state, f, params, 0.0)
}

/// Same as [`compute_weights`] with the `c u` term of the regularised
/// problem included in the branch argument.
pub fn compute_weights_regularized(
    grid: &RadialGrid,
    state: &RadialState,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
) -> Result<RadialWeights> {
    weights_impl(grid, state, f, params, c_reg, None)
}

pub(crate) fn weights_impl(
    grid: &RadialGrid,
    state: &RadialState,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
    hysteresis: Option<Hysteresis<'_>>,
) -> Result<RadialWeights> {
    let r = grid.nodes();
    let m = r.len();
    if state.u.len() != m || state.du.len() != m || f.len() != m {
        return Err(Error::Input("state, data and grid lengths differ".into()));
    }
    if let Some(i) = (0..m).find(|&i| !(state.u[i].is_finite() && state.du[i].is_finite())) {
        return Err(Error::Numeric(format!("state is not finite at r = {}", r[i])));
    }
    let n1 = params.dim() as f64 - 1.0;
    let s = params.s();
    let du_scale = state.du.iter().fold(0.0f64, |a, &d| a.max(d.abs()));

    let mut theta_big = Vec::with_capacity(m);
    let mut theta_slope = Vec::with_capacity(m);
    let mut dim_eff = Vec::with_capacity(m);
    for i in 0..m {
        let du = state.du[i];
        let locked = hysteresis.is_some_and(|h| h.locked.get(i).copied().unwrap_or(false));
        let mut ts = theta(du, params);
        if locked {
            // an argument that keeps changing sign is read as zero
            ts = params.Lambda();
        } else if let Some(h) = hysteresis {
            if du.abs() <= h.band * du_scale {
                ts = h.previous.theta_slope[i];
            }
        }
        let drift = -ts * n1 * du / r[i];
        let reaction = c_reg * state.u[i] + power_nonlinearity(state.u[i], s);
        let arg = drift + reaction - f[i];
        let mut tb = theta(arg, params);
        if locked {
            tb = params.Lambda();
        } else if let Some(h) = hysteresis {
            let scale = drift.abs() + reaction.abs() + f[i].abs();
            if arg.abs() <= h.band * scale {
                tb = h.previous.theta_big[i];
            }
        }
        theta_big.push(tb);
        theta_slope.push(ts);
        dim_eff.push(ts / tb * n1 + 1.0);
    }

    // log(rho) relative to the right face of the first control volume
    let faces = grid.faces();
    let mut log_face = vec![0.0; m + 1];
    for i in 1..m {
        log_face[i + 1] = log_face[i] + (dim_eff[i] - 1.0) * (faces[i + 1] / faces[i]).ln();
    }
    let log_at = |cv: usize, x: f64| log_face[cv + 1] - (dim_eff[cv] - 1.0) * (faces[cv + 1] / x).ln();
    let radius = grid.radius();
    let log_one = if radius >= 1.0 {
        let cv = (faces.partition_point(|&b| b < 1.0)).clamp(1, m) - 1;
        log_at(cv, 1.0)
    } else {
        log_face[m] + (dim_eff[m - 1] - 1.0) * (1.0 / radius).ln()
    };

    let rho: Vec<f64> = (0..m).map(|i| (log_at(i, r[i]) - log_one).exp()).collect();
    let mut rho_face: Vec<f64> = (0..=m)
        .map(|k| if k == 0 { 0.0 } else { (log_face[k] - log_one).exp() })
        .collect();
    if dim_eff[0] == 1.0 {
        rho_face[0] = (log_at(0, r[0]) - log_one).exp();
    }
    let rho_tilde = rho.iter().zip(&theta_big).map(|(p, t)| p / t).collect();
    Ok(RadialWeights {
        theta_big,
        theta_slope,
        dim_eff,
        rho,
        rho_tilde,
        rho_face,
    })
}

impl RadialWeights {
    /// Number of nodes whose `Theta` or `theta(u')` differs from `other`.
    pub fn branch_flips(&self, other: &RadialWeights) -> usize {
        self.flipped_nodes(other).filter(|&f| f).count()
    }

    /// Per node, whether either branch differs from `other`.
    pub fn flipped_nodes<'a>(&'a self, other: &'a RadialWeights) -> impl Iterator<Item = bool> + 'a {
        self.theta_big
            .iter()
            .zip(&other.theta_big)
            .zip(self.theta_slope.iter().zip(&other.theta_slope))
            .map(|((a, b), (c, d))| a != b || c != d)
    }

    /// Checks the weight sandwich bounds; returns the first violation.
    pub fn check_bounds(&self, grid: &RadialGrid, params: &ProblemParams) -> std::result::Result<(), String> {
        let (np, nm) = (params.n_plus(), params.n_minus());
        let tol = 1e-12;
        for (i, &r) in grid.nodes().iter().enumerate() {
            let t = self.theta_big[i];
            if t != params.lambda() && t != params.Lambda() {
                return Err(format!("Theta={t} at r={r} is not a branch value"));
            }
            let d = self.dim_eff[i];
            if d < np * (1.0 - tol) || d > nm * (1.0 + tol) {
                return Err(format!("dim_eff={d} at r={r} outside [{np}, {nm}]"));
            }
            if r <= 1.0 {
                let (lo, hi) = (r.powf(nm - 1.0), r.powf(np - 1.0));
                if self.rho[i] < lo * (1.0 - 1e-10) || self.rho[i] > hi * (1.0 + 1e-10) {
                    return Err(format!("rho={} at r={r} outside [{lo}, {hi}]", self.rho[i]));
                }
            }
            let (lo, hi) = (self.rho[i] / params.Lambda(), self.rho[i] / params.lambda());
            if self.rho_tilde[i] < lo * (1.0 - tol) || self.rho_tilde[i] > hi * (1.0 + tol) {
                return Err(format!("rho~ at r={r} outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}
