//! Osserman's explosive supersolution `U = C R^a / (R^2 - |x|^2)^a`,
//! comparison verdicts, and the boundary-independent local bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid2d::{discrete_lp_norm, policy_iteration_solve, CartesianGrid2, DirectionStencil, Grid2Config};
use crate::params::ProblemParams;

/// `(alpha, C)` with `alpha = 2/(s-1)` and
/// `C^{s-1} = 2 alpha Lambda max{N, 2(alpha+1)}`, the smallest constant of
/// this form for which `U` is a supersolution up to the boundary.
pub fn osserman_constant(params: &ProblemParams) -> Result<(f64, f64)> {
    let alpha = exponent(params)?;
    let n = params.dim() as f64;
    let c_pow = 2.0 * alpha * params.Lambda() * n.max(2.0 * (alpha + 1.0));
    Ok((alpha, c_pow.powf(1.0 / (params.s() - 1.0))))
}

/// The constant with `max{N, alpha+1}` in place of `max{N, 2(alpha+1)}`.
/// When `2(alpha+1) > N` the resulting `U` fails the supersolution
/// inequality near `|x| = R`.
pub fn osserman_constant_as_stated(params: &ProblemParams) -> Result<(f64, f64)> {
    let alpha = exponent(params)?;
    let n = params.dim() as f64;
    let c_pow = 2.0 * alpha * params.Lambda() * n.max(alpha + 1.0);
    Ok((alpha, c_pow.powf(1.0 / (params.s() - 1.0))))
}

fn exponent(params: &ProblemParams) -> Result<f64> {
    let s = params.s();
    if !(s > 1.0) {
        return Err(Error::Parameter(format!("exponent s must exceed 1, got {s}")));
    }
    Ok(2.0 / (s - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierValue {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OssermanBarrier {
    radius: f64,
    alpha: f64,
    c: f64,
    #[serde(skip)]
    c_pow: f64,
    #[serde(skip)]
    params: ProblemParams,
}

impl OssermanBarrier {
    pub fn new(radius: f64, params: &ProblemParams) -> Result<Self> {
        let (alpha, c) = osserman_constant(params)?;
        let mut b = Self::with_constant(radius, params, c)?;
        // keep C^{s-1} exact so the bracket in `residual` cancels exactly
        b.c_pow = 2.0 * alpha * params.Lambda() * (params.dim() as f64).max(2.0 * (alpha + 1.0));
        Ok(b)
    }

    pub fn with_constant(radius: f64, params: &ProblemParams, c: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!("barrier radius must be positive, got {radius}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("barrier constant must be positive, got {c}")));
        }
        Ok(Self {
            radius,
            alpha: exponent(params)?,
            c,
            c_pow: c.powf(params.s() - 1.0),
            params: *params,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    // R^2 - r^2 without cancellation near r = R
    fn gap(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        if !(r < self.radius) {
            return Err(Error::Domain(format!("barrier evaluated at r = {r} >= R = {}", self.radius)));
        }
        Ok((self.radius - r) * (self.radius + r))
    }

    /// `U`, `U'` and `U''` at radius `r`.
    pub fn eval(&self, r: f64) -> Result<BarrierValue> {
        let w = self.gap(r)?;
        let a = self.alpha;
        let u = self.c * self.radius.powf(a) * w.powf(-a);
        Ok(BarrierValue {
            u,
            du: u * 2.0 * a * r / w,
            d2u: u * (2.0 * a / w + 4.0 * a * (a + 1.0) * r * r / (w * w)),
        })
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.u)
    }

    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.value(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `Delta U` at radius `r`; at `r = 0` this is `N U''(0)`.
    pub fn laplacian(&self, r: f64) -> Result<f64> {
        let v = self.eval(r)?;
        let n = self.params.dim() as f64;
        if r == 0.0 {
            return Ok(n * v.d2u);
        }
        Ok(v.d2u + (n - 1.0) * v.du / r)
    }

    /// `-Lambda Delta U + U^s`, evaluated as
    /// `U w^{-2} [C^{s-1} R^2 - Lambda (2 a N w + 4 a (a+1) r^2)]` with
    /// `w = R^2 - r^2`, so that the cancellation near the boundary happens in
    /// the bracket and not between two huge terms.
    pub fn residual(&self, r: f64) -> Result<f64> {
        let w = self.gap(r)?;
        let u = self.value(r)?;
        let a = self.alpha;
        let n = self.params.dim() as f64;
        let big = self.params.Lambda();
        let rr = self.radius * self.radius;
        // r^2 = R^2 - w
        let k = self.c_pow - 2.0 * a * big * (2.0 * (a + 1.0));
        let bracket = k * rr + big * w * (4.0 * a * (a + 1.0) - 2.0 * a * n);
        Ok(u / (w * w) * bracket)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualCheck {
    pub samples: usize,
    pub min_residual: f64,
    pub argmin: f64,
    /// `U(0)^s`, the natural scale of the residual.
    pub scale: f64,
    /// Minimum of the residual divided by `U(r)^s` at the same point.
    pub min_relative: f64,
}

/// Samples `-Lambda Delta U + U^s` at `r_k = k R / samples`, `k < samples`.
pub fn osserman_residual_check(barrier: &OssermanBarrier, samples: usize) -> Result<ResidualCheck> {
    if samples < 100 {
        return Err(Error::Parameter(format!("need at least 100 samples, got {samples}")));
    }
    let s = barrier.params.s();
    let mut out = ResidualCheck {
        samples,
        min_residual: f64::INFINITY,
        argmin: 0.0,
        scale: barrier.value(0.0)?.powf(s),
        min_relative: f64::INFINITY,
    };
    for k in 0..samples {
        let r = barrier.radius * k as f64 / samples as f64;
        let res = barrier.residual(r)?;
        if res < out.min_residual {
            out.min_residual = res;
            out.argmin = r;
        }
        out.min_relative = out.min_relative.min(res / barrier.value(r)?.powf(s));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// `max(u - comparator)`; negative when `u` stays strictly below.
    pub max_excess: f64,
    pub worst_index: usize,
}

/// Passes iff `u <= comparator + tol` at every sample.
pub fn comparison_verdict(u: &[f64], comparator: &[f64], tol: f64) -> Result<Verdict> {
    if u.len() != comparator.len() || u.is_empty() {
        return Err(Error::Input(format!(
            "comparison needs equal nonempty sample sets, got {} and {}",
            u.len(),
            comparator.len()
        )));
    }
    let (worst_index, max_excess) = u
        .iter()
        .zip(comparator)
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    Ok(Verdict {
        pass: max_excess <= tol,
        max_excess,
        worst_index,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalBoundReport {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub boundary_values: Vec<f64>,
    pub sup_inner: Vec<f64>,
    /// Discrete `||f||_{L^N(B_{R'})}`.
    pub f_norm: f64,
    /// `max sup_inner / (1 + f_norm)`.
    pub ratio: f64,
    /// `sup_{B_R} U(.; R')`.
    pub barrier_cap: f64,
    /// `barrier_cap + (sup f)^{1/s}`, a cap valid for every `f >= 0`.
    pub shifted_cap: f64,
    /// Relative spread of `sup_inner` between the two largest data.
    pub top_spread: f64,
    pub monotone: bool,
}

/// Solves the Dirichlet problem on `B_{R'}` with constant data `g` for each
/// given value and records `sup_{B_R} u`. Larger data start from the solution
/// for the previous one.
pub fn local_bound_experiment(
    params: &ProblemParams,
    f: &dyn Fn([f64; 2]) -> f64,
    inner_radius: f64,
    outer_radius: f64,
    boundary_values: &[f64],
    h: f64,
    cfg: &Grid2Config,
) -> Result<LocalBoundReport> {
    if !(inner_radius > 0.0 && inner_radius < outer_radius) {
        return Err(Error::Parameter(format!(
            "need 0 < R < R', got R = {inner_radius}, R' = {outer_radius}"
        )));
    }
    if boundary_values.len() < 3 {
        return Err(Error::Parameter("need at least three boundary values".into()));
    }
    let mut order: Vec<usize> = (0..boundary_values.len()).collect();
    order.sort_by(|&a, &b| boundary_values[a].total_cmp(&boundary_values[b]));
    let grid = CartesianGrid2::new(outer_radius, h, DirectionStencil::standard())?;
    let fv: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
    if let Some(i) = fv.iter().position(|v| *v < 0.0) {
        return Err(Error::Input(format!("data must be nonnegative, f({:?}) < 0", grid.point(i))));
    }
    let mut sup_inner = vec![0.0; boundary_values.len()];
    let mut warm: Option<Vec<f64>> = None;
    for &k in &order {
        let g = boundary_values[k];
        let sol = policy_iteration_solve(&grid, &fv, params, 0.0, &|_| g, cfg, warm.as_deref())?;
        sup_inner[k] = grid.sup_within(&sol.u, inner_radius);
        warm = Some(sol.u);
    }
    let f_norm = discrete_lp_norm(&grid, &fv, params.dim() as f64, outer_radius);
    let barrier = OssermanBarrier::new(outer_radius, params)?;
    let barrier_cap = barrier.value(inner_radius)?;
    let sup_f = fv.iter().copied().fold(0.0, f64::max);
    let sorted: Vec<f64> = order.iter().map(|&k| sup_inner[k]).collect();
    let top = sorted[sorted.len() - 1];
    let second = sorted[sorted.len() - 2];
    Ok(LocalBoundReport {
        inner_radius,
        outer_radius,
        boundary_values: boundary_values.to_vec(),
        ratio: sup_inner.iter().copied().fold(f64::NEG_INFINITY, f64::max) / (1.0 + f_norm),
        sup_inner,
        f_norm,
        barrier_cap,
        shifted_cap: barrier_cap + sup_f.powf(1.0 / params.s()),
        top_spread: (top - second).abs() / top.abs().max(f64::MIN_POSITIVE),
        monotone: sorted.windows(2).all(|w| w[1] >= w[0]),
    })
}
