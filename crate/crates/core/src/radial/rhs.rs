use std::fmt;
use std::sync::Arc;

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::params::ProblemParams;

/// A radial profile `f(r)` that can be evaluated at any `r > 0`.
///
/// `singular_exponent = Some(alpha)` marks a blow-up like `r^{-alpha}` at the
/// origin; smoothing first truncates such profiles at `r = epsilon`, since a
/// plain convolution of `r^{-alpha}` is undefined for `alpha >= 1`.
#[derive(Clone)]
pub struct RadialProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    singular_exponent: Option<f64>,
}

impl RadialProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            singular_exponent: None,
        }
    }

    pub fn singular(f: impl Fn(f64) -> f64 + Send + Sync + 'static, alpha: f64) -> Self {
        Self {
            f: Arc::new(f),
            singular_exponent: Some(alpha),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    /// `c r^{-alpha}`.
    pub fn power(c: f64, alpha: f64) -> Self {
        Self::singular(move |r: f64| c * r.powf(-alpha), alpha)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn singular_exponent(&self) -> Option<f64> {
        self.singular_exponent
    }

    /// `epsilon`-smoothed value at `r`.
    pub fn smoothed(&self, mollifier: &Mollifier, r: f64) -> f64 {
        let eps = mollifier.epsilon();
        match self.singular_exponent {
            Some(_) if eps > 0.0 => mollifier.radial(&|t: f64| self.eval(t.max(eps)), r),
            _ => mollifier.radial(&|t: f64| self.eval(t), r),
        }
    }
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("singular_exponent", &self.singular_exponent)
            .finish_non_exhaustive()
    }
}

/// Right-hand side of the radial problem.
#[derive(Debug, Clone)]
pub enum RadialRhs {
    /// One value per grid node.
    Sampled(Vec<f64>),
    /// `c r^{-alpha}`.
    PowerSingularity { c: f64, alpha: f64 },
    /// Profile convolved with the bump of width `epsilon`.
    Mollified { profile: RadialProfile, epsilon: f64 },
}

/// Result of the weighted-L1 gate `int_0^R r^{N+ - 1} |f| dr < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub weighted_l1: f64,
    pub admissible: bool,
}

impl RadialRhs {
    pub fn values(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let vals = match self {
            RadialRhs::Sampled(v) => {
                if v.len() != grid.len() {
                    return Err(Error::Input(format!(
                        "sampled right-hand side has {} values for {} nodes",
                        v.len(),
                        grid.len()
                    )));
                }
                v.clone()
            }
            RadialRhs::PowerSingularity { c, alpha } => {
                grid.nodes().iter().map(|r| c * r.powf(-alpha)).collect()
            }
            RadialRhs::Mollified { profile, epsilon } => {
                let m = Mollifier::new(*epsilon)?;
                grid.nodes().iter().map(|&r| profile.smoothed(&m, r)).collect()
            }
        };
        if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "right-hand side is not finite at r = {}",
                grid.nodes()[i]
            )));
        }
        Ok(vals)
    }

    /// Evaluates the weighted-L1 gate.
    ///
    /// Closed form for the power singularity; otherwise trapezoid over the
    /// nodes plus `|f(r_1)| r_1^{N+}/N+` for `(0, r_1)`. Sampled data whose
    /// log-slope between the two innermost nodes reaches `N+` is treated as
    /// non-integrable.
    pub fn admissibility(&self, grid: &RadialGrid, params: &ProblemParams) -> Admissibility {
        let np = params.n_plus();
        let radius = grid.radius();
        match self {
            RadialRhs::PowerSingularity { c, alpha } => {
                if *alpha < np {
                    let w = c.abs() * radius.powf(np - alpha) / (np - alpha);
                    Admissibility {
                        weighted_l1: w,
                        admissible: w.is_finite(),
                    }
                } else {
                    Admissibility {
                        weighted_l1: f64::INFINITY,
                        admissible: false,
                    }
                }
            }
            _ => {
                let vals = match self.values(grid) {
                    Ok(v) => v,
                    Err(_) => {
                        return Admissibility {
                            weighted_l1: f64::INFINITY,
                            admissible: false,
                        }
                    }
                };
                let w = weighted_l1(grid, &vals, np);
                let r = grid.nodes();
                let steep = matches!(self, RadialRhs::Sampled(_))
                    && vals[0].abs() > vals[1].abs()
                    && vals[1] != 0.0
                    && (vals[0].abs() / vals[1].abs()).ln() / (r[1] / r[0]).ln() >= np;
                Admissibility {
                    weighted_l1: if steep { f64::INFINITY } else { w },
                    admissible: w.is_finite() && !steep,
                }
            }
        }
    }
}

/// `int_0^R r^{N+ - 1} |f| dr` by the trapezoid rule with a constant
/// extension on `(0, r_1)`.
pub fn weighted_l1(grid: &RadialGrid, values: &[f64], n_plus: f64) -> f64 {
    let r = grid.nodes();
    let integrand: Vec<f64> = r
        .iter()
        .zip(values)
        .map(|(&r, v)| r.powf(n_plus - 1.0) * v.abs())
        .collect();
    grid.trapezoid(&integrand) + values[0].abs() * r[0].powf(n_plus) / n_plus
}
