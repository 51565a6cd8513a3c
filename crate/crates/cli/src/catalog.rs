//! Named right-hand sides with their admissibility classes.

use std::sync::Arc;

use pucci_core::grid2d::Extremal;
use pucci_core::operator::{power_nonlinearity, SymmetricMatrix2};
use pucci_core::radial::majorant::MAJORANT_ANGLES;
use pucci_core::radial::{radial_majorant, RadialGrid, RadialProfile, RadialRhs};
use pucci_core::{Error, ProblemParams, Result};
use serde::{Deserialize, Serialize};

/// Deepest nesting of `radial-majorant-of` accepted.
pub const MAX_NESTING: usize = 4;

pub type PlanarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Closed-form solutions used to manufacture data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manufactured {
    /// `1 - |x|^2`.
    OneMinusR2,
    /// `x1^2 - x2^2`.
    Saddle,
    /// `cosh x1 + cos x2`.
    CoshCos,
}

impl Manufactured {
    pub fn value(self, x: [f64; 2]) -> f64 {
        match self {
            Manufactured::OneMinusR2 => 1.0 - x[0] * x[0] - x[1] * x[1],
            Manufactured::Saddle => x[0] * x[0] - x[1] * x[1],
            Manufactured::CoshCos => x[0].cosh() + x[1].cos(),
        }
    }

    pub fn hessian(self, x: [f64; 2]) -> SymmetricMatrix2 {
        match self {
            Manufactured::OneMinusR2 => SymmetricMatrix2::diag(-2.0, -2.0),
            Manufactured::Saddle => SymmetricMatrix2::diag(2.0, -2.0),
            Manufactured::CoshCos => SymmetricMatrix2::diag(x[0].cosh(), -x[1].cos()),
        }
    }

    pub fn is_radial(self) -> bool {
        self == Manufactured::OneMinusR2
    }

    /// `-M(D^2 u) + |u|^{s-1} u` in the plane.
    pub fn planar_rhs(self, x: [f64; 2], params: &ProblemParams, extremal: Extremal) -> f64 {
        let m = self.hessian(x);
        let op = match extremal {
            Extremal::Plus => m.pucci_plus(params),
            Extremal::Minus => m.pucci_minus(params),
        };
        -op + power_nonlinearity(self.value(x), params.s())
    }
}

/// Admissibility classes of a right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gates {
    /// `f` in `L^N_loc`, required by the non-radial existence theory.
    pub ln_loc: bool,
    /// `int_0^R r^{N+ - 1} |f| dr < inf`, required by the radial theory.
    pub weighted_l1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsCatalogEntry {
    Constant {
        value: f64,
    },
    /// `amplitude * e * exp(-1/(1 - |x - center|^2/radius^2))`, peak `amplitude`.
    CompactBump {
        amplitude: f64,
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    /// `c |x|^{-alpha}`.
    PowerSingularity {
        c: f64,
        alpha: f64,
    },
    ManufacturedFromU {
        solution: Manufactured,
    },
    /// `c |x - center|^{-alpha}`.
    OffCenterSingularity {
        c: f64,
        alpha: f64,
        center: [f64; 2],
    },
    /// `g(|x|) = max_{|y| = |x|} |f(y)|`.
    RadialMajorantOf {
        of: Box<RhsCatalogEntry>,
    },
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config {
            key: key.into(),
            message: format!("must be finite, got {v}"),
        })
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl RhsCatalogEntry {
    /// Checks the parameters; keys are reported relative to `prefix`.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        self.validate_depth(prefix, 0)
    }

    fn validate_depth(&self, prefix: &str, depth: usize) -> Result<()> {
        let key = |k: &str| format!("{prefix}.{k}");
        match self {
            RhsCatalogEntry::Constant { value } => finite(&key("value"), *value),
            RhsCatalogEntry::CompactBump {
                amplitude,
                center,
                radius,
            } => {
                finite(&key("amplitude"), *amplitude)?;
                finite(&key("center"), center[0])?;
                finite(&key("center"), center[1])?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(bad(&key("radius"), format!("must be positive, got {radius}")));
                }
                Ok(())
            }
            RhsCatalogEntry::PowerSingularity { c, alpha } => {
                finite(&key("c"), *c)?;
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(bad(&key("alpha"), format!("must be nonnegative, got {alpha}")));
                }
                Ok(())
            }
            RhsCatalogEntry::ManufacturedFromU { .. } => Ok(()),
            RhsCatalogEntry::OffCenterSingularity { c, alpha, center } => {
                finite(&key("c"), *c)?;
                finite(&key("center"), center[0])?;
                finite(&key("center"), center[1])?;
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(bad(&key("alpha"), format!("must be nonnegative, got {alpha}")));
                }
                Ok(())
            }
            RhsCatalogEntry::RadialMajorantOf { of } => {
                if depth + 1 >= MAX_NESTING {
                    return Err(bad(
                        &key("of"),
                        format!("radial-majorant-of nested deeper than {MAX_NESTING}"),
                    ));
                }
                of.validate_depth(&key("of"), depth + 1)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RhsCatalogEntry::Constant { .. } => "constant",
            RhsCatalogEntry::CompactBump { .. } => "compact-bump",
            RhsCatalogEntry::PowerSingularity { .. } => "power-singularity",
            RhsCatalogEntry::ManufacturedFromU { .. } => "manufactured-from-u",
            RhsCatalogEntry::OffCenterSingularity { .. } => "off-center-singularity",
            RhsCatalogEntry::RadialMajorantOf { .. } => "radial-majorant-of",
        }
    }

    /// Exponent and location of a point singularity, if any.
    pub fn singular_point(&self) -> Option<(f64, [f64; 2])> {
        match self {
            RhsCatalogEntry::PowerSingularity { alpha, .. } if *alpha > 0.0 => Some((*alpha, [0.0, 0.0])),
            RhsCatalogEntry::OffCenterSingularity { alpha, center, .. } if *alpha > 0.0 => Some((*alpha, *center)),
            _ => None,
        }
    }

    /// Exponent and radius of the circle carrying the singularity (radius
    /// zero for a singularity at the origin).
    pub fn singular_circle(&self) -> Option<(f64, f64)> {
        match self {
            RhsCatalogEntry::RadialMajorantOf { of } => of.singular_circle(),
            other => other.singular_point().map(|(a, c)| (a, c[0].hypot(c[1]))),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            RhsCatalogEntry::Constant { value } => *value >= 0.0,
            RhsCatalogEntry::CompactBump { amplitude, .. } => *amplitude >= 0.0,
            RhsCatalogEntry::PowerSingularity { c, .. } | RhsCatalogEntry::OffCenterSingularity { c, .. } => {
                *c >= 0.0
            }
            RhsCatalogEntry::ManufacturedFromU { .. } => false,
            RhsCatalogEntry::RadialMajorantOf { .. } => true,
        }
    }

    /// The admissibility classes, decided from the singularity exponents.
    ///
    /// A point singularity `|x - x0|^{-alpha}` lies in `L^N_loc` iff
    /// `alpha < 1`. The radial gate allows `alpha < N+` at the origin, but a
    /// singular circle of positive radius only `alpha < 1`; its radial
    /// profile `|r - r0|^{-alpha}` is in `L^N_loc` of the plane iff
    /// `alpha N < 1`.
    pub fn gates(&self, params: &ProblemParams) -> Gates {
        let n = params.dim() as f64;
        match self {
            RhsCatalogEntry::RadialMajorantOf { of } => match of.singular_circle() {
                None => Gates {
                    ln_loc: true,
                    weighted_l1: true,
                },
                Some((alpha, r0)) if r0 == 0.0 => Gates {
                    ln_loc: alpha < 1.0,
                    weighted_l1: alpha < params.n_plus(),
                },
                Some((alpha, _)) => Gates {
                    ln_loc: alpha * n < 1.0,
                    weighted_l1: alpha < 1.0,
                },
            },
            _ => match self.singular_point() {
                None => Gates {
                    ln_loc: true,
                    weighted_l1: true,
                },
                Some((alpha, c)) => Gates {
                    ln_loc: alpha < 1.0,
                    weighted_l1: if c == [0.0, 0.0] { alpha < params.n_plus() } else { alpha < 1.0 },
                },
            },
        }
    }

    /// Planar evaluation. Manufactured data depends on the operator.
    pub fn planar(&self, params: &ProblemParams, extremal: Extremal) -> PlanarFn {
        match self.clone() {
            RhsCatalogEntry::Constant { value } => Arc::new(move |_| value),
            RhsCatalogEntry::CompactBump {
                amplitude,
                center,
                radius,
            } => Arc::new(move |x| {
                let t2 = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)) / (radius * radius);
                if t2 >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - t2)).exp()
                }
            }),
            RhsCatalogEntry::PowerSingularity { c, alpha } => Arc::new(move |x| c * x[0].hypot(x[1]).powf(-alpha)),
            RhsCatalogEntry::ManufacturedFromU { solution } => {
                let p = *params;
                Arc::new(move |x| solution.planar_rhs(x, &p, extremal))
            }
            RhsCatalogEntry::OffCenterSingularity { c, alpha, center } => {
                Arc::new(move |x| c * (x[0] - center[0]).hypot(x[1] - center[1]).powf(-alpha))
            }
            RhsCatalogEntry::RadialMajorantOf { of } => {
                let inner = of.planar(params, extremal);
                if of.is_radial() {
                    // constant on circles already
                    return Arc::new(move |x| inner([x[0].hypot(x[1]), 0.0]).abs());
                }
                Arc::new(move |x| majorant_at(&*inner, x[0].hypot(x[1])))
            }
        }
    }

    /// Radial profile `f(r)` for entries that are radial (or made radial by
    /// taking a majorant); the profile is the value along the positive
    /// `x1`-axis.
    pub fn radial_profile(&self, params: &ProblemParams) -> Result<RadialProfile> {
        if !self.is_radial() {
            return Err(Error::Input(format!(
                "{} entry is not radial; wrap it in radial-majorant-of",
                self.kind()
            )));
        }
        let profile = match self {
            RhsCatalogEntry::Constant { value } => RadialProfile::constant(*value),
            RhsCatalogEntry::PowerSingularity { c, alpha } => RadialProfile::power(*c, *alpha),
            RhsCatalogEntry::ManufacturedFromU { .. } => {
                let (lambda, n, s) = (params.lambda(), params.dim() as f64, params.s());
                RadialProfile::new(move |r| 2.0 * lambda * n + power_nonlinearity(1.0 - r * r, s))
            }
            _ => {
                let f = self.planar(params, Extremal::Plus);
                let closure = move |r: f64| f([r, 0.0]);
                match self.singular_circle() {
                    Some((alpha, r0)) if r0 == 0.0 => RadialProfile::singular(closure, alpha),
                    _ => RadialProfile::new(closure),
                }
            }
        };
        Ok(profile)
    }

    fn is_radial(&self) -> bool {
        match self {
            RhsCatalogEntry::Constant { .. }
            | RhsCatalogEntry::PowerSingularity { .. }
            | RhsCatalogEntry::RadialMajorantOf { .. } => true,
            RhsCatalogEntry::CompactBump { center, .. } => *center == [0.0, 0.0],
            RhsCatalogEntry::ManufacturedFromU { solution } => solution.is_radial(),
            RhsCatalogEntry::OffCenterSingularity { center, .. } => *center == [0.0, 0.0],
        }
    }

    /// Right-hand side for the radial solver, smoothed at `epsilon` when
    /// positive. Unsmoothed majorants are sampled on the grid's circles.
    pub fn radial_rhs(&self, grid: &RadialGrid, params: &ProblemParams, epsilon: f64) -> Result<RadialRhs> {
        if epsilon > 0.0 {
            return Ok(RadialRhs::Mollified {
                profile: self.radial_profile(params)?,
                epsilon,
            });
        }
        match self {
            RhsCatalogEntry::PowerSingularity { c, alpha } => Ok(RadialRhs::PowerSingularity { c: *c, alpha: *alpha }),
            RhsCatalogEntry::RadialMajorantOf { of } => {
                let inner = of.planar(params, Extremal::Plus);
                Ok(radial_majorant(&*inner, grid, params).0)
            }
            _ => {
                let profile = self.radial_profile(params)?;
                Ok(RadialRhs::Sampled(grid.nodes().iter().map(|&r| profile.eval(r)).collect()))
            }
        }
    }

    /// Closed-form solution, for manufactured entries.
    pub fn exact_solution(&self) -> Option<Manufactured> {
        match self {
            RhsCatalogEntry::ManufacturedFromU { solution } => Some(*solution),
            _ => None,
        }
    }
}

fn majorant_at(f: &(dyn Fn([f64; 2]) -> f64 + Send + Sync), r: f64) -> f64 {
    (0..MAJORANT_ANGLES)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / MAJORANT_ANGLES as f64;
            f([r * phi.cos(), r * phi.sin()]).abs()
        })
        .fold(0.0, f64::max)
}
