//! Solvers for `-M(D^2 u) + |u|^{s-1} u = f` with `M` a Pucci extremal
//! operator: a radial divergence-form solver, a monotone wide-stencil solver
//! on planar disks, barrier functions and boundary blow-up constructions.

pub mod barriers;
pub mod blowup;
pub mod error;
pub mod grid2d;
pub mod mollifier;
pub mod operator;
pub mod params;
pub mod radial;
pub mod schedule;
pub mod tridiag;

pub use error::{Error, Result};
pub use params::ProblemParams;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
