use super::grid::RadialGrid;
use super::rhs::{Admissibility, RadialRhs};
use crate::params::ProblemParams;

/// Angular samples used on each circle.
pub const MAJORANT_ANGLES: usize = 256;

/// `g(r) = max_{|x| = r} |f(x)|` sampled on `MAJORANT_ANGLES` equally spaced
/// angles (starting at angle 0), together with its weighted-L1 gate status.
pub fn radial_majorant(
    f: &dyn Fn([f64; 2]) -> f64,
    grid: &RadialGrid,
    params: &ProblemParams,
) -> (RadialRhs, Admissibility) {
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            (0..MAJORANT_ANGLES)
                .map(|k| {
                    let phi = std::f64::consts::TAU * k as f64 / MAJORANT_ANGLES as f64;
                    f([r * phi.cos(), r * phi.sin()]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let rhs = RadialRhs::Sampled(values);
    let gate = rhs.admissibility(grid, params);
    (rhs, gate)
}
