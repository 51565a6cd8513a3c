//! Radial divergence-form solver on `(0, R]`.

pub mod grid;
pub mod ladder;
pub mod majorant;
pub mod rhs;
pub mod solve;
pub mod weak;
pub mod weights;

pub use grid::{Grading, RadialGrid};
pub use ladder::{approximation_ladder, RadialLadder, RadialRung};
pub use majorant::radial_majorant;
pub use rhs::{weighted_l1, Admissibility, RadialProfile, RadialRhs};
pub use solve::{
    assemble_residual, solve_radial_bvp, solve_radial_bvp_from, RadialSolution, RadialSolveReport,
    RadialSolverConfig,
};
pub use weak::{weak_residual_check, WeakResidualReport};
pub use weights::{compute_weights, compute_weights_regularized, RadialState, RadialWeights};
