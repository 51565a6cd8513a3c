//! Monotone wide-stencil scheme for the extremal equation on planar disks.

pub mod bellman;
pub mod grid;
pub mod ladder;
pub mod solve;
pub mod stencil;

pub use bellman::{controlled_value, discrete_pucci, discrete_pucci_minus, discrete_pucci_plus, Extremal, Policy, PolicyEntry};
pub use ladder::{discrete_lp_norm, kato_subsolution_check, transfer_by_lattice, whole_space_ladder, Grid2Ladder, Grid2Rung, KatoReport};
pub use grid::{Arm, ArmEnd, CartesianGrid2, MIN_ACTIVE_NODES};
pub use solve::{bellman_residual, policy_iteration_solve, FrozenOperator, Grid2Config, Grid2Report, Grid2Solution};
pub use stencil::{directional_second_difference, uneven_second_difference, DirectionStencil};
pub use crate::schedule::LadderSchedule;
