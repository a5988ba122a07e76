//! Macrostates of string densities, the thermodynamic Bethe equations in
//! coupled and decoupled form, the map from generating functions to hole
//! densities, and entropy / filling diagnostics.

mod bethe;
mod identity;
mod state;

pub use bethe::{
    bethe_coupled_residual, bethe_decoupled_residual, bethe_decoupled_step, CoupledResidual,
};
pub use identity::{
    hole_density_from_closed_form, hole_density_from_omega, hole_density_from_shifted, HoleConstraintSet,
    HoleDensity, DEFAULT_TAIL_THRESHOLD,
};
pub use state::{magnetization_sum_rule, yang_yang_entropy, ClosureRule, StringState, SumRule};
