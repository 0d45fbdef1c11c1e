//! Local convergence analysis of the split iteration.

mod identities;
mod jacobian;
mod order;

pub use identities::{verify_tech_identities, IdentityResiduals, TechIdentityScratch};
pub use jacobian::{
    block_update_map, default_fd_step, distributed_block, finite_difference_jacobian, materialize,
    rate_factor, rate_matrix_cycle, rate_matrix_subsystem, RateReport,
};
pub use order::{empirical_order, fit_order, sweep_errors, OrderFit, OrderWindow};
