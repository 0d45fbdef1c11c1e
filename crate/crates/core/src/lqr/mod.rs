//! Dense LQR primitives: Riccati solvers, optimal-feedback extraction,
//! policy evaluation and the stability/controllability predicates.

mod lyapunov;
mod policy;
mod problem;
mod riccati;

pub use lyapunov::{solve_continuous_lyapunov, solve_stein};
pub use policy::{
    evaluate_policy, is_controllable, is_stabilizing, is_stable, optimal_feedback, riccati_residual,
};
pub use problem::{Feedback, LqrProblem, TimeDomain, Tolerances, ValueMatrix};
pub use riccati::{solve_care, solve_dare, solve_riccati, stabilizing_gain};
