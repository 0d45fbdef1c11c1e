//! Split optimal policy iteration for coupled LQR problems.
//!
//! The control inputs of an LQR problem are partitioned into subsystems.
//! Each update re-optimizes one subsystem's block row of the feedback
//! matrix exactly, by solving a reduced LQR problem in which the other
//! subsystems' feedback is folded into the dynamics and the state cost.
//! Cycling over the subsystems converges to the optimal feedback of the
//! full problem, quadratically in continuous time and linearly in
//! discrete time.
//!
//! - [`lqr`]: Riccati solvers, policy evaluation and predicates.
//! - [`split`]: subproblem construction, subsystem updates, sweeps and the
//!   full iteration with trace recording.
//! - [`rate`]: iteration Jacobians, finite-difference checks, the block
//!   identities behind the discrete fixed-point argument and empirical
//!   convergence-order fits.
//! - [`harness`]: seeded problem generation, problem/config files, trace
//!   CSVs and end-to-end experiments.

pub mod error;
pub mod harness;
pub mod lqr;
pub mod matrix;
pub mod rate;
pub mod split;

pub use error::{Error, Result};
pub use lqr::{Feedback, LqrProblem, TimeDomain, Tolerances, ValueMatrix};
pub use matrix::Matrix;
pub use split::{InputPartition, IterationTrace, Partition, SolveReport, StatePartition};
