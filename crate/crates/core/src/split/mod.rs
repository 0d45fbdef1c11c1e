//! Split optimal policy iteration: subproblem construction, single
//! subsystem updates, cyclic sweeps and the full run with trace recording.

mod iteration;
mod partition;
mod subproblem;

pub use iteration::{
    initial_feedback, run, sweep, InitialPolicy, IterationTrace, OrderPolicy, RunOptions,
    SolveReport, StepOutcome, SweepOrder, Termination, UpdateRecord,
};
pub use partition::{InputPartition, Partition, StatePartition};
pub use subproblem::{build_subproblem, update_subsystem, SubproblemMatrices};
