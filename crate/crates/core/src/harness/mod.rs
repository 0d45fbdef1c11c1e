//! Problem generation, problem files, experiment configs and the
//! end-to-end experiment runner.

mod config;
mod experiment;
mod generator;
mod problem_file;
mod trace_csv;

pub use config::{one_based, ExperimentConfig, F0Source, Outputs, ProblemSource};
pub use experiment::{run_experiment, Check, CheckStatus, ExperimentOutcome, FailureClass};
pub use generator::{generate_coupled_system, random_identity_case, GeneratorSpec};
pub use problem_file::{format_problem, load_problem, parse_problem, save_problem};
pub use trace_csv::{trace_csv_string, write_trace_csv, TRACE_COLUMNS};

use crate::lqr::LqrProblem;
use crate::split::{InputPartition, StatePartition};

/// A problem together with its subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedProblem {
    pub problem: LqrProblem,
    pub inputs: InputPartition,
    pub states: StatePartition,
}
