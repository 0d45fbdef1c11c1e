//! Problem files: TOML with the domain, the state and input block sizes and
//! each matrix as a row-major string (`;` between rows, `,` between entries)
//! written with 17 significant digits.
//!
//! ```toml
//! domain = "discrete"
//! state_blocks = [2, 2]
//! input_blocks = [1, 1]
//! A = "..."
//! B = "..."
//! Q = "..."
//! R = "..."
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::PartitionedProblem;
use crate::lqr::{LqrProblem, TimeDomain};
use crate::matrix::{format_matrix, parse_matrix, Matrix};
use crate::split::Partition;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    domain: TimeDomain,
    state_blocks: Vec<usize>,
    input_blocks: Vec<usize>,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
    #[serde(rename = "Q")]
    q: String,
    #[serde(rename = "R")]
    r: String,
}

pub fn format_problem(sys: &PartitionedProblem) -> String {
    let list = |sizes: &[usize]| {
        sizes
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    };
    let p = &sys.problem;
    format!(
        "domain = \"{}\"\nstate_blocks = [{}]\ninput_blocks = [{}]\nA = \"{}\"\nB = \"{}\"\nQ = \"{}\"\nR = \"{}\"\n",
        p.domain(),
        list(sys.states.sizes()),
        list(sys.inputs.sizes()),
        format_matrix(p.a()),
        format_matrix(p.b()),
        format_matrix(p.q()),
        format_matrix(p.r()),
    )
}

fn field(name: &'static str, text: &str) -> Result<Matrix> {
    parse_matrix(text).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::parse(format!("field `{name}`, {location}"), message)
        }
        other => other,
    })
}

pub fn parse_problem(text: &str) -> Result<PartitionedProblem> {
    let raw: ProblemFile = toml::from_str(text)
        .map_err(|e| Error::parse("problem file", e.to_string().trim().to_string()))?;
    let a = field("A", &raw.a)?;
    let b = field("B", &raw.b)?;
    let q = field("Q", &raw.q)?;
    let r = field("R", &raw.r)?;
    let states = Partition::new(raw.state_blocks)?;
    let inputs = Partition::new(raw.input_blocks)?;
    if states.count() != inputs.count() {
        return Err(Error::DimensionMismatch(format!(
            "{} state blocks but {} input blocks",
            states.count(),
            inputs.count()
        )));
    }
    let problem = LqrProblem::new(a, b, q, r, raw.domain)?;
    states.check_total(problem.state_dim(), "state")?;
    inputs.check_total(problem.input_dim(), "input")?;
    Ok(PartitionedProblem {
        problem,
        inputs,
        states,
    })
}

pub fn save_problem(sys: &PartitionedProblem, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_problem(sys))?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<PartitionedProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_problem(&text).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::parse(format!("{}: {location}", path.display()), message)
        }
        other => other,
    })
}
