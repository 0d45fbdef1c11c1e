use crate::error::{Error, Result};
use crate::lqr::{is_stabilizing, riccati_residual, Feedback, LqrProblem, Tolerances, ValueMatrix};
use crate::matrix::min_symmetric_eigenvalue;
use crate::split::partition::InputPartition;
use crate::split::subproblem::{check_inputs, update_subsystem};

/// A permutation of the subsystem indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepOrder(Vec<usize>);

impl SweepOrder {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::InvalidOrder(format!(
                "expected {n} entries, got {}",
                order.len()
            )));
        }
        for &i in &order {
            if i >= n || seen[i] {
                return Err(Error::InvalidOrder(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(order))
    }

    /// `start, start+1, …, n−1, 0, …, start−1`.
    pub fn ascending(n: usize, start: usize) -> Result<Self> {
        if start >= n {
            return Err(Error::IndexOutOfRange {
                index: start,
                count: n,
            });
        }
        Ok(Self((0..n).map(|k| (start + k) % n).collect()))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrderPolicy {
    Ascending { start: usize },
    Explicit(Vec<usize>),
}

impl OrderPolicy {
    pub fn resolve(&self, n: usize) -> Result<SweepOrder> {
        match self {
            OrderPolicy::Ascending { start } => SweepOrder::ascending(n, *start),
            OrderPolicy::Explicit(order) => SweepOrder::new(order.clone(), n),
        }
    }
}

impl Default for OrderPolicy {
    fn default() -> Self {
        OrderPolicy::Ascending { start: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialPolicy {
    Zero,
    Given(Feedback),
}

pub fn initial_feedback(
    problem: &LqrProblem,
    partition: &InputPartition,
    policy: &InitialPolicy,
) -> Result<Feedback> {
    let f = match policy {
        InitialPolicy::Zero => Feedback::zeros(problem.input_dim(), problem.state_dim()),
        InitialPolicy::Given(f) => f.clone(),
    };
    check_inputs(problem, partition, &f)?;
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Updated {
        subsystem: usize,
        feedback: Feedback,
        value: ValueMatrix,
    },
    Skipped {
        subsystem: usize,
    },
}

/// Applies one update per subsystem in `order`, threading the feedback
/// through. Subsystems whose subproblem is not solvable are skipped and
/// leave the feedback unchanged.
pub fn sweep(
    problem: &LqrProblem,
    partition: &InputPartition,
    f: &Feedback,
    order: &SweepOrder,
    tol: &Tolerances,
) -> Result<(Feedback, Vec<StepOutcome>)> {
    check_order(partition, order)?;
    let mut current = f.clone();
    let mut outcomes = Vec::with_capacity(order.0.len());
    for &i in order.as_slice() {
        match update_subsystem(problem, partition, &current, i, tol) {
            Ok((feedback, value)) => {
                current = feedback.clone();
                outcomes.push(StepOutcome::Updated {
                    subsystem: i,
                    feedback,
                    value,
                });
            }
            Err(Error::SubproblemNotControllable { .. }) => {
                outcomes.push(StepOutcome::Skipped { subsystem: i })
            }
            Err(e) => return Err(e),
        }
    }
    if outcomes
        .iter()
        .all(|o| matches!(o, StepOutcome::Skipped { .. }))
    {
        return Err(Error::AllSubsystemsUncontrollable { sweep: 1 });
    }
    Ok((current, outcomes))
}

fn check_order(partition: &InputPartition, order: &SweepOrder) -> Result<()> {
    if order.0.len() != partition.count() {
        return Err(Error::InvalidOrder(format!(
            "order has {} entries for {} subsystems",
            order.0.len(),
            partition.count()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub max_sweeps: usize,
    /// Relative Frobenius change of `F` over one sweep.
    pub tol_change: f64,
    /// Relative full-problem Riccati residual of the latest value matrix.
    pub tol_residual: f64,
    pub order: OrderPolicy,
    pub tolerances: Tolerances,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 500,
            tol_change: 1e-10,
            tol_residual: 1e-8,
            order: OrderPolicy::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// One solved subsystem update.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateRecord {
    /// 1-based sweep number.
    pub sweep: usize,
    pub subsystem: usize,
    pub feedback: Feedback,
    /// Value matrix of the solved subproblem, i.e. of `feedback` on the full problem.
    pub value: ValueMatrix,
    pub full_residual: f64,
    /// `‖F − F_prev‖_F` for this single update.
    pub change: f64,
    /// `λ_min(P_prev − P)` against the previous record; `None` for the first.
    pub min_eig_decrement: Option<f64>,
    pub stabilizing: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<UpdateRecord>,
    /// `(sweep, subsystem)` pairs that were skipped.
    pub skipped: Vec<(usize, usize)>,
    /// Feedback after each completed sweep; entry 0 is the initial feedback.
    pub sweep_ends: Vec<Feedback>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSweeps,
    SubproblemFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub feedback: Feedback,
    pub value: Option<ValueMatrix>,
    /// Sweeps needed to reach the fixed point. The last executed sweep only
    /// confirms it, so this is `sweeps_executed − 1` on convergence.
    pub sweeps: usize,
    pub sweeps_executed: usize,
    pub termination: Termination,
    pub trace: IterationTrace,
}

/// Runs split sweeps from `f0` until the feedback stops changing and the
/// latest value matrix solves the full Riccati equation.
pub fn run(
    problem: &LqrProblem,
    partition: &InputPartition,
    f0: &Feedback,
    options: &RunOptions,
) -> Result<SolveReport> {
    check_inputs(problem, partition, f0)?;
    let order = options.order.resolve(partition.count())?;
    let tol = &options.tolerances;

    let mut report = SolveReport {
        feedback: f0.clone(),
        value: None,
        sweeps: 0,
        sweeps_executed: 0,
        termination: Termination::MaxSweeps,
        trace: IterationTrace {
            sweep_ends: vec![f0.clone()],
            ..Default::default()
        },
    };

    for sweep_no in 1..=options.max_sweeps {
        let start = report.feedback.clone();
        let mut updated_any = false;
        for &i in order.as_slice() {
            match update_subsystem(problem, partition, &report.feedback, i, tol) {
                Ok((feedback, value)) => {
                    let change = (feedback.as_matrix() - report.feedback.as_matrix()).norm();
                    let min_eig_decrement = report.value.as_ref().map(|prev| {
                        min_symmetric_eigenvalue(&(prev.as_matrix() - value.as_matrix()))
                    });
                    report.trace.records.push(UpdateRecord {
                        sweep: sweep_no,
                        subsystem: i,
                        full_residual: riccati_residual(&value, problem),
                        stabilizing: is_stabilizing(problem, &feedback, tol),
                        feedback: feedback.clone(),
                        value: value.clone(),
                        change,
                        min_eig_decrement,
                    });
                    report.feedback = feedback;
                    report.value = Some(value);
                    updated_any = true;
                }
                Err(Error::SubproblemNotControllable { .. }) => {
                    report.trace.skipped.push((sweep_no, i));
                }
                Err(source) => {
                    report.termination = Termination::SubproblemFailure;
                    report.sweeps_executed = sweep_no;
                    return Err(Error::SubproblemFailure {
                        sweep: sweep_no,
                        subsystem: i,
                        source: Box::new(source),
                        report: Box::new(report),
                    });
                }
            }
        }
        if !updated_any {
            return Err(Error::AllSubsystemsUncontrollable { sweep: sweep_no });
        }
        report.sweeps_executed = sweep_no;
        report.trace.sweep_ends.push(report.feedback.clone());

        let change = (report.feedback.as_matrix() - start.as_matrix()).norm();
        let p = report.value.as_ref().expect("an update happened");
        let residual = riccati_residual(p, problem);
        if change <= options.tol_change * (1.0 + report.feedback.norm())
            && residual <= options.tol_residual * (1.0 + p.norm())
        {
            report.termination = Termination::Converged;
            report.sweeps = sweep_no - 1;
            return Ok(report);
        }
    }
    report.sweeps = report.sweeps_executed;
    Err(Error::MaxSweepsExceeded {
        report: Box::new(report),
    })
}
