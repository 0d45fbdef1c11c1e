//! End-to-end experiments: build the problem, run the split iteration, check
//! it against the full Riccati reference and write the artifacts.
//!
//! Artifacts in the output directory:
//! - `problem.toml`: the problem that was solved
//! - `trace.csv`: one row per subsystem update (when requested)
//! - `summary.txt`: `key = value` lines, deterministic for a fixed config

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, F0Source, ProblemSource};
use crate::harness::generator::generate_coupled_system;
use crate::harness::problem_file::{load_problem, save_problem};
use crate::harness::trace_csv::write_trace_csv;
use crate::harness::PartitionedProblem;
use crate::lqr::{optimal_feedback, riccati_residual, solve_riccati, Feedback, TimeDomain};
use crate::matrix::parse_matrix;
use crate::rate::{empirical_order, rate_matrix_cycle, OrderFit};
use crate::split::{run, SolveReport, Termination};

/// Failure classes and their process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureClass {
    /// Parse, config, generation and I/O errors.
    Config,
    Convergence,
    Verification,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Config => 2,
            FailureClass::Convergence => 3,
            FailureClass::Verification => 4,
        }
    }

    pub fn of(err: &Error) -> Self {
        match err {
            Error::NoConvergence { .. }
            | Error::MaxSweepsExceeded { .. }
            | Error::SubproblemFailure { .. }
            | Error::AllSubsystemsUncontrollable { .. }
            | Error::SubproblemNotControllable { .. }
            | Error::NotStabilizable
            | Error::NotStabilizing
            | Error::SingularMatrix(_) => FailureClass::Convergence,
            Error::NotOptimal { .. } | Error::InsufficientData { .. } => FailureClass::Verification,
            _ => FailureClass::Config,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub class: FailureClass,
    pub status: CheckStatus,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub system: PartitionedProblem,
    pub report: Option<SolveReport>,
    pub reference: Feedback,
    pub reference_error: Option<f64>,
    pub spectral_radius: Option<f64>,
    pub operator_norm: Option<f64>,
    pub order_fit: Option<OrderFit>,
    pub checks: Vec<Check>,
    pub summary: String,
}

impl ExperimentOutcome {
    /// First failing class in check order, if any.
    pub fn failure(&self) -> Option<FailureClass> {
        let failed = |class| {
            self.checks
                .iter()
                .any(|c| c.class == class && c.status == CheckStatus::Fail)
        };
        [FailureClass::Convergence, FailureClass::Verification]
            .into_iter()
            .find(|&c| failed(c))
    }

    pub fn exit_code(&self) -> i32 {
        self.failure().map_or(0, FailureClass::exit_code)
    }

    pub fn check(&self, name: &str) -> Option<CheckStatus> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.status)
    }
}

/// Lower bound on the fitted per-sweep order of a continuous run.
const MIN_CONTINUOUS_ORDER: f64 = 1.7;

/// Smallest ϱ at which a discrete fit is compared with ϱ.
const MIN_FITTED_RADIUS: f64 = 0.05;

fn load_system(config: &ExperimentConfig) -> Result<PartitionedProblem> {
    match &config.source {
        ProblemSource::File(path) => load_problem(path),
        ProblemSource::Generated(spec) => generate_coupled_system(spec),
    }
}

fn load_f0(config: &ExperimentConfig, sys: &PartitionedProblem) -> Result<Feedback> {
    let (r, m) = (sys.problem.input_dim(), sys.problem.state_dim());
    match &config.f0 {
        F0Source::Zero => Ok(Feedback::zeros(r, m)),
        F0Source::File(path) => {
            let f = parse_matrix(&fs::read_to_string(path)?)?;
            if f.shape() != (r, m) {
                return Err(Error::DimensionMismatch(format!(
                    "F0 is {}×{}, expected {r}×{m}",
                    f.nrows(),
                    f.ncols()
                )));
            }
            Ok(Feedback::new(f))
        }
    }
}

pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
) -> Result<ExperimentOutcome> {
    let out_dir = out_dir.as_ref();
    let sys = load_system(config)?;
    let f0 = load_f0(config, &sys)?;
    fs::create_dir_all(out_dir)?;
    save_problem(&sys, out_dir.join("problem.toml"))?;

    let problem = &sys.problem;
    let tol = &config.run.tolerances;
    let mut checks = Vec::new();
    let mut push = |name, class, status| {
        checks.push(Check {
            name,
            class,
            status,
        })
    };

    let p_ref = solve_riccati(problem, None, tol)?;
    let reference = optimal_feedback(&p_ref, problem)?;

    let mut options = config.run.clone();
    options.order = config.order.clone();
    let order = options.order.resolve(sys.inputs.count())?;
    let report = match run(problem, &sys.inputs, &f0, &options) {
        Ok(report) => Some(report),
        Err(Error::MaxSweepsExceeded { report }) | Err(Error::SubproblemFailure { report, .. }) => {
            Some(*report)
        }
        Err(Error::AllSubsystemsUncontrollable { .. }) => None,
        Err(e) => return Err(e),
    };
    let converged = report
        .as_ref()
        .is_some_and(|r| r.termination == Termination::Converged);
    push(
        "converged",
        FailureClass::Convergence,
        CheckStatus::from_bool(converged),
    );

    let reference_error = report
        .as_ref()
        .map(|r| (r.feedback.as_matrix() - reference.as_matrix()).norm());
    let reference_ok =
        reference_error.is_some_and(|e| e <= config.tol_reference * (1.0 + reference.norm()));
    push(
        "reference",
        FailureClass::Verification,
        CheckStatus::from_bool(reference_ok),
    );

    let records = report
        .as_ref()
        .map(|r| r.trace.records.as_slice())
        .unwrap_or(&[]);
    let worst_decrement = records
        .iter()
        .filter_map(|r| r.min_eig_decrement)
        .fold(f64::INFINITY, f64::min);
    push(
        "monotone",
        FailureClass::Verification,
        CheckStatus::from_bool(
            records
                .iter()
                .all(|r| r.min_eig_decrement.is_none_or(|d| d >= -tol.psd)),
        ),
    );
    push(
        "stabilizing",
        FailureClass::Verification,
        CheckStatus::from_bool(!records.is_empty() && records.iter().all(|r| r.stabilizing)),
    );

    let mut spectral_radius = None;
    let mut operator_norm = None;
    if problem.domain() == TimeDomain::Discrete && config.outputs.rate {
        let rate = rate_matrix_cycle(problem, &sys.inputs, &p_ref, &order, tol)?;
        spectral_radius = Some(rate.spectral_radius);
        operator_norm = Some(rate.operator_norm);
        push(
            "rate",
            FailureClass::Verification,
            CheckStatus::from_bool(rate.spectral_radius < 1.0),
        );
    }

    let mut order_fit = None;
    if config.outputs.order_fit {
        let fit = report
            .as_ref()
            .and_then(|r| empirical_order(&r.trace, &reference, config.window).ok());
        let status = match (problem.domain(), fit, spectral_radius) {
            (_, None, _) => CheckStatus::Skipped,
            (TimeDomain::Continuous, Some(fit), _) => {
                CheckStatus::from_bool(fit.order >= MIN_CONTINUOUS_ORDER)
            }
            (TimeDomain::Discrete, Some(fit), Some(rho)) if rho >= MIN_FITTED_RADIUS => {
                CheckStatus::from_bool((fit.contraction - rho).abs() / rho <= 0.25)
            }
            (TimeDomain::Discrete, Some(_), _) => CheckStatus::Skipped,
        };
        order_fit = fit;
        push("order_fit", FailureClass::Verification, status);
    }

    if config.outputs.trace {
        if let Some(report) = &report {
            let file = fs::File::create(out_dir.join("trace.csv"))?;
            write_trace_csv(&report.trace, std::io::BufWriter::new(file))?;
        }
    }

    let reference_residual = riccati_residual(&p_ref, problem);
    let mut outcome = ExperimentOutcome {
        system: sys,
        report,
        reference,
        reference_error,
        spectral_radius,
        operator_norm,
        order_fit,
        checks,
        summary: String::new(),
    };
    outcome.summary = format_summary(config, &outcome, worst_decrement, reference_residual);
    fs::write(out_dir.join("summary.txt"), &outcome.summary)?;
    Ok(outcome)
}

fn format_summary(
    config: &ExperimentConfig,
    outcome: &ExperimentOutcome,
    worst_decrement: f64,
    reference_residual: f64,
) -> String {
    let mut s = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(s, "{key} = {value}");
    };
    let num = |x: f64| format!("{x:.6e}");
    let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), num);
    let sys = &outcome.system;

    line("domain", sys.problem.domain().to_string());
    line("subsystems", sys.inputs.count().to_string());
    line("states", sys.problem.state_dim().to_string());
    line("inputs", sys.problem.input_dim().to_string());
    match &config.source {
        ProblemSource::Generated(spec) => {
            line("source", "generated".into());
            line("seed", spec.seed.to_string());
            line("coupling", num(spec.coupling));
        }
        ProblemSource::File(path) => line("source", path.display().to_string()),
    }
    line("reference_residual", num(reference_residual));
    match &outcome.report {
        Some(r) => {
            let termination = match r.termination {
                Termination::Converged => "converged",
                Termination::MaxSweeps => "max_sweeps",
                Termination::SubproblemFailure => "subproblem_failure",
            };
            line("termination", termination.into());
            line("sweeps", r.sweeps.to_string());
            line("sweeps_executed", r.sweeps_executed.to_string());
            line("updates", r.trace.records.len().to_string());
            line("skipped_updates", r.trace.skipped.len().to_string());
            line(
                "final_residual",
                opt(r.value.as_ref().map(|p| riccati_residual(p, &sys.problem))),
            );
        }
        None => line("termination", "no_solvable_subsystem".into()),
    }
    line("reference_error", opt(outcome.reference_error));
    line(
        "min_eig_decrement",
        opt(worst_decrement.is_finite().then_some(worst_decrement)),
    );
    line("spectral_radius", opt(outcome.spectral_radius));
    line("operator_norm", opt(outcome.operator_norm));
    match &outcome.order_fit {
        Some(fit) => {
            line("fitted_order", num(fit.order));
            line("fitted_rate", num(fit.rate));
            line("contraction", num(fit.contraction));
            line("fit_pairs", fit.pairs.to_string());
        }
        None => line("fitted_order", "none".into()),
    }
    for c in &outcome.checks {
        line(&format!("check.{}", c.name), c.status.label().into());
    }
    line("exit_code", outcome.exit_code().to_string());
    s
}
