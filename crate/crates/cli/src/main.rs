use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitlqr::harness::{
    generate_coupled_system, load_problem, one_based, random_identity_case, run_experiment,
    save_problem, write_trace_csv, ExperimentConfig, FailureClass, GeneratorSpec,
    PartitionedProblem,
};
use splitlqr::lqr::{optimal_feedback, riccati_residual, solve_riccati};
use splitlqr::matrix::{format_matrix, parse_matrix};
use splitlqr::rate::{rate_matrix_cycle, verify_tech_identities};
use splitlqr::split::{run, OrderPolicy, RunOptions, SolveReport, Termination};
use splitlqr::{Error, Feedback, Result, TimeDomain, Tolerances};

/// Split optimal policy iteration for coupled LQR problems.
#[derive(Parser)]
#[command(name = "splitlqr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded, weakly coupled problem file.
    Generate(GenerateArgs),
    /// Solve the full Riccati equation of a problem.
    Solve(SolveArgs),
    /// Run the split iteration on a problem.
    Iterate(IterateArgs),
    /// Local convergence rate of the discrete split iteration.
    Rate(RateArgs),
    /// Run an end-to-end experiment from a config file.
    Experiment(ExperimentArgs),
    /// Check the block identities on random draws.
    CheckIdentities(IdentityArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// State block sizes, one per subsystem.
    #[arg(long, value_delimiter = ',', required = true)]
    state_blocks: Vec<usize>,
    /// Input block sizes, one per subsystem.
    #[arg(long, value_delimiter = ',', required = true)]
    input_blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    coupling: f64,
    #[arg(long)]
    domain: TimeDomain,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    stability_margin: f64,
    #[arg(long, default_value_t = 1.0)]
    input_scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Solve in this domain instead of the one in the file.
    #[arg(long)]
    domain: Option<TimeDomain>,
}

#[derive(Args)]
struct IterateArgs {
    #[arg(long)]
    problem: PathBuf,
    /// 1-based sweep order, e.g. `2,1,3`.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// `zero` or a file holding a row-major matrix.
    #[arg(long, default_value = "zero")]
    f0: String,
    /// Relative change of F over one sweep at which to stop.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_residual: f64,
    /// Relative distance to the full-problem reference that counts as verified.
    #[arg(long, default_value_t = 1e-7)]
    tol_reference: f64,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    /// Write one CSV row per subsystem update.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    problem: PathBuf,
    /// 1-based sweep order, e.g. `2,1,3`.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Largest accepted residual relative to `1 + ‖R + S‖_F`.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key} = {value}");
}

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

fn with_path<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn load(path: &Path) -> Result<PartitionedProblem> {
    with_path(path, load_problem(path))
}

fn order_policy(order: Option<Vec<usize>>) -> Result<OrderPolicy> {
    Ok(match order {
        Some(order) => OrderPolicy::Explicit(one_based(&order, "--order")?),
        None => OrderPolicy::default(),
    })
}

fn generate(args: GenerateArgs) -> Result<u8> {
    let mut spec = GeneratorSpec::new(
        args.state_blocks,
        args.input_blocks,
        args.coupling,
        args.domain,
        args.seed,
    );
    spec.stability_margin = args.stability_margin;
    spec.input_scale = args.input_scale;
    let sys = generate_coupled_system(&spec)?;
    with_path(&args.out, save_problem(&sys, &args.out))?;
    kv("written", args.out.display());
    Ok(0)
}

fn solve(args: SolveArgs) -> Result<u8> {
    let sys = load(&args.problem)?;
    let problem = match args.domain {
        Some(domain) => sys.problem.with_domain(domain),
        None => sys.problem,
    };
    let p = solve_riccati(&problem, None, &Tolerances::default())?;
    let f = optimal_feedback(&p, &problem)?;
    kv("domain", problem.domain());
    kv("residual", num(riccati_residual(&p, &problem)));
    kv("P", format!("\"{}\"", format_matrix(p.as_matrix())));
    kv("F", format!("\"{}\"", format_matrix(f.as_matrix())));
    Ok(0)
}

fn print_report(report: &SolveReport, reference: &Feedback) -> f64 {
    let termination = match report.termination {
        Termination::Converged => "converged",
        Termination::MaxSweeps => "max_sweeps",
        Termination::SubproblemFailure => "subproblem_failure",
    };
    let error = (report.feedback.as_matrix() - reference.as_matrix()).norm();
    kv("termination", termination);
    kv("sweeps", report.sweeps);
    kv("sweeps_executed", report.sweeps_executed);
    kv("updates", report.trace.records.len());
    kv("skipped_updates", report.trace.skipped.len());
    if let Some(last) = report.trace.records.last() {
        kv("final_residual", num(last.full_residual));
    }
    kv("reference_error", num(error));
    kv(
        "F",
        format!("\"{}\"", format_matrix(report.feedback.as_matrix())),
    );
    error
}

fn iterate(args: IterateArgs) -> Result<u8> {
    let sys = load(&args.problem)?;
    let problem = &sys.problem;
    let (r, m) = (problem.input_dim(), problem.state_dim());
    let f0 = match args.f0.as_str() {
        "zero" => Feedback::zeros(r, m),
        path => {
            let text = with_path(
                Path::new(path),
                fs::read_to_string(path).map_err(Error::from),
            )?;
            Feedback::new(parse_matrix(&text)?)
        }
    };
    let options = RunOptions {
        max_sweeps: args.max_sweeps,
        tol_change: args.tol,
        tol_residual: args.tol_residual,
        order: order_policy(args.order)?,
        ..RunOptions::default()
    };
    let p_ref = solve_riccati(problem, None, &options.tolerances)?;
    let reference = optimal_feedback(&p_ref, problem)?;

    let (report, failure) = match run(problem, &sys.inputs, &f0, &options) {
        Ok(report) => (report, None),
        Err(Error::MaxSweepsExceeded { report }) => (*report, Some(FailureClass::Convergence)),
        Err(Error::SubproblemFailure { report, source, .. }) => {
            eprintln!("error: {source}");
            (*report, Some(FailureClass::Convergence))
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &args.trace {
        let file = with_path(path, fs::File::create(path).map_err(Error::from))?;
        write_trace_csv(&report.trace, BufWriter::new(file))?;
    }
    let error = print_report(&report, &reference);
    let failure = failure.or_else(|| {
        (error > args.tol_reference * (1.0 + reference.norm()))
            .then_some(FailureClass::Verification)
    });
    Ok(failure.map_or(0, |c| c.exit_code() as u8))
}

fn rate(args: RateArgs) -> Result<u8> {
    let sys = load(&args.problem)?;
    let problem = &sys.problem;
    let tol = Tolerances::default();
    let order = order_policy(args.order)?.resolve(sys.inputs.count())?;
    let p_opt = solve_riccati(problem, None, &tol)?;
    let report = rate_matrix_cycle(problem, &sys.inputs, &p_opt, &order, &tol)?;
    let order_text: Vec<String> = order
        .as_slice()
        .iter()
        .map(|i| (i + 1).to_string())
        .collect();
    kv("order", order_text.join(","));
    for (i, jac) in report.subsystem_jacobians.iter().enumerate() {
        kv(
            &format!("jacobian_norm.{}", i + 1),
            num(jac.singular_values().max()),
        );
    }
    kv("spectral_radius", num(report.spectral_radius));
    kv("operator_norm", num(report.operator_norm));
    let contracting = report.spectral_radius < 1.0;
    kv("contracting", contracting);
    Ok(if contracting {
        0
    } else {
        FailureClass::Verification.exit_code() as u8
    })
}

fn experiment(args: ExperimentArgs) -> Result<u8> {
    let config = with_path(&args.config, ExperimentConfig::load(&args.config))?;
    let outcome = run_experiment(&config, &args.out)?;
    print!("{}", outcome.summary);
    Ok(outcome.exit_code() as u8)
}

fn check_identities(args: IdentityArgs) -> Result<u8> {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for seed in args.first_seed..args.first_seed + args.seeds {
        let (r, s, partition, i) = random_identity_case(seed);
        let res = verify_tech_identities(&r, &s, &partition, i)?;
        let scaled = res.max() / (1.0 + (&r + &s).norm());
        worst = worst.max(scaled);
        if scaled > args.tol {
            failures += 1;
            kv(&format!("failed.{seed}"), num(scaled));
        }
    }
    kv("draws", args.seeds);
    kv("worst_scaled_residual", num(worst));
    kv("failures", failures);
    Ok(if failures == 0 {
        0
    } else {
        FailureClass::Verification.exit_code() as u8
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Iterate(args) => iterate(args),
        Command::Rate(args) => rate(args),
        Command::Experiment(args) => experiment(args),
        Command::CheckIdentities(args) => check_identities(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FailureClass::of(&e).exit_code() as u8)
        }
    }
}
