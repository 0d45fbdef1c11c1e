//! Algebraic Riccati solvers by Newton iteration on the feedback.
//!
//! Each Newton step evaluates the current stabilizing gain through a
//! Lyapunov (continuous) or Stein (discrete) equation and replaces it by
//! the optimal gain for the resulting value matrix (Kleinman and Hewer
//! iterations). From a stabilizing start every iterate stays stabilizing
//! and convergence is quadratic.
//!
//! Without a usable warm start a stabilizing gain is found by continuation
//! over a spectral shift: the problem is first made open-loop stable by
//! shifting (continuous) or scaling (discrete) `A`, and the shift is then
//! relaxed step by step, each step warm-started from the previous optimum.

use crate::error::{Error, Result};
use crate::lqr::policy::{evaluate_unchecked, is_stable, optimal_feedback, riccati_residual};
use crate::lqr::problem::{Feedback, LqrProblem, TimeDomain, Tolerances, ValueMatrix};
use crate::matrix::{spectral_abscissa, spectral_radius, Matrix};

const MAX_CONTINUATION_STEPS: usize = 500;

/// Stabilizing solution of the continuous algebraic Riccati equation
/// `AᵀP + PA − PBR⁻¹BᵀP + Q = 0`.
pub fn solve_care(
    problem: &LqrProblem,
    warm_start: Option<&Feedback>,
    tol: &Tolerances,
) -> Result<ValueMatrix> {
    if problem.domain() != TimeDomain::Continuous {
        return Err(Error::DomainMismatch {
            expected: TimeDomain::Continuous,
        });
    }
    solve_riccati(problem, warm_start, tol)
}

/// Stabilizing solution of the discrete algebraic Riccati equation
/// `P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q`.
pub fn solve_dare(
    problem: &LqrProblem,
    warm_start: Option<&Feedback>,
    tol: &Tolerances,
) -> Result<ValueMatrix> {
    if problem.domain() != TimeDomain::Discrete {
        return Err(Error::DomainMismatch {
            expected: TimeDomain::Discrete,
        });
    }
    solve_riccati(problem, warm_start, tol)
}

/// Dispatches on the problem's time domain.
pub fn solve_riccati(
    problem: &LqrProblem,
    warm_start: Option<&Feedback>,
    tol: &Tolerances,
) -> Result<ValueMatrix> {
    let start = match warm_start {
        Some(f) => {
            problem.check_feedback(f)?;
            if is_stable(&problem.closed_loop(f), problem.domain(), tol.stability) {
                f.clone()
            } else {
                stabilizing_gain(problem, tol)?
            }
        }
        None => stabilizing_gain(problem, tol)?,
    };
    let (p, _) = newton(problem, start, tol)?;
    let residual = riccati_residual(&p, problem);
    if !(residual <= tol.riccati * (1.0 + p.norm())) {
        return Err(Error::NoConvergence {
            iterations: tol.max_newton_steps,
            residual,
        });
    }
    Ok(p)
}

/// Newton iteration from a stabilizing gain. Returns the iterate with the
/// smallest Riccati residual and the number of steps taken.
fn newton(problem: &LqrProblem, start: Feedback, tol: &Tolerances) -> Result<(ValueMatrix, usize)> {
    const PATIENCE: usize = 4;
    let mut f = start;
    let mut prev: Option<ValueMatrix> = None;
    let mut prev_change = f64::INFINITY;
    let mut best: Option<(f64, ValueMatrix)> = None;
    let mut since_best = 0;
    for step in 1..=tol.max_newton_steps {
        let p = evaluate_unchecked(problem, &f)?;
        let residual = riccati_residual(&p, problem);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, p.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if let Some(old) = &prev {
            let change = (p.as_matrix() - old.as_matrix()).norm();
            let scale = 1.0 + p.norm();
            // Stop at the rounding floor: the change is tiny, has stopped
            // contracting, or the residual has stopped improving.
            if change <= 1e-14 * scale
                || (change <= 1e-9 * scale && change >= 0.5 * prev_change)
                || since_best >= PATIENCE
            {
                let (_, p) = best.expect("set above");
                return Ok((p, step));
            }
            prev_change = change;
        }
        f = optimal_feedback(&p, problem)?;
        prev = Some(p);
    }
    let (residual, p) = best.expect("at least one Newton step");
    if residual <= tol.riccati * (1.0 + p.norm()) {
        return Ok((p, tol.max_newton_steps));
    }
    Err(Error::NoConvergence {
        iterations: tol.max_newton_steps,
        residual,
    })
}

/// Finds a gain that stabilizes `problem` by relaxing a spectral shift.
pub fn stabilizing_gain(problem: &LqrProblem, tol: &Tolerances) -> Result<Feedback> {
    let (m, r) = (problem.state_dim(), problem.input_dim());
    let zero = Feedback::zeros(r, m);
    if is_stable(problem.a(), problem.domain(), tol.stability) {
        return Ok(zero);
    }
    if r == 0 {
        return Err(Error::NotStabilizable);
    }
    match problem.domain() {
        TimeDomain::Continuous => {
            // A − σI is stable for σ above the spectral abscissa.
            let mut sigma = spectral_abscissa(problem.a()) + 1.0;
            if !sigma.is_finite() {
                return Err(Error::NotStabilizable);
            }
            let mut f = zero;
            for _ in 0..MAX_CONTINUATION_STEPS {
                let shifted = shifted_problem(problem, -sigma, 1.0)?;
                f = shifted_optimum(&shifted, f, tol)?;
                let abscissa = spectral_abscissa(&problem.closed_loop(&f));
                if abscissa < -tol.stability {
                    return Ok(f);
                }
                if !(abscissa < sigma) {
                    return Err(Error::NotStabilizable);
                }
                sigma = 0.5 * (sigma + abscissa);
            }
        }
        TimeDomain::Discrete => {
            // A/s (with B/s) is stable for s above the spectral radius.
            let mut s = spectral_radius(problem.a()) + 1.0;
            if !s.is_finite() {
                return Err(Error::NotStabilizable);
            }
            let mut f = zero;
            for _ in 0..MAX_CONTINUATION_STEPS {
                let scaled = shifted_problem(problem, 0.0, 1.0 / s)?;
                f = shifted_optimum(&scaled, f, tol)?;
                let radius = spectral_radius(&problem.closed_loop(&f));
                if radius < 1.0 - tol.stability {
                    return Ok(f);
                }
                if !(radius < s) {
                    return Err(Error::NotStabilizable);
                }
                s = 0.5 * (s + radius);
            }
        }
    }
    Err(Error::NotStabilizable)
}

/// `(scale·(A + shift·I), scale·B, Q, R)`.
fn shifted_problem(problem: &LqrProblem, shift: f64, scale: f64) -> Result<LqrProblem> {
    let m = problem.state_dim();
    let a = (problem.a() + Matrix::identity(m, m) * shift) * scale;
    LqrProblem::new(
        a,
        problem.b() * scale,
        problem.q().clone(),
        problem.r().clone(),
        problem.domain(),
    )
}

fn shifted_optimum(problem: &LqrProblem, start: Feedback, tol: &Tolerances) -> Result<Feedback> {
    let (p, _) = newton(problem, start, tol)?;
    optimal_feedback(&p, problem)
}
