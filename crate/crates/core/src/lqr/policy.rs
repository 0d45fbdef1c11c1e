use crate::error::{Error, Result};
use crate::lqr::lyapunov::{solve_continuous_lyapunov, solve_stein};
use crate::lqr::problem::{Feedback, LqrProblem, TimeDomain, Tolerances, ValueMatrix};
use crate::matrix::{solve, spectral_abscissa, spectral_radius, Matrix};

/// Optimal feedback implied by a value matrix.
///
/// Continuous: `F = −R⁻¹BᵀP`. Discrete: `F = −(R + BᵀPB)⁻¹BᵀPA`.
pub fn optimal_feedback(p: &ValueMatrix, problem: &LqrProblem) -> Result<Feedback> {
    let (b, r) = (problem.b(), problem.r());
    let btp = b.transpose() * p.as_matrix();
    let f = match problem.domain() {
        TimeDomain::Continuous => -solve(r, &btp, "R in optimal feedback")?,
        TimeDomain::Discrete => {
            let gram = r + &btp * b;
            -solve(&gram, &(btp * problem.a()), "R + BᵀPB in optimal feedback")?
        }
    };
    Ok(Feedback::new(f))
}

/// Value matrix of a fixed stabilizing feedback.
///
/// Solves `(A+BF)ᵀP + P(A+BF) + Q + FᵀRF = 0` in continuous time and
/// `P = (A+BF)ᵀP(A+BF) + Q + FᵀRF` in discrete time.
pub fn evaluate_policy(
    problem: &LqrProblem,
    f: &Feedback,
    tol: &Tolerances,
) -> Result<ValueMatrix> {
    problem.check_feedback(f)?;
    if !is_stabilizing(problem, f, tol) {
        return Err(Error::NotStabilizing);
    }
    evaluate_unchecked(problem, f)
}

pub(crate) fn evaluate_unchecked(problem: &LqrProblem, f: &Feedback) -> Result<ValueMatrix> {
    let closed = problem.closed_loop(f);
    let fm = f.as_matrix();
    let w = problem.q() + fm.transpose() * problem.r() * fm;
    let p = match problem.domain() {
        TimeDomain::Continuous => solve_continuous_lyapunov(&closed, &w)?,
        TimeDomain::Discrete => solve_stein(&closed, &w)?,
    };
    Ok(ValueMatrix::new(p))
}

/// Strict stability of `A + BF` with margin `tol.stability`.
pub fn is_stabilizing(problem: &LqrProblem, f: &Feedback, tol: &Tolerances) -> bool {
    if problem.check_feedback(f).is_err() {
        return false;
    }
    is_stable(&problem.closed_loop(f), problem.domain(), tol.stability)
}

pub fn is_stable(m: &Matrix, domain: TimeDomain, margin: f64) -> bool {
    match domain {
        TimeDomain::Continuous => spectral_abscissa(m) < -margin,
        TimeDomain::Discrete => spectral_radius(m) < 1.0 - margin,
    }
}

/// Kalman rank test on `[B, AB, …, A^{m−1}B]`.
///
/// Singular values at or below `tol_rank · σ_max` count as zero; `None`
/// selects `m · ε`.
pub fn is_controllable(a: &Matrix, b: &Matrix, tol_rank: Option<f64>) -> bool {
    let m = a.nrows();
    if !a.is_square() || b.nrows() != m {
        return false;
    }
    if m == 0 {
        return true;
    }
    let cols = b.ncols();
    if cols == 0 {
        return false;
    }
    let mut kalman = Matrix::zeros(m, m * cols);
    let mut block = b.clone();
    for k in 0..m {
        kalman.view_mut((0, k * cols), (m, cols)).copy_from(&block);
        block = a * block;
    }
    let sv = kalman.singular_values();
    let smax = sv.max();
    if smax == 0.0 || !smax.is_finite() {
        return false;
    }
    let tol = tol_rank.unwrap_or(m as f64 * f64::EPSILON);
    sv.iter().filter(|&&s| s > tol * smax).count() == m
}

/// Frobenius norm of the algebraic Riccati equation residual of `P`.
///
/// Returns `+inf` when the discrete-time gain matrix is singular.
pub fn riccati_residual(p: &ValueMatrix, problem: &LqrProblem) -> f64 {
    let (a, b, q, r) = (problem.a(), problem.b(), problem.q(), problem.r());
    let p = p.as_matrix();
    let btp = b.transpose() * p;
    let res = match problem.domain() {
        TimeDomain::Continuous => match solve(r, &btp, "R") {
            Ok(rinv_btp) => a.transpose() * p + p * a - btp.transpose() * rinv_btp + q,
            Err(_) => return f64::INFINITY,
        },
        TimeDomain::Discrete => {
            let gram = r + &btp * b;
            let btpa = &btp * a;
            match solve(&gram, &btpa, "R + BᵀPB") {
                Ok(k) => a.transpose() * p * a - btpa.transpose() * k + q - p,
                Err(_) => return f64::INFINITY,
            }
        }
    };
    res.norm()
}
