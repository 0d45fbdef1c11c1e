//! Lyapunov and Stein equations solved through Kronecker vectorization.
//!
//! For an `m×m` closed loop the `m²×m²` system is formed explicitly and
//! solved by LU. This is O(m⁶) and intended for desk-scale problems.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{symmetrize, Matrix};

/// Solves `Aᵀ P + P A + W = 0` for `P`.
pub fn solve_continuous_lyapunov(a: &Matrix, w: &Matrix) -> Result<Matrix> {
    let m = check(a, w)?;
    let at = a.transpose();
    let eye = Matrix::identity(m, m);
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let residual = |p: &Matrix| -(&at * p + p * a + w);
    refined_solve(k, m, residual, "continuous Lyapunov")
}

/// Solves the Stein equation `P = Aᵀ P A + W` for `P`.
pub fn solve_stein(a: &Matrix, w: &Matrix) -> Result<Matrix> {
    let m = check(a, w)?;
    let at = a.transpose();
    let k = Matrix::identity(m * m, m * m) - at.kronecker(&at);
    let residual = |p: &Matrix| &at * p * a + w - p;
    refined_solve(k, m, residual, "Stein")
}

const REFINEMENT_STEPS: usize = 2;

/// LU solve of `K vec(P) = vec(residual(0))` followed by iterative
/// refinement against the matrix-form residual.
fn refined_solve(
    k: Matrix,
    m: usize,
    residual: impl Fn(&Matrix) -> Matrix,
    context: &'static str,
) -> Result<Matrix> {
    let lu = k.lu();
    let solve = |rhs: Matrix| -> Result<Matrix> {
        let x = lu
            .solve(&DVector::from_column_slice(rhs.as_slice()))
            .ok_or(Error::SingularMatrix(context))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix(context));
        }
        Ok(Matrix::from_column_slice(m, m, x.as_slice()))
    };
    let mut p = solve(residual(&Matrix::zeros(m, m)))?;
    for _ in 0..REFINEMENT_STEPS {
        p += solve(residual(&p))?;
    }
    Ok(symmetrize(&p))
}

fn check(a: &Matrix, w: &Matrix) -> Result<usize> {
    let m = a.nrows();
    if !a.is_square() || w.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "Lyapunov operands {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(m)
}
