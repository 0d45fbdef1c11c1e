//! Iteration Jacobians of the discrete-time split update at the optimum.
//!
//! Linear maps on feedback perturbations `Δ` (r×m) are materialized as
//! `(r·m)×(r·m)` matrices acting on the column-major stacking `vec(Δ)`.
//! Every map here is a left multiplication `Δ ↦ KΔ` by an r×r factor `K`,
//! so its materialization is `I_m ⊗ K`.

use crate::error::{Error, Result};
use crate::lqr::{riccati_residual, Feedback, LqrProblem, TimeDomain, Tolerances, ValueMatrix};
use crate::matrix::{inverse, spectral_radius, Matrix};
use crate::split::{update_subsystem, InputPartition, StatePartition, SweepOrder};

fn check_optimal(problem: &LqrProblem, p_opt: &ValueMatrix, tol: &Tolerances) -> Result<()> {
    if problem.domain() != TimeDomain::Discrete {
        return Err(Error::DomainMismatch {
            expected: TimeDomain::Discrete,
        });
    }
    if p_opt.shape() != (problem.state_dim(), problem.state_dim()) {
        return Err(Error::DimensionMismatch("P_opt must be m×m".into()));
    }
    let residual = riccati_residual(p_opt, problem);
    if !(residual <= tol.riccati * (1.0 + p_opt.norm())) {
        return Err(Error::NotOptimal { residual });
    }
    Ok(())
}

/// Left factor of the derivative of subsystem `i`'s new block row:
/// `−Π_i (R_i + B_iᵀ P B_i)⁻¹ B_iᵀ P B Î_i`.
pub fn rate_factor(
    problem: &LqrProblem,
    partition: &InputPartition,
    p_opt: &ValueMatrix,
    i: usize,
) -> Result<Matrix> {
    partition.check_total(problem.input_dim(), "input")?;
    let select = partition.selector(i)?;
    let b = problem.b();
    let p = p_opt.as_matrix();
    let b_i = b * &select;
    let r_i = select.transpose() * problem.r() * &select;
    let gram = r_i + b_i.transpose() * p * &b_i;
    let gram_inv = inverse(&gram, "R_i + B_iᵀPB_i")?;
    Ok(-(select * gram_inv * b_i.transpose() * p * b * partition.complement(i)?))
}

/// Materialized `Dg^i(F_opt)` for a discrete-time problem.
pub fn rate_matrix_subsystem(
    problem: &LqrProblem,
    partition: &InputPartition,
    p_opt: &ValueMatrix,
    i: usize,
    tol: &Tolerances,
) -> Result<Matrix> {
    check_optimal(problem, p_opt, tol)?;
    let k = rate_factor(problem, partition, p_opt, i)?;
    Ok(materialize(&k, problem.state_dim()))
}

/// `I_m ⊗ K`: the map `Δ ↦ KΔ` on column-major `vec(Δ)`.
pub fn materialize(left: &Matrix, states: usize) -> Matrix {
    Matrix::identity(states, states).kronecker(left)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// Materialized `Dg^i`, indexed by subsystem.
    pub subsystem_jacobians: Vec<Matrix>,
    /// Materialized Jacobian of one full sweep at the optimum.
    pub cycle: Matrix,
    pub spectral_radius: f64,
    /// Operator 2-norm of `cycle`.
    pub operator_norm: f64,
    pub order: SweepOrder,
}

/// Jacobian of one full sweep at the optimum.
///
/// A single update maps `F ↦ Î_i F + Π_iΠ_iᵀ g^i(F)`, so its derivative is
/// `Î_i + Dg^i`; the sweep derivative is the product of these in reverse
/// application order.
pub fn rate_matrix_cycle(
    problem: &LqrProblem,
    partition: &InputPartition,
    p_opt: &ValueMatrix,
    order: &SweepOrder,
    tol: &Tolerances,
) -> Result<RateReport> {
    check_optimal(problem, p_opt, tol)?;
    if order.as_slice().len() != partition.count() {
        return Err(Error::InvalidOrder(format!(
            "order has {} entries for {} subsystems",
            order.as_slice().len(),
            partition.count()
        )));
    }
    let m = problem.state_dim();
    let r = problem.input_dim();
    let factors = (0..partition.count())
        .map(|i| rate_factor(problem, partition, p_opt, i))
        .collect::<Result<Vec<_>>>()?;
    let mut cycle = Matrix::identity(r, r);
    for &i in order.as_slice() {
        cycle = (partition.complement(i)? + &factors[i]) * cycle;
    }
    let operator_norm = cycle.singular_values().max();
    Ok(RateReport {
        subsystem_jacobians: factors.iter().map(|k| materialize(k, m)).collect(),
        spectral_radius: spectral_radius(&cycle),
        operator_norm,
        cycle: materialize(&cycle, m),
        order: order.clone(),
    })
}

/// Block `(i, j)` of `Dg^i` under distributed actuation (block-diagonal `B`):
/// `−(R_ii + B_iiᵀ P_ii B_ii)⁻¹ B_iiᵀ P_ij B_jj` for `j ≠ i`, zero for `j = i`.
pub fn distributed_block(
    problem: &LqrProblem,
    inputs: &InputPartition,
    states: &StatePartition,
    p_opt: &ValueMatrix,
    i: usize,
    j: usize,
) -> Result<Matrix> {
    inputs.check_total(problem.input_dim(), "input")?;
    states.check_total(problem.state_dim(), "state")?;
    if inputs.count() != states.count() {
        return Err(Error::DimensionMismatch(
            "state and input partitions differ in block count".into(),
        ));
    }
    inputs.check_index(i)?;
    inputs.check_index(j)?;
    let b = problem.b();
    let scale = b.norm().max(1.0);
    for bi in 0..states.count() {
        for bj in 0..inputs.count() {
            if bi != bj && states.block(b, bi, inputs, bj)?.norm() > 1e-12 * scale {
                return Err(Error::NotBlockDiagonal { name: "B" });
            }
        }
    }
    if i == j {
        return Ok(Matrix::zeros(inputs.sizes()[i], inputs.sizes()[j]));
    }
    let p = p_opt.as_matrix();
    let b_ii = states.block(b, i, inputs, i)?;
    let b_jj = states.block(b, j, inputs, j)?;
    let r_ii = inputs.block(problem.r(), i, inputs, i)?;
    let p_ii = states.block(p, i, states, i)?;
    let p_ij = states.block(p, i, states, j)?;
    let gram = r_ii + b_ii.transpose() * p_ii * &b_ii;
    Ok(-(inverse(&gram, "R_ii + B_iiᵀP_iiB_ii")? * b_ii.transpose() * p_ij * b_jj))
}

/// `g^i` restricted to its image: the new block row `i` embedded in an
/// otherwise zero r×m matrix.
pub fn block_update_map(
    problem: &LqrProblem,
    partition: &InputPartition,
    f: &Matrix,
    i: usize,
    tol: &Tolerances,
) -> Result<Matrix> {
    let (updated, _) = update_subsystem(problem, partition, &Feedback::new(f.clone()), i, tol)?;
    let rows = partition.range(i)?;
    let mut out = Matrix::zeros(f.nrows(), f.ncols());
    out.rows_mut(rows.start, rows.len())
        .copy_from(&updated.rows(rows.start, rows.len()));
    Ok(out)
}

/// Central-difference Jacobian of `map` at `at`, materialized on column-major
/// stackings: column `k` is `(map(at + hE_k) − map(at − hE_k)) / 2h`.
pub fn finite_difference_jacobian<M>(map: M, at: &Matrix, h: f64) -> Result<Matrix>
where
    M: Fn(&Matrix) -> Result<Matrix>,
{
    if !(h > 0.0) {
        return Err(Error::DimensionMismatch(
            "finite-difference step must be positive".into(),
        ));
    }
    let n_in = at.len();
    let mut jac: Option<Matrix> = None;
    for k in 0..n_in {
        let mut plus = at.clone();
        plus.as_mut_slice()[k] += h;
        let mut minus = at.clone();
        minus.as_mut_slice()[k] -= h;
        let column = (map(&plus)? - map(&minus)?) / (2.0 * h);
        let jac = jac.get_or_insert_with(|| Matrix::zeros(column.len(), n_in));
        jac.column_mut(k).copy_from_slice(column.as_slice());
    }
    Ok(jac.unwrap_or_else(|| Matrix::zeros(0, 0)))
}

/// `1e−5 · (1 + ‖F‖_F)`.
pub fn default_fd_step(f: &Matrix) -> f64 {
    1e-5 * (1.0 + f.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_of_identity_map_is_identity() {
        let at = Matrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0]);
        let jac = finite_difference_jacobian(|f| Ok(f.clone()), &at, 1e-3).unwrap();
        assert!((jac - Matrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn fd_of_left_multiplication_matches_kron() {
        let k = Matrix::from_row_slice(2, 2, &[0.3, -1.0, 2.0, 0.5]);
        let at = Matrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0]);
        let jac = finite_difference_jacobian(|f| Ok(&k * f), &at, 1e-3).unwrap();
        assert!((jac - materialize(&k, 3)).norm() < 1e-10);
    }

    #[test]
    fn continuous_problems_are_rejected() {
        let prob = LqrProblem::scalar(0.0, 1.0, 1.0, 1.0, TimeDomain::Continuous).unwrap();
        let part = InputPartition::whole(1).unwrap();
        let p = ValueMatrix::new(Matrix::identity(1, 1));
        assert!(matches!(
            rate_matrix_subsystem(&prob, &part, &p, 0, &Tolerances::default()),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn non_optimal_value_is_rejected() {
        let prob = LqrProblem::scalar(1.0, 1.0, 1.0, 1.0, TimeDomain::Discrete).unwrap();
        let part = InputPartition::whole(1).unwrap();
        let p = ValueMatrix::new(Matrix::identity(1, 1) * 2.0);
        assert!(matches!(
            rate_matrix_subsystem(&prob, &part, &p, 0, &Tolerances::default()),
            Err(Error::NotOptimal { .. })
        ));
    }
}
