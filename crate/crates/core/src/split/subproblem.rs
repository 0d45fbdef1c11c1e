use crate::error::{Error, Result};
use crate::lqr::{
    is_controllable, is_stabilizing, optimal_feedback, solve_riccati, Feedback, LqrProblem,
    Tolerances, ValueMatrix,
};
use crate::matrix::{symmetrize, Matrix};
use crate::split::partition::InputPartition;

/// The reduced LQR data seen by one subsystem when every other subsystem's
/// feedback is frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemMatrices {
    /// `A + B Î_i F`
    pub a: Matrix,
    /// `B Π_i`
    pub b: Matrix,
    /// `Q + Fᵀ Î_i R Î_i F`
    pub q: Matrix,
    /// `Π_iᵀ R Π_i`
    pub r: Matrix,
}

impl SubproblemMatrices {
    pub fn to_problem(&self, like: &LqrProblem) -> Result<LqrProblem> {
        LqrProblem::new(
            self.a.clone(),
            self.b.clone(),
            self.q.clone(),
            self.r.clone(),
            like.domain(),
        )
    }
}

pub(crate) fn check_inputs(
    problem: &LqrProblem,
    partition: &InputPartition,
    f: &Feedback,
) -> Result<()> {
    partition.check_total(problem.input_dim(), "input")?;
    let want = (problem.input_dim(), problem.state_dim());
    if f.shape() != want {
        return Err(Error::DimensionMismatch(format!(
            "feedback must be {}x{}, got {}x{}",
            want.0,
            want.1,
            f.nrows(),
            f.ncols()
        )));
    }
    Ok(())
}

/// Folds the frozen block rows of `f` into the dynamics and state cost of
/// subsystem `i`'s problem.
pub fn build_subproblem(
    problem: &LqrProblem,
    partition: &InputPartition,
    f: &Feedback,
    i: usize,
) -> Result<SubproblemMatrices> {
    partition.check_index(i)?;
    check_inputs(problem, partition, f)?;
    let select = partition.selector(i)?;
    let others_f = partition.complement(i)? * f.as_matrix();
    let b = problem.b();
    Ok(SubproblemMatrices {
        a: problem.a() + b * &others_f,
        b: b * &select,
        q: symmetrize(&(problem.q() + others_f.transpose() * problem.r() * &others_f)),
        r: select.transpose() * problem.r() * &select,
    })
}

/// One split update: re-optimizes block row `i` of `f` against the others.
///
/// The subproblem is solved when it is controllable, or when `f` already
/// stabilizes the full system (then its own block row is a stabilizing
/// warm start). Otherwise [`Error::SubproblemNotControllable`] is returned
/// which sweeps treat as a skip.
pub fn update_subsystem(
    problem: &LqrProblem,
    partition: &InputPartition,
    f: &Feedback,
    i: usize,
    tol: &Tolerances,
) -> Result<(Feedback, ValueMatrix)> {
    let sub = build_subproblem(problem, partition, f, i)?;
    let stabilizing = is_stabilizing(problem, f, tol);
    if !stabilizing && !is_controllable(&sub.a, &sub.b, tol.rank) {
        return Err(Error::SubproblemNotControllable { index: i });
    }
    let sub_problem = sub.to_problem(problem)?;
    let rows = partition.range(i)?;
    let own_rows = Feedback::new(f.rows(rows.start, rows.len()).into_owned());
    let p = solve_riccati(&sub_problem, Some(&own_rows), tol)?;
    let new_rows = optimal_feedback(&p, &sub_problem)?;
    let mut updated = f.clone().into_matrix();
    updated
        .rows_mut(rows.start, rows.len())
        .copy_from(new_rows.as_matrix());
    Ok((Feedback::new(updated), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqr::{evaluate_policy, solve_riccati, TimeDomain};
    use crate::matrix::{block_diagonal, min_symmetric_eigenvalue};

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    fn coupled_2x2(domain: TimeDomain) -> (LqrProblem, InputPartition) {
        let a = m(
            4,
            4,
            &[
                0.3, 0.5, 0.1, 0.0, //
                -0.4, 0.2, 0.0, 0.2, //
                0.1, 0.0, -0.3, 0.6, //
                0.0, -0.1, 0.5, 0.1,
            ],
        );
        let b = m(
            4,
            4,
            &[
                1.0, 0.2, 0.0, 0.1, 0.0, 1.0, 0.3, 0.0, 0.1, 0.0, 1.0, 0.0, 0.0, 0.2, 0.4, 1.0,
            ],
        );
        let q = block_diagonal(&[
            m(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            m(2, 2, &[1.5, -0.2, -0.2, 1.0]),
        ]);
        let r = block_diagonal(&[
            m(2, 2, &[1.0, 0.1, 0.1, 0.8]),
            m(2, 2, &[0.7, 0.0, 0.0, 1.2]),
        ]);
        (
            LqrProblem::new(a, b, q, r, domain).unwrap(),
            InputPartition::new(vec![2, 2]).unwrap(),
        )
    }

    fn random_like_f() -> Feedback {
        Feedback::new(m(
            4,
            4,
            &[
                0.3, -0.7, 0.2, 0.9, -0.4, 0.1, 0.5, -0.2, 0.8, 0.6, -0.3, 0.4, -0.1, 0.2, 0.7,
                -0.5,
            ],
        ))
    }

    #[test]
    fn zero_feedback_leaves_dynamics_alone() {
        let (prob, part) = coupled_2x2(TimeDomain::Continuous);
        let sub = build_subproblem(&prob, &part, &Feedback::zeros(4, 4), 1).unwrap();
        assert_eq!(&sub.a, prob.a());
        assert_eq!(&sub.q, prob.q());
        assert_eq!(sub.b, prob.b().columns(2, 2).into_owned());
        assert_eq!(sub.r, prob.r().view((2, 2), (2, 2)).into_owned());
    }

    #[test]
    fn single_subsystem_is_the_full_problem() {
        let (prob, _) = coupled_2x2(TimeDomain::Discrete);
        let whole = InputPartition::whole(4).unwrap();
        let sub = build_subproblem(&prob, &whole, &random_like_f(), 0).unwrap();
        assert_eq!(&sub.a, prob.a());
        assert_eq!(&sub.b, prob.b());
        assert_eq!(&sub.q, prob.q());
        assert_eq!(&sub.r, prob.r());
    }

    #[test]
    fn matches_hand_assembled_two_subsystem_blocks() {
        // A⁽¹⁾ = A + [B12; B22][F21 F22], Q⁽¹⁾ = Q + [F21 F22]ᵀ R2 [F21 F22],
        // B⁽¹⁾ = [B11; B21], R⁽¹⁾ = R1.
        let (prob, part) = coupled_2x2(TimeDomain::Continuous);
        let f = random_like_f();
        let b_second = prob.b().columns(2, 2).into_owned();
        let f_second = f.rows(2, 2).into_owned();
        let r2 = prob.r().view((2, 2), (2, 2)).into_owned();
        let a1 = prob.a() + &b_second * &f_second;
        let q1 = prob.q() + f_second.transpose() * &r2 * &f_second;
        let sub = build_subproblem(&prob, &part, &f, 0).unwrap();
        assert!((sub.a - a1).norm() < 1e-14);
        assert!((sub.q - q1).norm() < 1e-14);
        assert_eq!(sub.b, prob.b().columns(0, 2).into_owned());
        assert_eq!(sub.r, prob.r().view((0, 0), (2, 2)).into_owned());
    }

    #[test]
    fn index_out_of_range() {
        let (prob, part) = coupled_2x2(TimeDomain::Continuous);
        assert!(matches!(
            build_subproblem(&prob, &part, &Feedback::zeros(4, 4), 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn update_is_row_local_and_monotone() {
        let tol = Tolerances::default();
        for domain in [TimeDomain::Continuous, TimeDomain::Discrete] {
            let (prob, part) = coupled_2x2(domain);
            let p_opt = solve_riccati(&prob, None, &tol).unwrap();
            let f_opt = optimal_feedback(&p_opt, &prob).unwrap();
            // a stabilizing but suboptimal policy
            let f = Feedback::new(f_opt.as_matrix() * 0.8);
            assert!(is_stabilizing(&prob, &f, &tol));
            let p_old = evaluate_policy(&prob, &f, &tol).unwrap();
            for i in 0..2 {
                let (f_new, p_new) = update_subsystem(&prob, &part, &f, i, &tol).unwrap();
                let other = 1 - i;
                let r = part.range(other).unwrap();
                assert_eq!(f_new.rows(r.start, r.len()), f.rows(r.start, r.len()));
                let gap = min_symmetric_eigenvalue(&(p_old.as_matrix() - p_new.as_matrix()));
                assert!(gap >= -1e-8, "{domain}: {gap}");
                // the subproblem value is the full-problem value of the new policy
                let p_eval = evaluate_policy(&prob, &f_new, &tol).unwrap();
                assert!((p_eval.as_matrix() - p_new.as_matrix()).norm() < 1e-9 * p_new.norm());
            }
        }
    }

    #[test]
    fn uncontrollable_unstabilized_subproblem_is_rejected() {
        // decoupled with an unstable second block: subsystem 0 cannot reach it
        let a = block_diagonal(&[m(1, 1, &[-1.0]), m(1, 1, &[2.0])]);
        let b = Matrix::identity(2, 2);
        let prob = LqrProblem::new(
            a,
            b,
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            TimeDomain::Continuous,
        )
        .unwrap();
        let part = InputPartition::new(vec![1, 1]).unwrap();
        let tol = Tolerances::default();
        assert!(matches!(
            update_subsystem(&prob, &part, &Feedback::zeros(2, 2), 0, &tol),
            Err(Error::SubproblemNotControllable { index: 0 })
        ));
        // subsystem 1 controls its own unstable mode, the other is stable: also not controllable
        // as a pair, and F = 0 is not stabilizing
        assert!(update_subsystem(&prob, &part, &Feedback::zeros(2, 2), 1, &tol).is_err());
    }
}
