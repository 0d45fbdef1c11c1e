mod common;

use proptest::prelude::*;
use splitlqr::harness::{
    generate_coupled_system, random_identity_case, GeneratorSpec, PartitionedProblem,
};
use splitlqr::lqr::{optimal_feedback, solve_dare};
use splitlqr::matrix::block_diagonal;
use splitlqr::rate::{
    block_update_map, default_fd_step, distributed_block, finite_difference_jacobian, rate_factor,
    rate_matrix_cycle, rate_matrix_subsystem, verify_tech_identities,
};
use splitlqr::split::{run, sweep, RunOptions, SweepOrder, Termination};
use splitlqr::{Feedback, LqrProblem, Matrix, TimeDomain, Tolerances};

fn discrete_system(
    seed: u64,
    states: Vec<usize>,
    inputs: Vec<usize>,
    coupling: f64,
) -> PartitionedProblem {
    generate_coupled_system(&GeneratorSpec::new(
        states,
        inputs,
        coupling,
        TimeDomain::Discrete,
        seed,
    ))
    .unwrap()
}

#[test]
fn subsystem_jacobians_match_finite_differences() {
    let tol = Tolerances::default();
    let shapes = [
        (vec![2, 2], vec![1, 1]),
        (vec![2, 2, 2], vec![1, 2, 1]),
        (vec![3, 3], vec![2, 1]),
    ];
    for (k, (states, inputs)) in shapes.into_iter().enumerate() {
        let sys = discrete_system(100 + k as u64, states, inputs, 0.2);
        let p = &sys.problem;
        let p_opt = solve_dare(p, None, &tol).unwrap();
        let f_opt = optimal_feedback(&p_opt, p).unwrap();
        let h = default_fd_step(f_opt.as_matrix());
        for i in 0..sys.inputs.count() {
            let analytic = rate_matrix_subsystem(p, &sys.inputs, &p_opt, i, &tol).unwrap();
            let fd = finite_difference_jacobian(
                |f| block_update_map(p, &sys.inputs, f, i, &tol),
                f_opt.as_matrix(),
                h,
            )
            .unwrap();
            let err = (&analytic - &fd).norm();
            assert!(
                err <= 1e-5 * (1.0 + analytic.norm()),
                "shape {k} subsystem {i}: {err:e}"
            );
        }
    }
}

#[test]
fn subsystem_jacobians_touch_only_their_block_row() {
    let tol = Tolerances::default();
    let sys = discrete_system(7, vec![2, 3, 2], vec![1, 2, 1], 0.3);
    let p_opt = solve_dare(&sys.problem, None, &tol).unwrap();
    let r = sys.problem.input_dim();
    for i in 0..3 {
        let jac = rate_matrix_subsystem(&sys.problem, &sys.inputs, &p_opt, i, &tol).unwrap();
        let rows = sys.inputs.range(i).unwrap();
        for (k, row) in jac.row_iter().enumerate() {
            // column-major vec: entry k is F[(k % r, k / r)]
            if !rows.contains(&(k % r)) {
                assert_eq!(row.norm(), 0.0, "subsystem {i} row {k}");
            }
        }
    }
}

#[test]
fn cycle_jacobian_matches_finite_differences_of_a_sweep() {
    let tol = Tolerances::default();
    let sys = discrete_system(23, vec![2, 2, 2], vec![1, 1, 1], 0.3);
    let p = &sys.problem;
    let p_opt = solve_dare(p, None, &tol).unwrap();
    let f_opt = optimal_feedback(&p_opt, p).unwrap();
    for order in [vec![0, 1, 2], vec![2, 0, 1]] {
        let order = SweepOrder::new(order, 3).unwrap();
        let report = rate_matrix_cycle(p, &sys.inputs, &p_opt, &order, &tol).unwrap();
        let fd = finite_difference_jacobian(
            |f| {
                sweep(p, &sys.inputs, &Feedback::new(f.clone()), &order, &tol)
                    .map(|(f, _)| f.into_matrix())
            },
            f_opt.as_matrix(),
            default_fd_step(f_opt.as_matrix()),
        )
        .unwrap();
        let err = (&report.cycle - &fd).norm();
        assert!(err <= 1e-5 * (1.0 + report.cycle.norm()), "{err:e}");
        assert!(report.spectral_radius < 1.0);
        assert!(report.operator_norm >= report.spectral_radius - 1e-12);
    }
}

#[test]
fn distributed_blocks_match_the_rate_factor() {
    let tol = Tolerances::default();
    let sys = discrete_system(31, vec![2, 3, 2], vec![1, 2, 1], 0.2);
    let p_opt = solve_dare(&sys.problem, None, &tol).unwrap();
    let ins = &sys.inputs;
    for i in 0..3 {
        let k = rate_factor(&sys.problem, ins, &p_opt, i).unwrap();
        for j in 0..3 {
            let block = distributed_block(&sys.problem, ins, &sys.states, &p_opt, i, j).unwrap();
            let expected = ins.block(&k, i, ins, j).unwrap();
            assert!(
                (&block - &expected).norm() <= 1e-12 * (1.0 + k.norm()),
                "({i}, {j})"
            );
        }
    }
}

/// The seed's problem with its off-diagonal blocks of `A` rescaled to `eps`.
fn with_coupling(sys: &PartitionedProblem, base: f64, eps: f64) -> LqrProblem {
    let a = sys.problem.a();
    let diag: Vec<Matrix> = (0..sys.states.count())
        .map(|i| sys.states.block(a, i, &sys.states, i).unwrap())
        .collect();
    let d = block_diagonal(&diag);
    let coupled = &d + (a - &d) * (eps / base);
    LqrProblem::new(
        coupled,
        sys.problem.b().clone(),
        sys.problem.q().clone(),
        sys.problem.r().clone(),
        TimeDomain::Discrete,
    )
    .unwrap()
}

const COUPLING_GRID: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.0];

fn rates_over_grid(seed: u64) -> Vec<f64> {
    let tol = Tolerances::default();
    let sys = discrete_system(seed, vec![2, 2, 2], vec![1, 1, 1], 0.4);
    let order = SweepOrder::ascending(3, 0).unwrap();
    COUPLING_GRID
        .iter()
        .map(|&eps| {
            let problem = with_coupling(&sys, 0.4, eps);
            let p_opt = solve_dare(&problem, None, &tol).unwrap();
            rate_matrix_cycle(&problem, &sys.inputs, &p_opt, &order, &tol)
                .unwrap()
                .spectral_radius
        })
        .collect()
}

#[test]
fn rate_shrinks_with_the_coupling_on_sampled_instances() {
    for seed in [300, 301, 302] {
        let rates = rates_over_grid(seed);
        for pair in rates.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "seed {seed}: {rates:?}");
        }
        assert!(rates[4] <= 1e-10);
    }
}

#[test]
fn rate_is_not_monotone_in_the_coupling_in_general() {
    let rates = rates_over_grid(303);
    assert!(rates[1] > rates[0], "{rates:?}");
    assert!(rates[4] <= 1e-10);
}

#[test]
fn seed_42_regression_fixture() {
    // recorded on first computation
    const RHO: f64 = 1.617_843_401_703_762e-3;
    let tol = Tolerances::default();
    let sys = discrete_system(42, vec![2, 2], vec![1, 1], 0.1);
    let f0 = Feedback::zeros(2, 4);
    let report = run(&sys.problem, &sys.inputs, &f0, &RunOptions::default()).unwrap();
    assert_eq!(report.termination, Termination::Converged);
    let p_opt = solve_dare(&sys.problem, None, &tol).unwrap();
    let order = SweepOrder::ascending(2, 0).unwrap();
    let rho = rate_matrix_cycle(&sys.problem, &sys.inputs, &p_opt, &order, &tol)
        .unwrap()
        .spectral_radius;
    assert!(rho < 1.0);
    assert!((rho - RHO).abs() <= 1e-10, "{rho:.17e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn block_identities_hold(seed in any::<u64>()) {
        let (r, s, part, i) = random_identity_case(seed);
        let res = verify_tech_identities(&r, &s, &part, i).unwrap();
        prop_assert!(res.max() <= 1e-12 * (1.0 + (&r + &s).norm()), "{res:?}");
    }
}
