//! Shared instance builders and independent oracles for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitlqr::harness::{generate_coupled_system, GeneratorSpec, PartitionedProblem};
use splitlqr::{Feedback, LqrProblem, Matrix, TimeDomain};

pub const COUPLINGS: [f64; 3] = [0.05, 0.1, 0.3];

/// Random coupled system with 2–4 subsystems, 2–4 states and 1–2 inputs each.
pub fn random_spec(domain: TimeDomain, seed: u64, coupling: Option<f64>) -> GeneratorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(2..=4);
    let states: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
    let inputs: Vec<usize> = states
        .iter()
        .map(|&s| rng.gen_range(1..=s.min(2)))
        .collect();
    let eps = coupling.unwrap_or_else(|| COUPLINGS[rng.gen_range(0..COUPLINGS.len())]);
    GeneratorSpec::new(states, inputs, eps, domain, seed)
}

pub fn random_system(domain: TimeDomain, seed: u64, coupling: Option<f64>) -> PartitionedProblem {
    generate_coupled_system(&random_spec(domain, seed, coupling)).expect("generator succeeds")
}

fn rk4_step(f: &impl Fn(&[f64]) -> Vec<f64>, y: &[f64], dt: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, dt / 2.0));
    let k3 = f(&add(y, &k2, dt / 2.0));
    let k4 = f(&add(y, &k3, dt));
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Cost of `u = Fx` from `x0`: RK4 on the state augmented with the running
/// cost (continuous), or direct summation (discrete).
pub fn simulated_cost(problem: &LqrProblem, f: &Feedback, x0: &[f64]) -> f64 {
    let acl = problem.closed_loop(f);
    let weight = problem.q() + f.transpose() * problem.r() * f.as_matrix();
    let m = x0.len();
    let stage = |x: &[f64]| {
        let v = Matrix::from_column_slice(m, 1, x);
        (v.transpose() * &weight * &v)[(0, 0)]
    };
    let x0_norm: f64 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    match problem.domain() {
        TimeDomain::Discrete => {
            let mut x = Matrix::from_column_slice(m, 1, x0);
            let mut total = 0.0;
            for _ in 0..10_000_000 {
                total += stage(x.as_slice());
                x = &acl * x;
                if x.norm() < 1e-13 * x0_norm {
                    break;
                }
            }
            total
        }
        TimeDomain::Continuous => {
            let rhs = |y: &[f64]| {
                let x = Matrix::from_column_slice(m, 1, &y[..m]);
                let mut d: Vec<f64> = (&acl * &x).as_slice().to_vec();
                d.push(stage(&y[..m]));
                d
            };
            let dt = 0.01 / acl.norm().max(1.0);
            let mut y: Vec<f64> = x0.to_vec();
            y.push(0.0);
            for _ in 0..50_000_000 {
                y = rk4_step(&rhs, &y, dt);
                let norm: f64 = y[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-13 * x0_norm {
                    break;
                }
            }
            y[m]
        }
    }
}

pub fn quadratic_form(p: &Matrix, x: &[f64]) -> f64 {
    let v = Matrix::from_column_slice(x.len(), 1, x);
    (v.transpose() * p * &v)[(0, 0)]
}

/// Dense random problem: `A`, `B` uniform on [−1, 1], `Q`, `R` as `GᵀG + 0.1·I`.
pub fn random_dense_problem(seed: u64, m: usize, r: usize, domain: TimeDomain) -> LqrProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |rows, cols| Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0));
    let a = uniform(m, m);
    let b = uniform(m, r);
    let gq = uniform(m, m);
    let gr = uniform(r, r);
    let spd = |g: Matrix| {
        let n = g.nrows();
        let s = g.transpose() * g + Matrix::identity(n, n) * 0.1;
        (&s + s.transpose()) * 0.5
    };
    LqrProblem::new(a, b, spd(gq), spd(gr), domain).expect("valid problem")
}

/// Stabilizing solution of the CARE as the steady state of the Riccati
/// differential equation `Ṗ = AᵀP + PA − PBR⁻¹BᵀP + Q`, `P(0) = 0`, by RK4.
pub fn riccati_ode_steady_state(problem: &LqrProblem) -> Matrix {
    let (a, b, q) = (problem.a(), problem.b(), problem.q());
    let gain = b * problem.r().clone().try_inverse().expect("R invertible") * b.transpose();
    let rhs = |p: &Matrix| a.transpose() * p + p * a - p * &gain * p + q;
    let m = a.nrows();
    let mut p = Matrix::zeros(m, m);
    let dt = 0.01 / (a.norm() + gain.norm()).max(1.0);
    for _ in 0..5_000_000 {
        let k1 = rhs(&p);
        let k2 = rhs(&(&p + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&p + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&p + &k3 * dt));
        p += (k1 + k2 * 2.0 + k3 * 2.0 + &k4) * (dt / 6.0);
        if k4.norm() < 1e-12 * (1.0 + p.norm()) {
            break;
        }
    }
    p
}

/// DARE by value iteration from `P = Q`.
pub fn dare_value_iteration(problem: &LqrProblem) -> Matrix {
    let (a, b, q, r) = (problem.a(), problem.b(), problem.q(), problem.r());
    let mut p = q.clone();
    for _ in 0..1_000_000 {
        let gram = r + b.transpose() * &p * b;
        let cross = a.transpose() * &p * b;
        let next = a.transpose() * &p * a
            - &cross * gram.try_inverse().expect("R + BᵀPB invertible") * cross.transpose()
            + q;
        let change = (&next - &p).norm();
        p = next;
        if change < 1e-14 * (1.0 + p.norm()) {
            break;
        }
    }
    p
}
