//! Seeded generation of coupled multi-subsystem LQR problems.
//!
//! `A = blockdiag(A_11, …, A_nn) + ε·C` where the diagonal blocks and the
//! off-diagonal coupling `C` have entries uniform on `[−1, 1]`. `B` is block
//! diagonal (distributed actuation) with full-column-rank blocks, and `Q`, `R`
//! are block diagonal `GᵀG + margin·I`.
//!
//! A draw is accepted when every subproblem at `F = 0` is solvable (the pair
//! `(A, BΠ_i)` is controllable or `A` itself is stable) and well conditioned:
//! its value matrix has norm at most `max_value_norm`. A draw that fails is
//! checked once more with its diagonal blocks pulled inside the stability
//! region by `margin`, and discarded if it fails again.
//!
//! `input_scale = s` finally replaces `(B, R)` with `(sB, s²R)`. This is a
//! change of input units: value matrices are unchanged and every feedback is
//! divided by `s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::PartitionedProblem;
use crate::lqr::{
    is_controllable, is_stable, solve_riccati, Feedback, LqrProblem, TimeDomain, Tolerances,
};
use crate::matrix::{block_diagonal, spectral_abscissa, spectral_radius, Matrix};
use crate::split::{build_subproblem, Partition};

const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub state_blocks: Vec<usize>,
    pub input_blocks: Vec<usize>,
    #[serde(default)]
    pub coupling: f64,
    pub domain: TimeDomain,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_margin")]
    pub stability_margin: f64,
    #[serde(default = "default_value_bound")]
    pub max_value_norm: f64,
    #[serde(default = "default_input_scale")]
    pub input_scale: f64,
}

fn default_margin() -> f64 {
    0.1
}

fn default_value_bound() -> f64 {
    1e6
}

fn default_input_scale() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn new(
        state_blocks: Vec<usize>,
        input_blocks: Vec<usize>,
        coupling: f64,
        domain: TimeDomain,
        seed: u64,
    ) -> Self {
        Self {
            state_blocks,
            input_blocks,
            coupling,
            domain,
            seed,
            stability_margin: default_margin(),
            max_value_norm: default_value_bound(),
            input_scale: default_input_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_blocks.len() != self.input_blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} state blocks but {} input blocks",
                self.state_blocks.len(),
                self.input_blocks.len()
            )));
        }
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return Err(Error::parse(
                "coupling",
                "must be a finite nonnegative number",
            ));
        }
        if !(self.stability_margin > 0.0 && self.stability_margin < 1.0) {
            return Err(Error::parse("stability_margin", "must lie in (0, 1)"));
        }
        if !(self.max_value_norm > 0.0) {
            return Err(Error::parse("max_value_norm", "must be positive"));
        }
        if !(self.input_scale > 0.0 && self.input_scale.is_finite()) {
            return Err(Error::parse(
                "input_scale",
                "must be a finite positive number",
            ));
        }
        Partition::new(self.state_blocks.clone())?;
        Partition::new(self.input_blocks.clone())?;
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0))
}

fn gram_plus(rng: &mut ChaCha8Rng, size: usize, margin: f64) -> Matrix {
    let g = uniform(rng, size, size);
    let gram = g.transpose() * g + Matrix::identity(size, size) * margin;
    (&gram + gram.transpose()) * 0.5
}

fn full_column_rank(m: &Matrix) -> bool {
    let sv = m.singular_values();
    sv.min() > 1e-3 * sv.max()
}

/// Moves a diagonal block inside the stability region with the given margin.
fn stabilize_block(block: &Matrix, domain: TimeDomain, margin: f64) -> Matrix {
    let n = block.nrows();
    match domain {
        TimeDomain::Continuous => {
            let abscissa = spectral_abscissa(block);
            if abscissa > -margin {
                block - Matrix::identity(n, n) * (abscissa + margin)
            } else {
                block.clone()
            }
        }
        TimeDomain::Discrete => {
            let radius = spectral_radius(block);
            if radius > 1.0 - margin {
                block * ((1.0 - margin) / radius)
            } else {
                block.clone()
            }
        }
    }
}

fn subproblems_solvable(a: &Matrix, b: &Matrix, inputs: &Partition, domain: TimeDomain) -> bool {
    if is_stable(a, domain, Tolerances::default().stability) {
        return true;
    }
    (0..inputs.count()).all(|i| {
        let r = inputs.range(i).expect("valid index");
        is_controllable(a, &b.columns(r.start, r.len()).into_owned(), None)
    })
}

fn subproblems_well_conditioned(problem: &LqrProblem, inputs: &Partition, bound: f64) -> bool {
    let tol = Tolerances::default();
    let f0 = Feedback::zeros(problem.input_dim(), problem.state_dim());
    (0..inputs.count()).all(|i| {
        build_subproblem(problem, inputs, &f0, i)
            .and_then(|sub| sub.to_problem(problem))
            .and_then(|sub| solve_riccati(&sub, None, &tol))
            .is_ok_and(|p| p.norm() <= bound)
    })
}

pub fn generate_coupled_system(spec: &GeneratorSpec) -> Result<PartitionedProblem> {
    spec.validate()?;
    let states = Partition::new(spec.state_blocks.clone())?;
    let inputs = Partition::new(spec.input_blocks.clone())?;
    let m = states.total();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for _ in 0..MAX_ATTEMPTS {
        let diag: Vec<Matrix> = spec
            .state_blocks
            .iter()
            .map(|&s| uniform(&mut rng, s, s))
            .collect();
        let mut coupling = uniform(&mut rng, m, m);
        for i in 0..states.count() {
            let r = states.range(i)?;
            coupling
                .view_mut((r.start, r.start), (r.len(), r.len()))
                .fill(0.0);
        }
        let b_blocks: Vec<Matrix> = spec
            .state_blocks
            .iter()
            .zip(&spec.input_blocks)
            .map(|(&s, &u)| uniform(&mut rng, s, u))
            .collect();
        let q_blocks: Vec<Matrix> = spec
            .state_blocks
            .iter()
            .map(|&s| gram_plus(&mut rng, s, spec.stability_margin))
            .collect();
        let r_blocks: Vec<Matrix> = spec
            .input_blocks
            .iter()
            .map(|&u| gram_plus(&mut rng, u, spec.stability_margin))
            .collect();

        if !b_blocks.iter().all(full_column_rank) {
            continue;
        }
        let b = block_diagonal(&b_blocks) * spec.input_scale;
        let q = block_diagonal(&q_blocks);
        let r = block_diagonal(&r_blocks) * spec.input_scale.powi(2);
        let coupled = &coupling * spec.coupling;
        let accept = |diag: &[Matrix]| -> Result<Option<LqrProblem>> {
            let a = block_diagonal(diag) + &coupled;
            if !subproblems_solvable(&a, &b, &inputs, spec.domain) {
                return Ok(None);
            }
            let problem = LqrProblem::new(a, b.clone(), q.clone(), r.clone(), spec.domain)?;
            Ok(
                subproblems_well_conditioned(&problem, &inputs, spec.max_value_norm)
                    .then_some(problem),
            )
        };
        let problem = match accept(&diag)? {
            Some(p) => p,
            None => {
                let stable: Vec<Matrix> = diag
                    .iter()
                    .map(|d| stabilize_block(d, spec.domain, spec.stability_margin))
                    .collect();
                match accept(&stable)? {
                    Some(p) => p,
                    None => continue,
                }
            }
        };
        return Ok(PartitionedProblem {
            problem,
            inputs,
            states,
        });
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// A seeded draw for the block-identity checks: a random input partition,
/// block-diagonal SPD `R`, dense SPD `S` and a subsystem index.
pub fn random_identity_case(seed: u64) -> (Matrix, Matrix, Partition, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let total: usize = sizes.iter().sum();
    let blocks: Vec<Matrix> = sizes.iter().map(|&s| gram_plus(&mut rng, s, 0.5)).collect();
    let r = block_diagonal(&blocks);
    let s = gram_plus(&mut rng, total, 0.5);
    let i = rng.gen_range(0..n);
    (r, s, Partition::new(sizes).expect("nonempty blocks"), i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_spec() {
        let mut spec = GeneratorSpec::new(vec![2, 2], vec![1], 0.1, TimeDomain::Discrete, 1);
        assert!(generate_coupled_system(&spec).is_err());
        spec.input_blocks = vec![1, 1];
        spec.coupling = -0.1;
        assert!(generate_coupled_system(&spec).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = GeneratorSpec::new(vec![2, 3], vec![1, 2], 0.2, TimeDomain::Continuous, 9);
        let a = generate_coupled_system(&spec).unwrap();
        let b = generate_coupled_system(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate_coupled_system(&GeneratorSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.problem, other.problem);
    }

    #[test]
    fn zero_coupling_is_block_diagonal() {
        for domain in [TimeDomain::Continuous, TimeDomain::Discrete] {
            let spec = GeneratorSpec::new(vec![2, 3, 2], vec![1, 1, 2], 0.0, domain, 4);
            let sys = generate_coupled_system(&spec).unwrap();
            let a = sys.problem.a();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert_eq!(sys.states.block(a, i, &sys.states, j).unwrap().norm(), 0.0);
                        assert_eq!(
                            sys.states
                                .block(sys.problem.b(), i, &sys.inputs, j)
                                .unwrap()
                                .norm(),
                            0.0
                        );
                    }
                }
            }
            assert!(is_stable(a, domain, 0.0));
        }
    }

    #[test]
    fn input_scale_is_a_change_of_units() {
        let spec = GeneratorSpec::new(vec![2, 2], vec![1, 1], 0.1, TimeDomain::Discrete, 12);
        let base = generate_coupled_system(&spec).unwrap();
        let scaled = generate_coupled_system(&GeneratorSpec {
            input_scale: 10.0,
            ..spec
        })
        .unwrap();
        assert_eq!(scaled.problem.a(), base.problem.a());
        assert!((scaled.problem.b() - base.problem.b() * 10.0).norm() < 1e-14);
        let tol = Tolerances::default();
        let p = solve_riccati(&base.problem, None, &tol).unwrap();
        let p_scaled = solve_riccati(&scaled.problem, None, &tol).unwrap();
        assert!((p.as_matrix() - p_scaled.as_matrix()).norm() < 1e-9 * p.norm());
    }

    #[test]
    fn subproblem_values_are_bounded() {
        let tol = Tolerances::default();
        for seed in 0..10 {
            let spec = GeneratorSpec::new(
                vec![3, 3, 3],
                vec![1, 1, 1],
                0.05,
                TimeDomain::Continuous,
                seed,
            );
            let sys = generate_coupled_system(&spec).unwrap();
            let f0 = Feedback::zeros(3, 9);
            for i in 0..3 {
                let sub = build_subproblem(&sys.problem, &sys.inputs, &f0, i)
                    .unwrap()
                    .to_problem(&sys.problem)
                    .unwrap();
                assert!(solve_riccati(&sub, None, &tol).unwrap().norm() <= spec.max_value_norm);
            }
        }
    }

    #[test]
    fn identity_cases_are_valid() {
        for seed in 0..20 {
            let (r, s, part, i) = random_identity_case(seed);
            assert!(i < part.count());
            assert_eq!(r.nrows(), part.total());
            assert!(crate::matrix::is_spd(&s, 1e-12));
        }
    }
}
