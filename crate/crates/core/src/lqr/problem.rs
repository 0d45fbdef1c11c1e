use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{all_finite, is_spd, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeDomain::Continuous => "continuous",
            TimeDomain::Discrete => "discrete",
        })
    }
}

impl std::str::FromStr for TimeDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" | "c" => Ok(TimeDomain::Continuous),
            "discrete" | "d" => Ok(TimeDomain::Discrete),
            other => Err(Error::parse(
                "domain",
                format!("expected `continuous` or `discrete`, got `{other}`"),
            )),
        }
    }
}

/// Numerical tolerances for the dense LQR primitives.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative Riccati residual accepted from a solve: `res <= riccati * (1 + ‖P‖_F)`.
    pub riccati: f64,
    pub symmetry: f64,
    /// Strict stability margin for `is_stabilizing`.
    pub stability: f64,
    /// Relative singular value cutoff for rank decisions; `None` means `m * eps`.
    pub rank: Option<f64>,
    pub psd: f64,
    pub max_newton_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            riccati: 1e-10,
            symmetry: 1e-12,
            stability: 1e-9,
            rank: None,
            psd: 1e-8,
            max_newton_steps: 100,
        }
    }
}

/// An infinite-horizon LQR problem `(A, B, Q, R)` in one time domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LqrProblem {
    a: Matrix,
    b: Matrix,
    q: Matrix,
    r: Matrix,
    domain: TimeDomain,
}

impl LqrProblem {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, r: Matrix, domain: TimeDomain) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b), ("Q", &q), ("R", &r)] {
            if !all_finite(m) {
                return Err(Error::NonFinite { name });
            }
        }
        let m = a.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, A is {m}x{m}",
                b.nrows()
            )));
        }
        let r_dim = b.ncols();
        if q.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "Q must be {m}x{m}, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if r.shape() != (r_dim, r_dim) {
            return Err(Error::DimensionMismatch(format!(
                "R must be {r_dim}x{r_dim}, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        let tol_sym = Tolerances::default().symmetry;
        if !is_spd(&q, tol_sym) {
            return Err(Error::NotSpd { name: "Q" });
        }
        if !is_spd(&r, tol_sym) {
            return Err(Error::NotSpd { name: "R" });
        }
        Ok(Self { a, b, q, r, domain })
    }

    pub fn scalar(a: f64, b: f64, q: f64, r: f64, domain: TimeDomain) -> Result<Self> {
        let s = |x| Matrix::from_element(1, 1, x);
        Self::new(s(a), s(b), s(q), s(r), domain)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn r(&self) -> &Matrix {
        &self.r
    }
    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    /// Number of states `m`.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs `r`.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn with_domain(&self, domain: TimeDomain) -> Self {
        Self {
            domain,
            ..self.clone()
        }
    }

    pub fn closed_loop(&self, f: &Feedback) -> Matrix {
        &self.a + &self.b * f.as_matrix()
    }

    pub(crate) fn check_feedback(&self, f: &Feedback) -> Result<()> {
        let want = (self.input_dim(), self.state_dim());
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
}

macro_rules! matrix_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(Matrix);

        impl $name {
            pub fn new(m: Matrix) -> Self {
                Self(m)
            }
            pub fn as_matrix(&self) -> &Matrix {
                &self.0
            }
            pub fn into_matrix(self) -> Matrix {
                self.0
            }
        }

        impl Deref for $name {
            type Target = Matrix;
            fn deref(&self) -> &Matrix {
                &self.0
            }
        }

        impl From<Matrix> for $name {
            fn from(m: Matrix) -> Self {
                Self(m)
            }
        }
    };
}

matrix_newtype!(
    /// Symmetric value matrix `P` of a quadratic value function `V(x) = xᵀPx`.
    ValueMatrix
);

matrix_newtype!(
    /// State feedback gain `F` (r×m), so that `u = F x`.
    Feedback
);

impl Feedback {
    pub fn zeros(inputs: usize, states: usize) -> Self {
        Self(Matrix::zeros(inputs, states))
    }
}
