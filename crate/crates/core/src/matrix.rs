//! Dense matrix helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. The textual form used by fixtures
//! and problem files is row-major: rows separated by `;`, entries by `,`,
//! e.g. `0,1;0,0`.

use nalgebra::{Cholesky, Complex, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

const SCHUR_MAX_ITER: usize = 10_000;

/// Parses the row-major textual form. Whitespace around entries is ignored.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::parse("matrix", "empty matrix text"));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ri, row) in text.split(';').enumerate() {
        let mut entries = Vec::new();
        for (ci, entry) in row.split(',').enumerate() {
            let value: f64 = entry.trim().parse().map_err(|_| {
                Error::parse(
                    format!("row {}, column {}", ri + 1, ci + 1),
                    format!("`{}` is not a number", entry.trim()),
                )
            })?;
            if !value.is_finite() {
                return Err(Error::parse(
                    format!("row {}, column {}", ri + 1, ci + 1),
                    "non-finite entry",
                ));
            }
            entries.push(value);
        }
        if let Some(first) = rows.first() {
            if first.len() != entries.len() {
                return Err(Error::parse(
                    format!("row {}", ri + 1),
                    format!("expected {} entries, found {}", first.len(), entries.len()),
                ));
            }
        }
        rows.push(entries);
    }
    let ncols = rows[0].len();
    Ok(Matrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

/// Formats a matrix in the row-major textual form with 17 significant
/// digits, which round-trips every `f64` exactly.
pub fn format_matrix(m: &Matrix) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| format!("{:.16e}", m[(i, j)]))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn all_finite(m: &Matrix) -> bool {
    m.iter().all(|x| x.is_finite())
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn symmetry_defect(m: &Matrix) -> f64 {
    (m - m.transpose()).norm()
}

/// True when `m` is symmetric within `tol_sym * ‖m‖_F` and Cholesky succeeds.
pub fn is_spd(m: &Matrix, tol_sym: f64) -> bool {
    if !m.is_square() || !all_finite(m) {
        return false;
    }
    if symmetry_defect(m) > tol_sym * m.norm().max(1.0) {
        return false;
    }
    Cholesky::new(symmetrize(m)).is_some()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn eigenvalues(m: &Matrix) -> Option<Vec<Complex<f64>>> {
    if m.nrows() == 0 {
        return Some(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part among the eigenvalues; `+inf` if the eigensolver fails.
pub fn spectral_abscissa(m: &Matrix) -> f64 {
    match eigenvalues(m) {
        Some(ev) => ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        None => f64::INFINITY,
    }
}

/// Largest eigenvalue modulus; `+inf` if the eigensolver fails.
pub fn spectral_radius(m: &Matrix) -> f64 {
    match eigenvalues(m) {
        Some(ev) => ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => f64::INFINITY,
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Column-major stacking of the entries of `m`.
pub fn vec(m: &Matrix) -> Vec<f64> {
    m.as_slice().to_vec()
}

pub fn unvec(data: &[f64], nrows: usize, ncols: usize) -> Matrix {
    Matrix::from_column_slice(nrows, ncols, data)
}

/// Block-diagonal matrix assembled from square or rectangular blocks.
pub fn block_diagonal(blocks: &[Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn inverse(m: &Matrix, context: &'static str) -> Result<Matrix> {
    m.clone()
        .try_inverse()
        .filter(all_finite)
        .ok_or(Error::SingularMatrix(context))
}

/// Solves `m x = rhs` by LU with partial pivoting.
pub fn solve(m: &Matrix, rhs: &Matrix, context: &'static str) -> Result<Matrix> {
    m.clone()
        .lu()
        .solve(rhs)
        .filter(all_finite)
        .ok_or(Error::SingularMatrix(context))
}
