use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Contiguous block decomposition of a vector space, one block per subsystem.
///
/// For the input space this defines the selectors `Π_i` (r×r_i, identity
/// in block `i`) and the complements `Î_i = I − Π_iΠ_iᵀ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

pub type InputPartition = Partition;
pub type StatePartition = Partition;

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::DimensionMismatch("partition has no blocks".into()));
        }
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::DimensionMismatch(format!(
                "partition block {} is empty",
                pos + 1
            )));
        }
        let offsets = sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect();
        Ok(Self { sizes, offsets })
    }

    /// A single block covering everything.
    pub fn whole(size: usize) -> Result<Self> {
        Self::new(vec![size])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of subsystems `n`.
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.count() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: self.count(),
            });
        }
        Ok(())
    }

    pub fn range(&self, i: usize) -> Result<Range<usize>> {
        self.check_index(i)?;
        Ok(self.offsets[i]..self.offsets[i] + self.sizes[i])
    }

    pub fn check_total(&self, expected: usize, what: &str) -> Result<()> {
        if self.total() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{what} blocks sum to {}, expected {expected}",
                self.total()
            )));
        }
        Ok(())
    }

    /// `Π_i`.
    pub fn selector(&self, i: usize) -> Result<Matrix> {
        let range = self.range(i)?;
        let mut s = Matrix::zeros(self.total(), range.len());
        for (k, row) in range.enumerate() {
            s[(row, k)] = 1.0;
        }
        Ok(s)
    }

    /// `Π_iΠ_iᵀ`.
    pub fn projector(&self, i: usize) -> Result<Matrix> {
        let range = self.range(i)?;
        let mut p = Matrix::zeros(self.total(), self.total());
        for k in range {
            p[(k, k)] = 1.0;
        }
        Ok(p)
    }

    /// `Î_i = I − Π_iΠ_iᵀ`.
    pub fn complement(&self, i: usize) -> Result<Matrix> {
        let n = self.total();
        Ok(Matrix::identity(n, n) - self.projector(i)?)
    }

    /// Block `(i, j)` of a matrix partitioned by `self` on rows and `cols` on columns.
    pub fn block(&self, m: &Matrix, i: usize, cols: &Partition, j: usize) -> Result<Matrix> {
        let (ri, cj) = (self.range(i)?, cols.range(j)?);
        Ok(m.view((ri.start, cj.start), (ri.len(), cj.len()))
            .into_owned())
    }
}
