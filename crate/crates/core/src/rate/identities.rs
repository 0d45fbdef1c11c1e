//! Block-matrix identities behind the discrete-time fixed-point argument.
//!
//! With `R` block diagonal SPD, `S` SPD, `Z = (R+S)⁻¹`,
//! `Z_i = Π_i(Π_iᵀ(R+S)Π_i)⁻¹Π_iᵀ` and `Î_i = I − Π_iΠ_iᵀ`:
//!
//! 1. `Z⁻¹Z_iZ⁻¹ − Î_iSZ_iZ⁻¹ − Z⁻¹Z_iSÎ_i + Î_iSZ_iSÎ_i = Π_iΠ_iᵀ(R+S)Π_iΠ_iᵀ`
//! 2. `Z⁻¹ = Î_iZ⁻¹ + Z⁻¹Î_i − Î_i(R+S)Î_i + Π_iΠ_iᵀ(R+S)Π_iΠ_iᵀ`
//!
//! Together they give `M = Z` for the aggregate
//! `M = Z(Î_iZ⁻¹ + Z⁻¹Î_i − Î_i(R+S)Î_i + LHS₁)Z`.

use crate::error::{Error, Result};
use crate::matrix::{inverse, is_spd, Matrix};
use crate::split::InputPartition;

#[derive(Clone, Debug, PartialEq)]
pub struct TechIdentityScratch {
    pub s: Matrix,
    pub r: Matrix,
    pub i: usize,
    /// `(R+S)⁻¹`
    pub z: Matrix,
    pub z_i: Matrix,
    /// `Î_i`
    pub complement: Matrix,
    /// `Π_iΠ_iᵀ`
    pub projector: Matrix,
}

impl TechIdentityScratch {
    pub fn new(r: &Matrix, s: &Matrix, partition: &InputPartition, i: usize) -> Result<Self> {
        partition.check_index(i)?;
        let n = partition.total();
        if r.shape() != (n, n) || s.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("R and S must be {n}x{n}")));
        }
        if !is_spd(r, 1e-12) {
            return Err(Error::NotSpd { name: "R" });
        }
        if !is_spd(s, 1e-12) {
            return Err(Error::NotSpd { name: "S" });
        }
        for bi in 0..partition.count() {
            for bj in 0..partition.count() {
                if bi != bj && partition.block(r, bi, partition, bj)?.norm() > 0.0 {
                    return Err(Error::NotBlockDiagonal { name: "R" });
                }
            }
        }
        let sum = r + s;
        let select = partition.selector(i)?;
        let block_inv = inverse(&(select.transpose() * &sum * &select), "(R+S)_ii")?;
        Ok(Self {
            s: s.clone(),
            r: r.clone(),
            i,
            z: inverse(&sum, "R+S")?,
            z_i: &select * block_inv * select.transpose(),
            complement: partition.complement(i)?,
            projector: partition.projector(i)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals {
    pub first: f64,
    pub second: f64,
    /// `‖M − Z‖_F`.
    pub aggregate: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.aggregate)
    }
}

pub fn verify_tech_identities(
    r: &Matrix,
    s: &Matrix,
    partition: &InputPartition,
    i: usize,
) -> Result<IdentityResiduals> {
    let t = TechIdentityScratch::new(r, s, partition, i)?;
    let z_inv = &t.r + &t.s;
    let (hat, proj, z_i, s) = (&t.complement, &t.projector, &t.z_i, &t.s);

    let lhs1 = &z_inv * z_i * &z_inv - hat * s * z_i * &z_inv - &z_inv * z_i * s * hat
        + hat * s * z_i * s * hat;
    let diag_block = proj * &z_inv * proj;
    let first = (&lhs1 - &diag_block).norm();

    let common = hat * &z_inv + &z_inv * hat - hat * &z_inv * hat;
    let second = (&z_inv - (&common + &diag_block)).norm();

    let aggregate_m = &t.z * (common + lhs1) * &t.z;
    let aggregate = (aggregate_m - &t.z).norm();

    Ok(IdentityResiduals {
        first,
        second,
        aggregate,
    })
}
