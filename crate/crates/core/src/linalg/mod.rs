//! Dense linear-algebra backbone: SPD solves, weighted normal equations and
//! mean-zero solves of singular graph Laplacian systems.

mod cholesky;
mod matrix;
mod weight;

pub use cholesky::Cholesky;
pub use matrix::{axpy, dot, norm2, norm_inf, sub, DenseMatrix, DenseVector};
pub(crate) use matrix::{gemm, MatRef};
pub use weight::WeightMatrix;

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted by [`spd_solve`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative tolerance on `sum(b)` for [`laplacian_solve`].
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Pivots below this fraction of the largest diagonal entry are treated as
/// numerically zero when checking for rank deficiency.
const RANK_TOL: f64 = 1e-13;

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky factorization.
pub fn spd_solve(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let chol = Cholesky::factor(a, 0.0)?;
    Ok(chol.solve(b)?.into())
}

/// Forms `(AᵀRA, AᵀRb)`.
pub fn normal_equations(
    a: &DenseMatrix,
    r: &WeightMatrix,
    b: &[f64],
) -> Result<(DenseMatrix, Vec<f64>)> {
    if r.dim() != a.rows() || b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, R has order {}, b has length {}",
            a.rows(),
            a.cols(),
            r.dim(),
            b.len()
        )));
    }
    let ra = r.apply_rows(a)?;
    let mut normal = a.tr_matmul(&ra)?;
    normal.symmetrize();
    let rhs = ra.tr_matvec(b)?;
    Ok((normal, rhs))
}

/// Factors a normal matrix, mapping failures to [`Error::RankDeficient`].
pub fn factor_normal(normal: &DenseMatrix) -> Result<Cholesky> {
    let scale = (0..normal.rows())
        .map(|i| normal[(i, i)].abs())
        .fold(0.0, f64::max);
    Cholesky::factor(normal, RANK_TOL * scale).map_err(|e| match e {
        Error::NotSpd { row, pivot } => Error::RankDeficient(format!(
            "pivot {pivot:e} at column {row} (largest diagonal {scale:e})"
        )),
        other => other,
    })
}

/// Weighted least-squares solution `x̂ = (AᵀRA)⁻¹AᵀRb`, minimising `‖Ax − b‖²_R`.
pub fn weighted_normal_solve(a: &DenseMatrix, r: &WeightMatrix, b: &[f64]) -> Result<DenseVector> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "underdetermined {}x{} system",
            a.rows(),
            a.cols()
        )));
    }
    let (normal, rhs) = normal_equations(a, r, b)?;
    let chol = factor_normal(&normal)?;
    Ok(chol.solve(&rhs)?.into())
}

/// Solves the singular system `L λ = b` of a connected graph Laplacian,
/// returning the unique solution with `mean(λ) = 0`.
///
/// The system is solved as `(L + 𝟙𝟙ᵀ/p) λ = b`, which is SPD exactly when the
/// graph is connected and agrees with `Lλ = b` on the mean-zero subspace.
pub fn laplacian_solve(l: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    let p = l.rows();
    if !l.is_square() || b.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Laplacian with right-hand side of length {}",
            l.rows(),
            l.cols(),
            b.len()
        )));
    }
    if !l.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument("Laplacian is not symmetric".into()));
    }
    let scale = l.max_abs().max(1.0);
    for i in 0..p {
        let row_sum: f64 = l.row(i).iter().sum();
        if row_sum.abs() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "Laplacian row {i} sums to {row_sum:e}"
            )));
        }
    }
    let sum: f64 = b.iter().sum();
    if sum.abs() > CONSERVATION_TOL * norm2(b) {
        return Err(Error::InconsistentRhs { sum });
    }

    let mut shifted = l.clone();
    let shift = 1.0 / p as f64;
    shifted.as_mut_slice().iter_mut().for_each(|v| *v += shift);
    let max_diag = (0..p).map(|i| shifted[(i, i)]).fold(0.0, f64::max);
    let chol = Cholesky::factor(&shifted, 1e-10 * max_diag).map_err(|e| match e {
        Error::NotSpd { .. } => Error::Disconnected,
        other => other,
    })?;
    let mut lambda = chol.solve(b)?;
    let mean = lambda.iter().sum::<f64>() / p as f64;
    lambda.iter_mut().for_each(|v| *v -= mean);
    Ok(lambda.into())
}
