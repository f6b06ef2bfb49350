use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Symmetric positive definite weight matrix.
///
/// Weights in the data-assimilation problems here are almost always
/// diagonal, so that case is stored without the `m × m` zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMatrix {
    Diagonal(Vec<f64>),
    Dense(DenseMatrix),
}

impl WeightMatrix {
    pub fn identity(m: usize) -> Self {
        WeightMatrix::Diagonal(vec![1.0; m])
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::DimensionMismatch("empty weight matrix".into()));
        }
        if let Some(i) = d.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::NotSpd { row: i, pivot: d[i] });
        }
        Ok(WeightMatrix::Diagonal(d))
    }

    /// Wraps a dense matrix, collapsing it to the diagonal form when possible.
    pub fn dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_symmetric(1e-12) {
            return Err(Error::InvalidArgument("weight matrix is not symmetric".into()));
        }
        let n = m.rows();
        let off_diagonal = (0..n).any(|i| (0..n).any(|j| i != j && m[(i, j)] != 0.0));
        if off_diagonal {
            super::Cholesky::factor(&m, 0.0)?;
            Ok(WeightMatrix::Dense(m))
        } else {
            Self::diagonal((0..n).map(|i| m[(i, i)]).collect())
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            WeightMatrix::Diagonal(d) => d.len(),
            WeightMatrix::Dense(m) => m.rows(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, WeightMatrix::Diagonal(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            WeightMatrix::Diagonal(d) => DenseMatrix::from_diag(d),
            WeightMatrix::Dense(m) => m.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            WeightMatrix::Diagonal(d) => WeightMatrix::Diagonal(d.iter().map(|v| v * c).collect()),
            WeightMatrix::Dense(m) => WeightMatrix::Dense(m.scaled(c)),
        }
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            WeightMatrix::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            WeightMatrix::Dense(m) => m[(i, j)],
        }
    }

    /// Sub-block on rows/columns `start..end`.
    pub fn block(&self, start: usize, end: usize) -> WeightMatrix {
        match self {
            WeightMatrix::Diagonal(d) => WeightMatrix::Diagonal(d[start..end].to_vec()),
            WeightMatrix::Dense(m) => {
                let w = end - start;
                let mut out = DenseMatrix::zeros(w, w);
                for i in 0..w {
                    out.row_mut(i).copy_from_slice(&m.row(start + i)[start..end]);
                }
                WeightMatrix::Dense(out)
            }
        }
    }

    /// `R v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(match self {
            WeightMatrix::Diagonal(d) => d.iter().zip(v).map(|(w, x)| w * x).collect(),
            WeightMatrix::Dense(m) => m.matvec(v)?,
        })
    }

    /// `‖r‖²_R = rᵀ R r`.
    pub fn weighted_sq_norm(&self, r: &[f64]) -> Result<f64> {
        self.check_len(r.len())?;
        Ok(match self {
            WeightMatrix::Diagonal(d) => d.iter().zip(r).map(|(w, x)| w * x * x).sum(),
            WeightMatrix::Dense(m) => dot(r, &m.matvec(r)?),
        })
    }

    /// `R A` for an `m × n` matrix `A`.
    pub fn apply_rows(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_len(a.rows())?;
        match self {
            WeightMatrix::Diagonal(d) => {
                let mut out = a.clone();
                for (i, &w) in d.iter().enumerate() {
                    out.row_mut(i).iter_mut().for_each(|v| *v *= w);
                }
                Ok(out)
            }
            WeightMatrix::Dense(m) => m.matmul(a),
        }
    }

    /// Block-diagonal `diag(self, other)`.
    pub fn block_diag(&self, other: &WeightMatrix) -> WeightMatrix {
        match (self, other) {
            (WeightMatrix::Diagonal(a), WeightMatrix::Diagonal(b)) => {
                WeightMatrix::Diagonal(a.iter().chain(b).copied().collect())
            }
            _ => {
                let (m0, m1) = (self.dim(), other.dim());
                let mut out = DenseMatrix::zeros(m0 + m1, m0 + m1);
                for i in 0..m0 {
                    for j in 0..m0 {
                        out[(i, j)] = self.get(i, j);
                    }
                }
                for i in 0..m1 {
                    for j in 0..m1 {
                        out[(m0 + i, m0 + j)] = other.get(i, j);
                    }
                }
                WeightMatrix::Dense(out)
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix of order {} applied to length {len}",
                self.dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_diagonal_collapses() {
        let w = WeightMatrix::dense(DenseMatrix::from_diag(&[2.0, 3.0])).unwrap();
        assert_eq!(w, WeightMatrix::Diagonal(vec![2.0, 3.0]));
    }

    #[test]
    fn rejects_non_positive_diagonal() {
        assert!(WeightMatrix::diagonal(vec![1.0, 0.0]).is_err());
        assert!(WeightMatrix::dense(DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap()).is_err());
    }

    #[test]
    fn weighted_norm_dense_and_diagonal_agree() {
        let r = [1.0, -2.0, 0.5];
        let d = WeightMatrix::Diagonal(vec![2.0, 1.0, 4.0]);
        let full = WeightMatrix::Dense(d.to_dense());
        assert_eq!(d.weighted_sq_norm(&r).unwrap(), full.weighted_sq_norm(&r).unwrap());
    }
}
