use super::matrix::{axpy, dot, gemm, DenseMatrix, MatRef};
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `A = L Lᵀ`, stored row-major.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle.
    ///
    /// Fails with [`Error::NotSpd`] as soon as a pivot (the value whose square
    /// root becomes the diagonal of `L`) is `<= min_pivot`.
    pub fn factor(a: &DenseMatrix, min_pivot: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot factor a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let (done, rest) = l.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j];
                let s = a[(i, j)] - dot(&row_i[..j], row_j);
                row_i[j] = s / done[j * n + j];
            }
            let pivot = a[(i, i)] - dot(&row_i[..i], &row_i[..i]);
            if !(pivot > min_pivot) || !pivot.is_finite() {
                return Err(Error::NotSpd { row: i, pivot });
            }
            row_i[i] = pivot.sqrt();
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "factor of order {n} applied to length {}",
                x.len()
            )));
        }
        // L y = b
        for i in 0..n {
            let s = x[i] - dot(&self.l[i * n..i * n + i], &x[..i]);
            x[i] = s / self.l(i, i);
        }
        // Lᵀ x = y, column-oriented so rows of L stay contiguous.
        for i in (0..n).rev() {
            x[i] /= self.l(i, i);
            let xi = x[i];
            if xi != 0.0 {
                axpy(-xi, &self.l[i * n..i * n + i], &mut x[..i]);
            }
        }
        Ok(())
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "factor of order {} applied to {} rows",
                self.n,
                b.rows()
            )));
        }
        let bt = b.transpose();
        let mut xt = bt.clone();
        for j in 0..bt.rows() {
            self.solve_in_place(xt.row_mut(j))?;
        }
        Ok(xt.transpose())
    }

    /// `A⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut linv = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let d = 1.0 / self.l(i, i);
            let (above, rest) = linv.as_mut_slice().split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for k in 0..i {
                let lik = self.l(i, k);
                if lik != 0.0 {
                    axpy(-lik * d, &above[k * n..k * n + k + 1], &mut row_i[..k + 1]);
                }
            }
            row_i[i] = d;
        }
        let mut inv = DenseMatrix::zeros(n, n);
        let view = MatRef::row_major(linv.as_slice(), n, n);
        gemm(1.0, view.t(), view, 0.0, &mut inv);
        inv.symmetrize();
        inv
    }

    pub fn factor_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.n, self.n, self.l.clone()).expect("factor entries are finite")
    }
}
