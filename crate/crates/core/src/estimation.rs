//! The constrained least-squares (CLS) model and its solvers: direct normal
//! equations, a sequential Kalman filter and the VAR-KF objective.
//!
//! A [`ClsProblem`] stacks a state system `H0 x ≈ y0` over an observation
//! system `H1 x ≈ y1`, weighted by `R0` and `R1`. The weights enter the
//! least-squares functional directly; when the Kalman filter is run on a CLS
//! problem the observation error covariance is therefore `R1⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, factor_normal, gemm, norm2, Cholesky, DenseMatrix, DenseVector, MatRef, WeightMatrix,
};

/// Two stacked overdetermined systems with their weight matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClsProblem {
    h0: DenseMatrix,
    y0: DenseVector,
    h1: DenseMatrix,
    y1: DenseVector,
    r0: WeightMatrix,
    r1: WeightMatrix,
}

impl ClsProblem {
    /// Validates shapes: `m0 > n ≥ 1`, `m1 ≥ 1`, weights of matching order.
    ///
    /// Column rank of `H0` is not checked here; the solvers report
    /// [`Error::RankDeficient`] when it fails.
    pub fn new(
        h0: DenseMatrix,
        y0: DenseVector,
        h1: DenseMatrix,
        y1: DenseVector,
        r0: WeightMatrix,
        r1: WeightMatrix,
    ) -> Result<Self> {
        let (m0, n) = h0.shape();
        let m1 = h1.rows();
        if m0 <= n {
            return Err(Error::DimensionMismatch(format!(
                "state block must be overdetermined, got {m0}x{n}"
            )));
        }
        if h1.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "H1 has {} columns, H0 has {n}",
                h1.cols()
            )));
        }
        if y0.len() != m0 || y1.len() != m1 || r0.dim() != m0 || r1.dim() != m1 {
            return Err(Error::DimensionMismatch(format!(
                "y0 {} / R0 {} vs m0 {m0}; y1 {} / R1 {} vs m1 {m1}",
                y0.len(),
                r0.dim(),
                y1.len(),
                r1.dim()
            )));
        }
        Ok(Self {
            h0,
            y0,
            h1,
            y1,
            r0,
            r1,
        })
    }

    /// Convenience constructor with identity weights.
    pub fn unweighted(
        h0: DenseMatrix,
        y0: Vec<f64>,
        h1: DenseMatrix,
        y1: Vec<f64>,
    ) -> Result<Self> {
        let (m0, m1) = (h0.rows(), h1.rows());
        Self::new(
            h0,
            DenseVector::new(y0)?,
            h1,
            DenseVector::new(y1)?,
            WeightMatrix::identity(m0),
            WeightMatrix::identity(m1),
        )
    }

    pub fn n(&self) -> usize {
        self.h0.cols()
    }

    pub fn m0(&self) -> usize {
        self.h0.rows()
    }

    pub fn m1(&self) -> usize {
        self.h1.rows()
    }

    pub fn h0(&self) -> &DenseMatrix {
        &self.h0
    }

    pub fn h1(&self) -> &DenseMatrix {
        &self.h1
    }

    pub fn y0(&self) -> &DenseVector {
        &self.y0
    }

    pub fn y1(&self) -> &DenseVector {
        &self.y1
    }

    pub fn r0(&self) -> &WeightMatrix {
        &self.r0
    }

    pub fn r1(&self) -> &WeightMatrix {
        &self.r1
    }
}

/// The stacked system `A = [H0; H1]`, `b = [y0; y1]`, `R = diag(R0, R1)`.
#[derive(Clone, Debug)]
pub struct StackedSystem {
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub r: WeightMatrix,
}

pub fn stack(prob: &ClsProblem) -> StackedSystem {
    let a = DenseMatrix::vstack(&prob.h0, &prob.h1).expect("column counts validated");
    let b: Vec<f64> = prob.y0.iter().chain(prob.y1.iter()).copied().collect();
    StackedSystem {
        a,
        b: b.into(),
        r: prob.r0.block_diag(&prob.r1),
    }
}

fn residual(h: &DenseMatrix, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let mut r = h.matvec(x)?;
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
    Ok(r)
}

/// `J(x) = ‖H0x − y0‖²_R0 + ‖H1x − y1‖²_R1`.
pub fn cls_objective(prob: &ClsProblem, x: &[f64]) -> Result<f64> {
    let state = prob.r0.weighted_sq_norm(&residual(&prob.h0, x, &prob.y0)?)?;
    let obs = prob.r1.weighted_sq_norm(&residual(&prob.h1, x, &prob.y1)?)?;
    Ok(state + obs)
}

/// Minimiser of [`cls_objective`] via the normal equations of the stacked system.
pub fn cls_solve(prob: &ClsProblem) -> Result<DenseVector> {
    let s = stack(prob);
    linalg::weighted_normal_solve(&s.a, &s.r, &s.b)
}

/// Estimate and error covariance carried by the Kalman filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KfState {
    pub x: DenseVector,
    pub p: DenseMatrix,
    pub k: usize,
}

impl KfState {
    pub fn new(x: DenseVector, p: DenseMatrix) -> Result<Self> {
        if p.shape() != (x.len(), x.len()) {
            return Err(Error::DimensionMismatch(format!(
                "covariance {:?} for state of length {}",
                p.shape(),
                x.len()
            )));
        }
        if !p.is_symmetric(1e-10) {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        Ok(Self { x, p, k: 0 })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Prediction: `x ← Mx`, `P ← MPMᵀ + Q`.
pub fn kf_predict(state: &KfState, m: &DenseMatrix, q: &DenseMatrix) -> Result<KfState> {
    let n = state.n();
    if m.shape() != (n, n) || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "model {:?} and noise {:?} for state of length {n}",
            m.shape(),
            q.shape()
        )));
    }
    if !q.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument("model error covariance is not symmetric".into()));
    }
    let x = m.matvec(&state.x)?;
    let mp = m.matmul(&state.p)?;
    let mut p = q.clone();
    let mp_view = MatRef::row_major(mp.as_slice(), n, n);
    let m_view = MatRef::row_major(m.as_slice(), n, n);
    gemm(1.0, mp_view, m_view.t(), 1.0, &mut p);
    p.symmetrize();
    Ok(KfState {
        x: x.into(),
        p,
        k: state.k + 1,
    })
}

/// Correction with observations `y = Hx + v`, `v ~ N(0, R)`.
///
/// `K = PHᵀ(HPHᵀ + R)⁻¹`, `x ← x + K(y − Hx)`, `P ← (I − KH)P`.
pub fn kf_correct(
    state: &KfState,
    h: &DenseMatrix,
    r: &WeightMatrix,
    y: &[f64],
) -> Result<KfState> {
    let n = state.n();
    let m = h.rows();
    if h.cols() != n || r.dim() != m || y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "H {:?}, R order {}, y length {} for state of length {n}",
            h.shape(),
            r.dim(),
            y.len()
        )));
    }
    // PHᵀ, n × m
    let mut pht = DenseMatrix::zeros(n, m);
    gemm(
        1.0,
        MatRef::row_major(state.p.as_slice(), n, n),
        MatRef::row_major(h.as_slice(), m, n).t(),
        0.0,
        &mut pht,
    );
    let mut s = h.matmul(&pht)?;
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] += r.get(i, j);
        }
    }
    s.symmetrize();
    let scale = (0..m).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
    let chol = Cholesky::factor(&s, 1e-14 * scale).map_err(|_| Error::SingularInnovation)?;

    // K = PHᵀ S⁻¹, one row at a time since S is symmetric.
    let mut k = pht.clone();
    for i in 0..n {
        chol.solve_in_place(k.row_mut(i))?;
    }

    let innovation: Vec<f64> = y.iter().zip(h.matvec(&state.x)?).map(|(yi, hx)| yi - hx).collect();
    let x: Vec<f64> = state
        .x
        .iter()
        .zip(k.matvec(&innovation)?)
        .map(|(xi, dx)| xi + dx)
        .collect();

    // P − K (PHᵀ)ᵀ equals (I − KH)P for symmetric P.
    let mut p = state.p.clone();
    gemm(
        -1.0,
        MatRef::row_major(k.as_slice(), n, m),
        MatRef::row_major(pht.as_slice(), n, m).t(),
        1.0,
        &mut p,
    );
    p.symmetrize();
    Ok(KfState {
        x: x.into(),
        p,
        k: state.k,
    })
}

/// Runs the Kalman filter on a CLS problem with a static model (`M = I`, `Q = 0`).
///
/// The filter starts from the information-form estimate of the state block,
/// `x̂ = argmin ‖H0x − y0‖²_R0` with `P = (H0ᵀR0H0)⁻¹`, and assimilates the
/// rows of `H1` in blocks of `block_size`. The result matches [`cls_solve`]
/// up to rounding.
pub fn kf_assimilate_cls(prob: &ClsProblem, block_size: usize) -> Result<DenseVector> {
    let m1 = prob.m1();
    if block_size == 0 || block_size > m1 {
        return Err(Error::InvalidArgument(format!(
            "block size {block_size} outside 1..={m1}"
        )));
    }
    let (normal, rhs) = linalg::normal_equations(&prob.h0, &prob.r0, &prob.y0)?;
    let chol = factor_normal(&normal)?;
    let x0 = chol.solve(&rhs)?;
    let mut state = KfState {
        x: x0.into(),
        p: chol.inverse(),
        k: 0,
    };

    // Observation covariance is R1⁻¹. Correlated weights are whitened first so
    // that row blocks are independent: ‖H1x − y1‖²_R1 = ‖Lᵀ(H1x − y1)‖² with R1 = LLᵀ.
    let (h1, y1, cov) = match &prob.r1 {
        WeightMatrix::Diagonal(w) => (
            prob.h1.clone(),
            prob.y1.to_vec(),
            w.iter().map(|v| 1.0 / v).collect::<Vec<_>>(),
        ),
        WeightMatrix::Dense(w) => {
            let lt = Cholesky::factor(w, 0.0)?.factor_matrix().transpose();
            (lt.matmul(&prob.h1)?, lt.matvec(&prob.y1)?, vec![1.0; m1])
        }
    };

    let n = prob.n();
    let mut start = 0;
    while start < m1 {
        let end = (start + block_size).min(m1);
        let rows = end - start;
        let h_blk = DenseMatrix::from_vec(rows, n, h1.as_slice()[start * n..end * n].to_vec())?;
        let r_blk = WeightMatrix::Diagonal(cov[start..end].to_vec());
        // The static model leaves x and P unchanged in the prediction step.
        state.k += 1;
        state = kf_correct(&state, &h_blk, &r_blk, &y1[start..end])?;
        start = end;
    }
    Ok(state.x)
}

/// VAR-KF functional `‖x_next − M x̂‖²_Qw + ‖y − H x_next‖²_R` with explicit weights.
pub fn varkf_objective(
    x_next: &[f64],
    x_hat: &[f64],
    m: &DenseMatrix,
    qw: &WeightMatrix,
    h: &DenseMatrix,
    r: &WeightMatrix,
    y: &[f64],
) -> Result<f64> {
    if x_next.len() != x_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "x_next has length {}, x_hat {}",
            x_next.len(),
            x_hat.len()
        )));
    }
    let model: Vec<f64> = x_next.iter().zip(m.matvec(x_hat)?).map(|(a, b)| a - b).collect();
    let obs = residual(h, x_next, y)?;
    Ok(qw.weighted_sq_norm(&model)? + r.weighted_sq_norm(&obs)?)
}

/// `‖AᵀRA x − AᵀRb‖ / ‖AᵀRb‖` for the stacked system.
pub fn normal_equation_residual(prob: &ClsProblem, x: &[f64]) -> Result<f64> {
    let s = stack(prob);
    let (normal, rhs) = linalg::normal_equations(&s.a, &s.r, &s.b)?;
    let lhs = normal.matvec(x)?;
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / norm2(&rhs).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    fn toy(y1: f64) -> ClsProblem {
        ClsProblem::unweighted(col(&[1.0, 1.0]), vec![1.0, 1.0], col(&[1.0]), vec![y1]).unwrap()
    }

    #[test]
    fn stack_shapes() {
        let prob = ClsProblem::new(
            col(&[1.0, 1.0]),
            vec![1.0, 1.0].into(),
            col(&[1.0]),
            vec![3.0].into(),
            WeightMatrix::Diagonal(vec![2.0, 2.0]),
            WeightMatrix::Diagonal(vec![3.0]),
        )
        .unwrap();
        let s = stack(&prob);
        assert_eq!(s.a.shape(), (3, 1));
        assert_eq!(s.a.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(&s.b[..], &[1.0, 1.0, 3.0]);
        assert_eq!(s.r, WeightMatrix::Diagonal(vec![2.0, 2.0, 3.0]));
    }

    #[test]
    fn rejects_square_state_block() {
        let err = ClsProblem::unweighted(col(&[1.0]), vec![1.0], col(&[1.0]), vec![1.0]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn objective_hand_values() {
        let prob = toy(3.0);
        assert_eq!(cls_objective(&prob, &[1.0]).unwrap(), 4.0);
        let consistent = toy(1.0);
        assert!(cls_objective(&consistent, &[1.0]).unwrap() < 1e-20);
    }

    #[test]
    fn cls_solve_hand_values() {
        assert!((cls_solve(&toy(1.0)).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((cls_solve(&toy(4.0)).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn predict_scalar() {
        let s = KfState::new(vec![2.0].into(), col(&[1.0])).unwrap();
        let next = kf_predict(&s, &col(&[3.0]), &col(&[0.5])).unwrap();
        assert_eq!(&next.x[..], &[6.0]);
        assert!((next.p[(0, 0)] - 9.5).abs() < 1e-15);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn predict_static_model_is_identity() {
        let p = DenseMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let s = KfState::new(vec![1.0, -1.0].into(), p.clone()).unwrap();
        let next = kf_predict(&s, &DenseMatrix::identity(2), &DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(next.x, s.x);
        assert_eq!(next.p, p);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn correct_scalar() {
        let s = KfState::new(vec![0.0].into(), col(&[1.0])).unwrap();
        let next = kf_correct(&s, &col(&[1.0]), &WeightMatrix::identity(1), &[2.0]).unwrap();
        assert!((next.x[0] - 1.0).abs() < 1e-15);
        assert!((next.p[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn correct_with_null_covariance_is_noop() {
        let s = KfState::new(vec![3.0, 4.0].into(), DenseMatrix::zeros(2, 2)).unwrap();
        let h = DenseMatrix::from_rows(&[&[1.0, 2.0]]).unwrap();
        let next = kf_correct(&s, &h, &WeightMatrix::identity(1), &[100.0]).unwrap();
        assert_eq!(next.x, s.x);
        assert_eq!(next.p, s.p);
    }

    #[test]
    fn correct_singular_innovation() {
        let s = KfState::new(vec![0.0].into(), DenseMatrix::zeros(1, 1)).unwrap();
        let r = WeightMatrix::Dense(DenseMatrix::zeros(1, 1));
        assert!(matches!(
            kf_correct(&s, &col(&[1.0]), &r, &[1.0]),
            Err(Error::SingularInnovation)
        ));
    }

    #[test]
    fn assimilate_toy_matches_hand_value() {
        let x = kf_assimilate_cls(&toy(4.0), 1).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!(kf_assimilate_cls(&toy(4.0), 2).is_err());
    }

    #[test]
    fn varkf_examples() {
        let one = col(&[1.0]);
        let w = WeightMatrix::identity(1);
        let v = varkf_objective(&[2.0], &[1.0], &one, &w, &one, &w, &[3.0]).unwrap();
        assert_eq!(v, 2.0);
        let v = varkf_objective(&[1.0], &[1.0], &one, &w, &one, &w, &[1.0]).unwrap();
        assert_eq!(v, 0.0);
    }
}
