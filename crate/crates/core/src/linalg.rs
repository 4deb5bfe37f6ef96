//! Thin bridge between [`Operator`] and faer's dense solvers.

use faer::linalg::solvers::Solve;
use faer::Mat;
use ndarray::Array2;

use crate::error::{ArmError, Result};
use crate::operators::{Operator, C64};

pub(crate) fn to_faer(op: &Operator) -> Mat<C64> {
    let m = op.matrix();
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

pub(crate) fn from_faer(m: &Mat<C64>) -> Operator {
    Operator::from_fn(m.nrows(), |(i, j)| m[(i, j)])
}

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues are ascending; column `k` of `vectors` is the eigenvector of
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).to_vec()
    }
}

pub fn hermitian_eigen(op: &Operator) -> Result<HermitianEigen> {
    let defect = op.hermiticity_defect();
    if defect > 1e-9 * op.max_abs().max(1.0) {
        return Err(ArmError::NonHermitian { deviation: defect });
    }
    let evd = to_faer(op)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| ArmError::Eigen(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let n = op.dim();
    let values: Vec<f64> = (0..n).map(|k| s[k].re).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ArmError::Eigen("non-finite eigenvalue".into()));
    }
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a general (non-normal) dense matrix.
pub fn eigenvalues(op: &Operator) -> Result<Vec<C64>> {
    to_faer(op)
        .eigenvalues()
        .map_err(|e| ArmError::Eigen(format!("{e:?}")))
}

/// Solve `A x = b` with partial-pivoting LU.
pub fn dense_solve(a: &Operator, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(ArmError::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let lu = to_faer(a).partial_piv_lu();
    let mut x = Mat::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(x.as_mut());
    let out: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ArmError::SingularSystem("dense LU produced non-finite values".into()));
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// Meant for the modest dimensions of the Purcell oracle (a few hundred);
/// the Taylor series is truncated once terms drop below machine precision
/// relative to the running sum.
pub fn expm(a: &Operator) -> Operator {
    from_faer(&expm_mat(&to_faer(a)))
}

pub(crate) fn expm_mat(a: &Mat<C64>) -> Mat<C64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * faer::Scale(C64::new(scale, 0.0));
    let mut sum = Mat::<C64>::identity(n, n);
    let mut term = Mat::<C64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &x * faer::Scale(C64::new(1.0 / k as f64, 0.0));
        sum += &term;
        if term.norm_max() <= f64::EPSILON * sum.norm_max() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{pauli, PauliAxis};

    #[test]
    fn eigen_of_pauli_x() {
        let e = hermitian_eigen(&pauli(PauliAxis::X)).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v = e.vector(1);
        assert!((v[0].norm() - v[1].norm()).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let err = hermitian_eigen(&pauli(PauliAxis::Plus)).unwrap_err();
        assert!(matches!(err, ArmError::NonHermitian { .. }));
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-i t sigma_x) = cos t I - i sin t sigma_x
        let t = 2.3;
        let u = expm(&pauli(PauliAxis::X).scale(C64::new(0.0, -t)));
        assert!((u.get(0, 0) - C64::new(t.cos(), 0.0)).norm() < 1e-13);
        assert!((u.get(0, 1) - C64::new(0.0, -t.sin())).norm() < 1e-13);
    }

    #[test]
    fn dense_solve_roundtrip() {
        let a = Operator::from_fn(3, |(i, j)| C64::new((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, 0.1));
        let b = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 1.0)];
        let x = dense_solve(&a, &b).unwrap();
        let back = a.apply(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
