use crate::error::{ArmError, Result};
use crate::linalg::hermitian_eigen;
use crate::operators::{HilbertDims, Operator, C64};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Column-stacking vectorization: `vec(rho)[i + d j] = rho[i][j]`.
pub fn vectorize(op: &Operator) -> Vec<C64> {
    let d = op.dim();
    let m = op.matrix();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            v.push(m[[i, j]]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], d: usize) -> Result<Operator> {
    if v.len() != d * d {
        return Err(ArmError::DimensionMismatch {
            expected: d * d,
            actual: v.len(),
        });
    }
    Ok(Operator::from_fn(d, |(i, j)| v[i + d * j]))
}

/// `Tr(O X)` for a vectorized `X`.
pub fn trace_product(op: &Operator, x: &[C64]) -> C64 {
    let d = op.dim();
    let m = op.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            let o = m[[j, i]];
            if o != C64::new(0.0, 0.0) {
                acc += o * x[i + d * j];
            }
        }
    }
    acc
}

/// Replace `x` (vectorized) by its Hermitian part in place.
pub(crate) fn symmetrize_vec(x: &mut [C64], d: usize) {
    for j in 0..d {
        x[j + d * j].im = 0.0;
        for i in (j + 1)..d {
            let a = x[i + d * j];
            let b = x[j + d * i];
            let h = (a + b.conj()) * 0.5;
            x[i + d * j] = h;
            x[j + d * i] = h.conj();
        }
    }
}

/// A validated state on the truncated composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: HilbertDims,
    rho: Operator,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(dims: HilbertDims, rho: Operator) -> Result<Self> {
        if rho.dim() != dims.total_dim() {
            return Err(ArmError::DimensionMismatch {
                expected: dims.total_dim(),
                actual: rho.dim(),
            });
        }
        let state = Self { dims, rho };
        state.check(0.0)?;
        Ok(state)
    }

    pub(crate) fn new_unchecked(dims: HilbertDims, rho: Operator) -> Self {
        Self { dims, rho }
    }

    pub fn basis_state(dims: HilbertDims, qubit: usize, fock: usize) -> Self {
        let k = dims.index(qubit, fock);
        Self {
            dims,
            rho: Operator::outer(dims.total_dim(), k, k),
        }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(dims: HilbertDims, psi: &[C64]) -> Result<Self> {
        let n = dims.total_dim();
        if psi.len() != n {
            return Err(ArmError::DimensionMismatch {
                expected: n,
                actual: psi.len(),
            });
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(ArmError::InvalidParameter("state vector has zero norm".into()));
        }
        let rho = Operator::from_fn(n, |(i, j)| psi[i] * psi[j].conj() / norm2);
        Ok(Self { dims, rho })
    }

    /// Build from a vectorized matrix, symmetrizing and renormalizing first.
    pub fn from_vec_normalized(dims: HilbertDims, v: &[C64]) -> Result<Self> {
        let d = dims.total_dim();
        let mut v = v.to_vec();
        symmetrize_vec(&mut v, d);
        let tr: f64 = (0..d).map(|k| v[k + d * k].re).sum();
        if !(tr.is_finite() && tr.abs() > 0.0) {
            return Err(ArmError::SingularSystem(format!("state has trace {tr}")));
        }
        for z in &mut v {
            *z /= tr;
        }
        Ok(Self {
            dims,
            rho: unvectorize(&v, d)?,
        })
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn operator(&self) -> &Operator {
        &self.rho
    }

    pub fn vectorize(&self) -> Vec<C64> {
        vectorize(&self.rho)
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// `Tr(O rho)`.
    pub fn expect(&self, op: &Operator) -> C64 {
        (op * &self.rho).trace()
    }

    pub fn population(&self, qubit: usize, fock: usize) -> f64 {
        let k = self.dims.index(qubit, fock);
        self.rho.get(k, k).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.rho + &self.rho.adjoint()).scale_real(0.5);
        Ok(hermitian_eigen(&herm)?.values[0])
    }

    /// Check the state invariants; `t` labels the error.
    pub fn check(&self, t: f64) -> Result<()> {
        let defect = self.rho.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(ArmError::InvariantViolation {
                t,
                detail: format!("Hermiticity defect {defect:e}"),
            });
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(ArmError::InvariantViolation {
                t,
                detail: format!("trace {tr}"),
            });
        }
        let min = self.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(ArmError::InvariantViolation {
                t,
                detail: format!("minimum eigenvalue {min:e}"),
            });
        }
        Ok(())
    }

    /// Trace distance bound `max |rho_ij - sigma_ij|`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.rho.max_abs_diff(&other.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_is_column_stacking() {
        let op = Operator::from_fn(3, |(i, j)| C64::new(i as f64, j as f64));
        let v = vectorize(&op);
        assert_eq!(v[1 + 3 * 2], C64::new(1.0, 2.0));
        assert_eq!(unvectorize(&v, 3).unwrap(), op);
        assert!(unvectorize(&v, 2).is_err());
    }

    #[test]
    fn basis_and_pure_states_are_valid() {
        let dims = HilbertDims::new(2).unwrap();
        let rho = DensityMatrix::basis_state(dims, 1, 0);
        rho.check(0.0).unwrap();
        assert_eq!(rho.population(1, 0), 1.0);
        let psi: Vec<C64> = (0..6).map(|k| C64::new(k as f64, 1.0)).collect();
        let p = DensityMatrix::pure(dims, &psi).unwrap();
        p.check(0.0).unwrap();
        assert!((p.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_states_rejected() {
        let dims = HilbertDims::new(1).unwrap();
        let bad_trace = Operator::identity(4);
        assert!(DensityMatrix::new(dims, bad_trace).is_err());
        let negative = Operator::diagonal(&[1.5, -0.5, 0.0, 0.0]);
        assert!(matches!(
            DensityMatrix::new(dims, negative),
            Err(ArmError::InvariantViolation { .. })
        ));
        let mut m = Operator::diagonal(&[0.5, 0.5, 0.0, 0.0]).into_matrix();
        m[[0, 1]] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(dims, Operator::from_array(m).unwrap()).is_err());
        assert!(DensityMatrix::new(dims, Operator::identity(3)).is_err());
    }

    #[test]
    fn symmetrize_produces_hermitian_part() {
        let op = Operator::from_fn(3, |(i, j)| C64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let mut v = vectorize(&op);
        symmetrize_vec(&mut v, 3);
        let h = unvectorize(&v, 3).unwrap();
        let expected = (&op + &op.adjoint()).scale_real(0.5);
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = Operator::from_fn(3, |(i, j)| C64::new(i as f64 - j as f64, 0.5));
        let x = Operator::from_fn(3, |(i, j)| C64::new(1.0 + i as f64, j as f64));
        let dense = (&a * &x).trace();
        assert!((trace_product(&a, &vectorize(&x)) - dense).norm() < 1e-14);
    }
}
