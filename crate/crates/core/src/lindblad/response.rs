use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::Mat;

use super::density::{trace_product, vectorize, DensityMatrix};
use super::liouvillian::Liouvillian;
use super::steady::steady_residual;
use crate::error::{ArmError, Result};
use crate::operators::{Operator, C64};

/// Steady-state residual required before linearizing about a state.
pub const RESPONSE_RESIDUAL_TOL: f64 = 1e-9;

/// First-order response of `<observe>` to the probe `2 eps drive cos(2 pi w_p t)`.
///
/// Writing `rho = rho_ss + eps (x e^{-i 2pi w_p t} + ...)`, the co-rotating
/// component solves `(L + i 2pi w_p) x = vec(-i 2pi [drive, rho_ss])` and the
/// amplitude is `Tr(observe x)`. This fixes the overall phase so that a bare
/// cavity gives `A = 2pi / (2pi (w_r - w_p) - i pi kappa)`.
///
/// The symbolic LU of the shared sparsity pattern is computed once and reused
/// for every probe frequency.
pub struct ResponseSolver {
    l: Liouvillian,
    symbolic: SymbolicLu<usize>,
    rhs: Vec<C64>,
    observe: Operator,
}

impl ResponseSolver {
    /// Linearize about a stationary state of `l`.
    pub fn new(l: Liouvillian, rho_ss: &DensityMatrix, drive: &Operator, observe: &Operator) -> Result<Self> {
        let residual = steady_residual(&l, rho_ss);
        if residual > RESPONSE_RESIDUAL_TOL {
            return Err(ArmError::InvalidParameter(format!(
                "linearization point is not stationary (residual {residual:e})"
            )));
        }
        Self::new_frozen(l, rho_ss, drive, observe)
    }

    /// Linearize about `rho0` even if it is only quasi-stationary, treating
    /// its slow drift as frozen over the response time.
    pub fn new_frozen(l: Liouvillian, rho0: &DensityMatrix, drive: &Operator, observe: &Operator) -> Result<Self> {
        let rho_ss = rho0;
        let d = l.dims().total_dim();
        for op in [drive, observe] {
            if op.dim() != d {
                return Err(ArmError::DimensionMismatch {
                    expected: d,
                    actual: op.dim(),
                });
            }
        }
        if rho_ss.dims() != l.dims() {
            return Err(ArmError::DimensionMismatch {
                expected: d,
                actual: rho_ss.dims().total_dim(),
            });
        }
        let comm = drive.commutator(rho_ss.operator()).scale(C64::new(0.0, -2.0 * PI));
        let symbolic = SymbolicLu::try_new(l.symbolic().as_ref())
            .map_err(|e| ArmError::SingularSystem(format!("symbolic LU failed: {e:?}")))?;
        Ok(Self {
            l,
            symbolic,
            rhs: vectorize(&comm),
            observe: observe.clone(),
        })
    }

    /// Vectorized first-order density-matrix response at `omega_p` (GHz).
    pub fn response_vector(&self, omega_p: f64) -> Result<Vec<C64>> {
        let shifted = self.l.to_sparse_shifted(C64::new(0.0, 2.0 * PI * omega_p));
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), shifted.as_ref())
            .map_err(|e| ArmError::SingularSystem(format!("LU at w_p = {omega_p} GHz: {e:?}")))?;
        let n = self.rhs.len();
        let mut b = Mat::from_fn(n, 1, |i, _| self.rhs[i]);
        lu.solve_in_place(b.as_mut());
        let x: Vec<C64> = (0..n).map(|i| b[(i, 0)]).collect();
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(ArmError::SingularSystem(format!(
                "non-finite response at w_p = {omega_p} GHz"
            )));
        }
        Ok(x)
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.l
    }

    pub fn amplitude(&self, omega_p: f64) -> Result<C64> {
        Ok(trace_product(&self.observe, &self.response_vector(omega_p)?))
    }
}

/// One-shot form of [`ResponseSolver::amplitude`].
pub fn linear_response(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    drive: &Operator,
    observe: &Operator,
    omega_p: f64,
) -> Result<C64> {
    ResponseSolver::new(l.clone(), rho_ss, drive, observe)?.amplitude(omega_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm_model::{build_hamiltonian, drive_operator, ArmParams};
    use crate::lindblad::liouvillian::{build_liouvillian, Collapse};
    use crate::lindblad::steady::steady_state;
    use crate::operators::CompositeOps;

    #[test]
    fn bare_cavity_matches_analytic_lorentzian() {
        let kappa = 1e-3;
        let p = ArmParams::polar(5.0, 7.0, 0.0, 0.0, kappa, 0.0, 4).unwrap();
        let ops = CompositeOps::new(p.dims());
        let h = build_hamiltonian(&p).unwrap();
        // the uncoupled qubit needs its own channel for a unique steady state
        let l = build_liouvillian(
            &h,
            &[Collapse::new(ops.a.clone(), kappa), Collapse::new(ops.sigma_minus.clone(), 1e-4)],
        )
        .unwrap();
        let rho = steady_state(&l).unwrap();
        let solver = ResponseSolver::new(l, &rho, &drive_operator(p.dims()), &ops.a).unwrap();
        for wp in [4.99, 4.9995, 5.0, 5.0003, 5.02] {
            let a = solver.amplitude(wp).unwrap();
            let want = C64::new(2.0 * PI, 0.0) / C64::new(2.0 * PI * (5.0 - wp), -PI * kappa);
            assert!((a - want).norm() / want.norm() < 1e-6, "{wp}: {a} vs {want}");
        }
    }

    #[test]
    fn rejects_non_stationary_point() {
        let p = ArmParams::polar(5.0, 5.0, 0.1, 0.0, 1e-3, 0.0, 3).unwrap();
        let ops = CompositeOps::new(p.dims());
        let l = build_liouvillian(&build_hamiltonian(&p).unwrap(), &[Collapse::new(ops.a.clone(), 1e-3)]).unwrap();
        let excited = DensityMatrix::basis_state(p.dims(), 1, 0);
        assert!(ResponseSolver::new(l, &excited, &drive_operator(p.dims()), &ops.a).is_err());
    }
}
