use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::Mat;

use super::density::DensityMatrix;
use super::liouvillian::Liouvillian;
use crate::error::{ArmError, Result};
use crate::operators::C64;

/// Residual bound `max |L vec(rho_ss)|` accepted for a steady state (1/ns).
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// The bordered system: `L` with row `replace` swapped for the trace
/// functional, right-hand side `e_replace`.
fn bordered(l: &Liouvillian, replace: usize) -> SparseColMat<usize, C64> {
    let n = l.size();
    let d = l.dims().total_dim();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(l.nnz() + d);
    let mut values = Vec::with_capacity(l.nnz() + d);
    col_ptr.push(0);
    for col in 0..n {
        let mut trace_pending = col % (d + 1) == 0;
        for (row, v) in l.column(col) {
            if trace_pending && row > replace {
                row_idx.push(replace);
                values.push(C64::new(1.0, 0.0));
                trace_pending = false;
            }
            if row != replace {
                row_idx.push(row);
                values.push(v);
            }
        }
        if trace_pending {
            row_idx.push(replace);
            values.push(C64::new(1.0, 0.0));
        }
        col_ptr.push(values.len());
    }
    SparseColMat::new(SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx), values)
}

fn solve_bordered(l: &Liouvillian, replace: usize) -> Result<Vec<C64>> {
    let n = l.size();
    let a = bordered(l, replace);
    let lu = a
        .sp_lu()
        .map_err(|e| ArmError::DegenerateSteadyState(format!("bordered system is singular: {e:?}")))?;
    let mut b = Mat::<C64>::zeros(n, 1);
    b[(replace, 0)] = C64::new(1.0, 0.0);
    lu.solve_in_place(b.as_mut());
    let x: Vec<C64> = (0..n).map(|i| b[(i, 0)]).collect();
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(ArmError::DegenerateSteadyState(
            "bordered solve produced non-finite values".into(),
        ));
    }
    Ok(x)
}

/// Unique stationary state of `L`, found by a sparse LU solve of the
/// bordered system `[L with one row -> Tr] x = e`.
///
/// A unitary generator, a non-finite solution or a residual above
/// [`STEADY_RESIDUAL_TOL`] is reported as a degenerate null space.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    if !l.is_dissipative() {
        return Err(ArmError::DegenerateSteadyState(
            "no dissipation: every diagonal state is stationary".into(),
        ));
    }
    let x = solve_bordered(l, 0)?;
    let rho = DensityMatrix::from_vec_normalized(l.dims(), &x)?;
    let residual = steady_residual(l, &rho);
    if residual > STEADY_RESIDUAL_TOL {
        return Err(ArmError::DegenerateSteadyState(format!(
            "residual {residual:e} after bordered solve"
        )));
    }
    Ok(rho)
}

/// As [`steady_state`], additionally re-solving with the trace constraint in
/// the last diagonal row and requiring both answers to agree.
pub fn steady_state_verified(l: &Liouvillian) -> Result<DensityMatrix> {
    let rho = steady_state(l)?;
    let last = l.size() - 1;
    let alt = DensityMatrix::from_vec_normalized(l.dims(), &solve_bordered(l, last)?)?;
    let diff = rho.max_abs_diff(&alt);
    if diff > 1e-8 {
        return Err(ArmError::DegenerateSteadyState(format!(
            "two borderings disagree by {diff:e}"
        )));
    }
    Ok(rho)
}

/// `max |L vec(rho)|`.
pub fn steady_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    l.apply(&rho.vectorize()).iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::liouvillian::{build_liouvillian, Collapse};
    use crate::operators::{CompositeOps, HilbertDims, Operator};

    #[test]
    fn bordered_matrix_layout() {
        let dims = HilbertDims::new(1).unwrap();
        let ops = CompositeOps::new(dims);
        let l = build_liouvillian(&ops.sigma_z, &[Collapse::new(ops.a.clone(), 0.1)]).unwrap();
        for replace in [0, 7, 15] {
            let b = bordered(&l, replace);
            let dense = b.to_dense();
            for col in 0..16 {
                let want = if col % 5 == 0 { 1.0 } else { 0.0 };
                assert_eq!(dense[(replace, col)], C64::new(want, 0.0));
                for row in 0..16 {
                    if row != replace {
                        assert_eq!(dense[(row, col)], l.get(row, col));
                    }
                }
            }
        }
    }

    #[test]
    fn cavity_decay_relaxes_to_vacuum() {
        let dims = HilbertDims::new(3).unwrap();
        let ops = CompositeOps::new(dims);
        let h = &ops.n_photon.scale_real(5.0) - &ops.sigma_z.scale_real(3.0);
        let l = build_liouvillian(
            &h,
            &[Collapse::new(ops.a.clone(), 1e-3), Collapse::new(ops.sigma_minus.clone(), 1e-4)],
        )
        .unwrap();
        let rho = steady_state_verified(&l).unwrap();
        assert!((rho.population(0, 0) - 1.0).abs() < 1e-12);
        assert!(steady_residual(&l, &rho) < STEADY_RESIDUAL_TOL);
    }

    #[test]
    fn unitary_generator_is_degenerate() {
        let dims = HilbertDims::new(2).unwrap();
        let ops = CompositeOps::new(dims);
        let l = build_liouvillian(&ops.sigma_z, &[Collapse::new(ops.a.clone(), 0.0)]).unwrap();
        assert!(matches!(steady_state(&l), Err(ArmError::DegenerateSteadyState(_))));
    }

    #[test]
    fn disconnected_subspace_is_degenerate() {
        // decay acts on the resonator only, so any qubit mixture is stationary
        let dims = HilbertDims::new(2).unwrap();
        let ops = CompositeOps::new(dims);
        let l = build_liouvillian(&Operator::zeros(6), &[Collapse::new(ops.a.clone(), 0.01)]).unwrap();
        assert!(matches!(
            steady_state_verified(&l),
            Err(ArmError::DegenerateSteadyState(_))
        ));
    }
}
