use std::f64::consts::PI;

use super::density::{symmetrize_vec, trace_product, DensityMatrix, POSITIVITY_TOL};
use super::liouvillian::{build_liouvillian_on, Collapse, Liouvillian};
use crate::error::{ArmError, Result};
use crate::operators::{Operator, C64};

/// Largest tolerated `|Tr rho(t) - 1|` along a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Classical probe `2 eps (op) cos(2 pi w_p t)`; `eps` and `omega_p` in GHz.
#[derive(Debug, Clone)]
pub struct Drive {
    pub op: Operator,
    pub eps: f64,
    pub omega_p: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Strictly increasing, non-negative output times (ns).
    pub record_times: Vec<f64>,
    /// Operators whose expectation values are recorded.
    pub observables: Vec<Operator>,
    pub store_states: bool,
    /// Initial step (ns); estimated when `None`.
    pub initial_step: Option<f64>,
}

impl EvolveOptions {
    pub fn new(record_times: Vec<f64>) -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            record_times,
            observables: Vec::new(),
            store_states: true,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Empty unless states were requested.
    pub states: Vec<DensityMatrix>,
    /// `expectations[k][i]` is observable `k` at `times[i]`.
    pub expectations: Vec<Vec<C64>>,
    /// Worst `|Tr rho - 1|` over the recorded times.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue seen over the recorded times.
    pub min_eigenvalue: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Rhs {
    l0: Liouvillian,
    drive: Option<(Liouvillian, f64, f64)>,
}

impl Rhs {
    fn eval(&self, t: f64, y: &[C64], out: &mut [C64]) {
        self.l0.apply_into(y, out);
        if let Some((lx, eps, omega_p)) = &self.drive {
            let c = 2.0 * eps * (2.0 * PI * omega_p * t).cos();
            lx.apply_add(C64::new(c, 0.0), y, out);
        }
    }
}

/// Integrate the master equation with the drive switched on at `t = 0`,
/// recording every `dt_hint` ns up to `t_final`.
pub fn evolve(
    h_static: &Operator,
    drive: Option<&Drive>,
    collapses: &[Collapse],
    rho0: &DensityMatrix,
    t_final: f64,
    dt_hint: f64,
) -> Result<Trajectory> {
    if !(t_final > 0.0 && dt_hint > 0.0 && t_final.is_finite()) {
        return Err(ArmError::InvalidParameter(format!(
            "need t_final > 0 and dt_hint > 0, got {t_final} and {dt_hint}"
        )));
    }
    let steps = (t_final / dt_hint).ceil() as usize;
    let mut times: Vec<f64> = (0..steps).map(|k| k as f64 * dt_hint).collect();
    times.push(t_final);
    let mut opts = EvolveOptions::new(times);
    opts.initial_step = Some(dt_hint.min(t_final));
    evolve_with(h_static, drive, collapses, rho0, &opts)
}

/// Adaptive Dormand-Prince integration of `d rho/dt = L rho - i 2pi [H_d(t), rho]`.
///
/// The state is made Hermitian after every accepted step; trace and
/// positivity are checked at every recorded time.
pub fn evolve_with(
    h_static: &Operator,
    drive: Option<&Drive>,
    collapses: &[Collapse],
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let dims = rho0.dims();
    let d = dims.total_dim();
    if opts.record_times.is_empty() {
        return Err(ArmError::InvalidParameter("no record times".into()));
    }
    if opts.record_times[0] < 0.0 || opts.record_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ArmError::InvalidParameter(
            "record times must be non-negative and strictly increasing".into(),
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(ArmError::InvalidParameter("tolerances must be positive".into()));
    }
    for op in &opts.observables {
        if op.dim() != d {
            return Err(ArmError::DimensionMismatch {
                expected: d,
                actual: op.dim(),
            });
        }
    }
    rho0.check(0.0)?;

    let l0 = build_liouvillian_on(dims, h_static, collapses)?;
    let drive = match drive {
        Some(dr) if dr.eps != 0.0 => {
            let lx = build_liouvillian_on(dims, &dr.op, &[])?;
            Some((lx, dr.eps, dr.omega_p))
        }
        _ => None,
    };
    let rhs = Rhs { l0, drive };
    let n = d * d;

    let mut traj = Trajectory {
        times: Vec::with_capacity(opts.record_times.len()),
        states: Vec::new(),
        expectations: vec![Vec::with_capacity(opts.record_times.len()); opts.observables.len()],
        max_trace_drift: 0.0,
        min_eigenvalue: f64::INFINITY,
        accepted_steps: 0,
        rejected_steps: 0,
    };

    let mut y = rho0.vectorize();
    let mut t = 0.0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];

    let scale_of = |y: &[C64]| y.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let t_end = *opts.record_times.last().expect("non-empty");
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            rhs.eval(0.0, &y, &mut k[0]);
            let f = scale_of(&k[0]).max(1e-12);
            (0.01 * scale_of(&y).max(opts.atol) / f).min(t_end.max(1e-6))
        }
    };
    rhs.eval(t, &y, &mut k[0]);

    for &t_rec in &opts.record_times {
        while t < t_rec {
            let mut step = h.min(t_rec - t);
            // avoid leaving a sliver in front of a record time
            if t_rec - t - step < 1e-3 * step {
                step = t_rec - t;
            }
            if step <= 1e-14 * t.abs().max(1.0) {
                return Err(ArmError::StepUnderflow { t, dt: step });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * (step * a);
                        }
                    }
                    stage[i] = acc;
                }
                rhs.eval(t + C[s] * step, &stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            let mut err2 = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for s in 0..7 {
                    let b = B5[s] - B4[s];
                    if b != 0.0 {
                        e += k[s][i] * b;
                    }
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err2 += (e.norm() * step / sc).powi(2);
            }
            let err = (err2 / n as f64).sqrt();
            if !err.is_finite() {
                return Err(ArmError::InvariantViolation {
                    t,
                    detail: "non-finite state during integration".into(),
                });
            }
            if err <= 1.0 {
                t = if (t_rec - (t + step)).abs() <= 1e-12 * t_rec.max(1.0) { t_rec } else { t + step };
                symmetrize_vec(&mut y_new, d);
                std::mem::swap(&mut y, &mut y_new);
                rhs.eval(t, &y, &mut k[0]);
                traj.accepted_steps += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // only grow from a full step, not from one clipped at a record time
                if step >= 0.999 * h || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                traj.rejected_steps += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        record(&mut traj, &y, t, dims, opts)?;
    }
    Ok(traj)
}

fn record(
    traj: &mut Trajectory,
    y: &[C64],
    t: f64,
    dims: crate::operators::HilbertDims,
    opts: &EvolveOptions,
) -> Result<()> {
    let d = dims.total_dim();
    let trace: C64 = (0..d).map(|i| y[i + d * i]).sum();
    let drift = (trace - C64::new(1.0, 0.0)).norm();
    if drift > TRACE_DRIFT_TOL {
        return Err(ArmError::InvariantViolation {
            t,
            detail: format!("trace drift {drift:e}"),
        });
    }
    let state = DensityMatrix::new_unchecked(dims, super::density::unvectorize(y, d)?);
    let min = state.min_eigenvalue()?;
    if min < -POSITIVITY_TOL {
        return Err(ArmError::InvariantViolation {
            t,
            detail: format!("minimum eigenvalue {min:e}"),
        });
    }
    traj.max_trace_drift = traj.max_trace_drift.max(drift);
    traj.min_eigenvalue = traj.min_eigenvalue.min(min);
    traj.times.push(t);
    for (series, op) in traj.expectations.iter_mut().zip(&opts.observables) {
        series.push(trace_product(op, y));
    }
    if opts.store_states {
        traj.states.push(state);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm_model::{build_hamiltonian, ArmParams};
    use crate::operators::CompositeOps;

    #[test]
    fn bare_qubit_decay() {
        let gamma = 0.01;
        let p = ArmParams::polar(5.0, 6.0, 0.0, 0.0, 0.0, gamma, 2).unwrap();
        let ops = CompositeOps::new(p.dims());
        let h = build_hamiltonian(&p).unwrap();
        let rho0 = DensityMatrix::basis_state(p.dims(), 1, 0);
        let mut opts = EvolveOptions::new((1..=10).map(|k| k as f64 * 5.0).collect());
        opts.observables.push(ops.excited.clone());
        let traj = evolve_with(&h, None, &[Collapse::new(ops.sigma_minus.clone(), gamma)], &rho0, &opts).unwrap();
        for (t, pe) in traj.times.iter().zip(&traj.expectations[0]) {
            let want = (-2.0 * PI * gamma * t).exp();
            assert!((pe.re - want).abs() / want < 1e-6, "{t}: {} vs {want}", pe.re);
        }
        assert!(traj.max_trace_drift < TRACE_DRIFT_TOL);
    }

    #[test]
    fn vacuum_rabi_oscillation_period() {
        let g = 0.1;
        let p = ArmParams::polar(5.0, 5.0, g, 0.0, 0.0, 0.0, 3).unwrap();
        let ops = CompositeOps::new(p.dims());
        let h = build_hamiltonian(&p).unwrap();
        let rho0 = DensityMatrix::basis_state(p.dims(), 1, 0);
        let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.25).collect();
        let mut opts = EvolveOptions::new(times);
        opts.observables.push(ops.excited.clone());
        let traj = evolve_with(&h, None, &[], &rho0, &opts).unwrap();
        for (t, pe) in traj.times.iter().zip(&traj.expectations[0]) {
            // population cos^2(2 pi g t): period 1/(2g) ns
            let want = (2.0 * PI * g * t).cos().powi(2);
            assert!((pe.re - want).abs() < 1e-6, "{t}: {} vs {want}", pe.re);
        }
    }

    #[test]
    fn evolve_records_on_grid_and_lands_on_final_time() {
        let p = ArmParams::polar(5.0, 6.0, 0.0, 0.0, 0.01, 0.0, 2).unwrap();
        let ops = CompositeOps::new(p.dims());
        let rho0 = DensityMatrix::basis_state(p.dims(), 0, 1);
        let traj = evolve(
            &build_hamiltonian(&p).unwrap(),
            None,
            &[Collapse::new(ops.a.clone(), 0.01)],
            &rho0,
            10.5,
            1.0,
        )
        .unwrap();
        assert_eq!(traj.times.len(), 12);
        assert_eq!(*traj.times.last().unwrap(), 10.5);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let n = s.expect(&ops.n_photon).re;
            assert!((n - (-2.0 * PI * 0.01 * t).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_schedule() {
        let p = ArmParams::polar(5.0, 6.0, 0.0, 0.0, 0.0, 0.0, 1).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let rho0 = DensityMatrix::basis_state(p.dims(), 0, 0);
        let opts = EvolveOptions::new(vec![1.0, 0.5]);
        assert!(evolve_with(&h, None, &[], &rho0, &opts).is_err());
        assert!(evolve(&h, None, &[], &rho0, -1.0, 0.1).is_err());
    }
}
