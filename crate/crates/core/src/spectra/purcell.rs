use std::f64::consts::{FRAC_PI_2, PI};

use faer::Mat;

use crate::arm_model::{build_hamiltonian, drive_operator, ArmParams, Coupling};
use crate::error::{ArmError, Result};
use crate::lindblad::density::{trace_product, vectorize};
use crate::lindblad::{build_liouvillian_on, Collapse};
use crate::linalg::{expm_mat, from_faer, hermitian_eigen, to_faer};
use crate::operators::{CompositeOps, Operator, C64};

/// Excited population window used for the exponential fit.
const FIT_WINDOW: (f64, f64) = (0.2, 0.8);
const FIT_SAMPLES: usize = 200;
/// Largest rms residual of `ln P` accepted as exponential.
const FIT_RMS_MAX: f64 = 0.05;
/// Runs longer than this (ns) are treated as non-decaying.
const MAX_HORIZON_NS: f64 = 1e12;

/// Closed-form Purcell rates (GHz) and optionally the fitted oracle rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellReport {
    /// `kappa g_jc^2 / (delta^2 + kappa^2 + g_jc^2)`.
    pub gamma_jc: f64,
    /// `kappa g_ajc^2 / (sigma^2 + kappa^2 + 2 g_ajc^2)`.
    pub gamma_ajc: f64,
    /// `gamma_jc + gamma_ajc`.
    pub gamma_rabi: f64,
    pub gamma_numeric: Option<f64>,
}

pub fn purcell_formulas(params: &ArmParams) -> Result<PurcellReport> {
    params.validate()?;
    let k = params.kappa;
    if !(k > 0.0) {
        return Err(ArmError::InvalidParameter("Purcell rates need kappa > 0".into()));
    }
    let det = params.detunings();
    let (g_jc, g_ajc) = params.coupling.jc_ajc();
    let (jc2, ajc2) = (g_jc * g_jc, g_ajc * g_ajc);
    let gamma_jc = k * jc2 / (det.delta * det.delta + k * k + jc2);
    let gamma_ajc = k * ajc2 / (det.sigma * det.sigma + k * k + 2.0 * ajc2);
    Ok(PurcellReport {
        gamma_jc,
        gamma_ajc,
        gamma_rabi: gamma_jc + gamma_ajc,
        gamma_numeric: None,
    })
}

/// Jump operator used by the decay oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PurcellDissipator {
    /// Cavity field `a + a^dag` restricted to downward transitions between
    /// dressed eigenstates, so that the counter-rotating vacuum is the
    /// fixed point and photons leave the hybridized system, not the bare mode.
    #[default]
    Dressed,
    /// Plain `kappa D[a]` on the bare mode.
    Bare,
}

/// `V^dag op V`.
fn to_eigenbasis(v: &Mat<C64>, op: &Operator) -> Operator {
    from_faer(&(v.adjoint() * to_faer(op) * v))
}

/// Least-squares slope and rms residual of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// [`purcell_numeric_with`] using the dressed dissipator.
pub fn purcell_numeric(params: &ArmParams) -> Result<f64> {
    purcell_numeric_with(params, PurcellDissipator::Dressed)
}

/// Qubit relaxation rate (GHz) fitted to `<s+ s->` starting from bare
/// `|e,0>`, with resonator loss as the only channel.
///
/// The master equation is solved in the eigenbasis of `H` by exact
/// exponentiation of the Liouvillian, so runs spanning millions of
/// nanoseconds cost the same as short ones. The log-population is fitted
/// over the samples where the population lies in `[0.2, 0.8]`; if it never
/// drops below 0.2 the whole run is fitted.
pub fn purcell_numeric_with(params: &ArmParams, dissipator: PurcellDissipator) -> Result<f64> {
    let closed = purcell_formulas(params)?;
    let dims = params.dims();
    let ops = CompositeOps::new(dims);
    let h = build_hamiltonian(params)?;
    let eig = hermitian_eigen(&h)?;
    let d = dims.total_dim();
    let v = Mat::from_fn(d, d, |i, j| eig.vectors[(i, j)]);

    let jump = match dissipator {
        PurcellDissipator::Bare => to_eigenbasis(&v, &ops.a),
        PurcellDissipator::Dressed => {
            let x = to_eigenbasis(&v, &drive_operator(dims));
            let gap_tol = 1e-9 * eig.values.iter().fold(1.0f64, |m, e| m.max(e.abs()));
            Operator::from_fn(d, |(j, k)| {
                if eig.values[k] - eig.values[j] > gap_tol {
                    x.get(j, k)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        }
    };
    let h_d = Operator::diagonal(&eig.values);
    let l = build_liouvillian_on(dims, &h_d, &[Collapse::new(jump, params.kappa)])?;
    let generator = to_faer(&l.to_dense());

    let excited = Operator::outer(d, dims.index(1, 0), dims.index(1, 0));
    let rho0 = vectorize(&to_eigenbasis(&v, &excited));
    let observe = to_eigenbasis(&v, &(&ops.sigma_plus * &ops.sigma_minus));
    let rho0_col = Mat::from_fn(rho0.len(), 1, |i, _| rho0[i]);
    let population = |u: &Mat<C64>| -> f64 {
        let x = u * &rho0_col;
        let xv: Vec<C64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
        trace_product(&observe, &xv).re
    };
    let propagator = |t: f64| expm_mat(&(&generator * faer::Scale(C64::new(t, 0.0))));

    // bracket the time at which the population first falls below the window
    let guess = closed.gamma_rabi.max(1e-12 * params.kappa);
    let mut horizon = (0.5 / (2.0 * PI * guess)).min(MAX_HORIZON_NS);
    let mut u = propagator(horizon);
    for _ in 0..60 {
        if population(&u) >= FIT_WINDOW.0 {
            break;
        }
        horizon *= 0.25;
        u = propagator(horizon);
    }
    while population(&u) > FIT_WINDOW.0 && horizon < MAX_HORIZON_NS {
        u = &u * &u;
        horizon *= 2.0;
    }

    let dt = horizon / FIT_SAMPLES as f64;
    let step = propagator(dt);
    let mut state = rho0_col.clone();
    let mut times = Vec::with_capacity(FIT_SAMPLES + 1);
    let mut pops = Vec::with_capacity(FIT_SAMPLES + 1);
    for k in 0..=FIT_SAMPLES {
        let xv: Vec<C64> = (0..state.nrows()).map(|i| state[(i, 0)]).collect();
        times.push(k as f64 * dt);
        pops.push(trace_product(&observe, &xv).re);
        state = &step * &state;
    }

    let in_window: Vec<usize> = (0..pops.len())
        .filter(|&k| pops[k] >= FIT_WINDOW.0 && pops[k] <= FIT_WINDOW.1)
        .collect();
    let selected: Vec<usize> = if pops.last().is_some_and(|p| *p > FIT_WINDOW.0) {
        (0..pops.len()).filter(|&k| pops[k] > 0.0).collect()
    } else {
        in_window
    };
    if selected.len() < 5 {
        return Err(ArmError::NonExponentialDecay { residual: f64::INFINITY });
    }
    let t: Vec<f64> = selected.iter().map(|&k| times[k]).collect();
    let lp: Vec<f64> = selected.iter().map(|&k| pops[k].ln()).collect();
    let (slope, rms) = linear_fit(&t, &lp);
    if !(rms <= FIT_RMS_MAX) {
        return Err(ArmError::NonExponentialDecay { residual: rms });
    }
    Ok((-slope / (2.0 * PI)).max(0.0))
}

/// One row of the JC/AJC Purcell comparison at equal dispersive shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellRow {
    /// Target `|chi|` (GHz).
    pub chi: f64,
    /// Qubit frequency giving `g^2 / delta = |chi|` with `theta = 0`.
    pub omega_q_jc: Option<f64>,
    pub gamma_jc_over_kappa: Option<f64>,
    /// Qubit frequency giving `g^2 / sigma = |chi|` with `theta = pi/2`.
    pub omega_q_ajc: Option<f64>,
    pub gamma_ajc_over_kappa: Option<f64>,
}

/// Purcell rates of the pure JC and pure AJC couplings tuned to the same
/// dispersive-shift magnitude by moving the qubit frequency.
///
/// The JC qubit is placed above the resonator. A target that would need a
/// non-positive qubit frequency is reported as `None`; `chi = 0` is the
/// infinitely detuned limit where both ratios vanish.
pub fn purcell_comparison_curve(chi_targets: &[f64], template: &ArmParams) -> Result<Vec<PurcellRow>> {
    template.validate()?;
    if chi_targets.is_empty() {
        return Err(ArmError::InvalidParameter("no chi targets".into()));
    }
    if !(template.kappa > 0.0) {
        return Err(ArmError::InvalidParameter("Purcell comparison needs kappa > 0".into()));
    }
    let (g, _) = template.coupling.polar();
    if !(g > 0.0) {
        return Err(ArmError::InvalidParameter("Purcell comparison needs g > 0".into()));
    }
    let wr = template.omega_r;
    let ratio = |omega_q: f64, theta: f64| -> Result<f64> {
        let p = template.with_coupling(Coupling::Polar { g, theta })?.with_omega_q(omega_q)?;
        let r = purcell_formulas(&p)?;
        Ok(if theta == 0.0 { r.gamma_jc } else { r.gamma_ajc } / p.kappa)
    };
    chi_targets
        .iter()
        .map(|&chi| {
            if !chi.is_finite() {
                return Err(ArmError::InvalidParameter(format!("chi target {chi} is not finite")));
            }
            let c = chi.abs();
            if c == 0.0 {
                return Ok(PurcellRow {
                    chi: c,
                    omega_q_jc: None,
                    gamma_jc_over_kappa: Some(0.0),
                    omega_q_ajc: None,
                    gamma_ajc_over_kappa: Some(0.0),
                });
            }
            let wq_jc = wr + g * g / c;
            let wq_ajc = g * g / c - wr;
            let (omega_q_ajc, gamma_ajc_over_kappa) = if wq_ajc > 0.0 {
                (Some(wq_ajc), Some(ratio(wq_ajc, FRAC_PI_2)?))
            } else {
                (None, None)
            };
            Ok(PurcellRow {
                chi: c,
                omega_q_jc: Some(wq_jc),
                gamma_jc_over_kappa: Some(ratio(wq_jc, 0.0)?),
                omega_q_ajc,
                gamma_ajc_over_kappa,
            })
        })
        .collect()
}
