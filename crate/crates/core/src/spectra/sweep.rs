use std::f64::consts::PI;

use rayon::prelude::*;

use super::dispersive::dressed_label;
use crate::arm_model::{build_hamiltonian, drive_operator, ArmParams};
use crate::error::{ArmError, Result};
use crate::lindblad::{build_liouvillian_on, evolve_with, steady_state, Collapse, DensityMatrix, Drive, EvolveOptions};
use crate::lindblad::ResponseSolver;
use crate::linalg::hermitian_eigen;
use crate::operators::{CompositeOps, Operator, C64};

/// The swept parameter besides the probe frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondAxis {
    None,
    /// Qubit frequencies (GHz).
    QubitFreq(Vec<f64>),
    /// Mixing angles (rad) at fixed total coupling.
    Theta(Vec<f64>),
}

impl SecondAxis {
    /// CSV column name for the axis, if any.
    pub fn column_name(&self) -> Option<&'static str> {
        match self {
            SecondAxis::None => None,
            SecondAxis::QubitFreq(_) => Some("omega_q_ghz"),
            SecondAxis::Theta(_) => Some("theta_rad"),
        }
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        match self {
            SecondAxis::None => vec![None],
            SecondAxis::QubitFreq(v) | SecondAxis::Theta(v) => v.iter().map(|&x| Some(x)).collect(),
        }
    }

    /// `params` with the axis value substituted.
    pub fn apply(&self, params: &ArmParams, value: Option<f64>) -> Result<ArmParams> {
        match (self, value) {
            (SecondAxis::QubitFreq(_), Some(w)) => params.with_omega_q(w),
            (SecondAxis::Theta(_), Some(t)) => params.with_theta(t),
            _ => Ok(*params),
        }
    }
}

/// Initial state about which the probe response is linearized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatePrep {
    /// Steady state of the undriven master equation.
    Steady,
    /// Dressed ground-like state `|g,0>`, qubit decay switched off.
    Ground,
    /// Dressed excited-like state `|e,0>`, qubit decay switched off.
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainOptions {
    /// Probe strength (GHz).
    pub eps_p: f64,
    /// Settling time before sampling (ns); `40 / (pi kappa)` when `None`.
    pub settle_ns: Option<f64>,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl TimeDomainOptions {
    pub fn new(eps_p: f64) -> Self {
        Self {
            eps_p,
            settle_ns: None,
            periods: 20,
            samples_per_period: 32,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_p > 0.0 && self.eps_p.is_finite()) {
            return Err(ArmError::InvalidParameter(format!("eps_p must be positive, got {}", self.eps_p)));
        }
        if self.periods == 0 || self.samples_per_period < 4 {
            return Err(ArmError::InvalidParameter(
                "time-domain sampling needs >= 1 period and >= 4 samples per period".into(),
            ));
        }
        if let Some(s) = self.settle_ns {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(ArmError::InvalidParameter(format!("settle time must be >= 0, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    LinearResponse,
    TimeDomain(TimeDomainOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Probe frequencies (GHz), strictly increasing.
    pub probe: Vec<f64>,
    pub axis: SecondAxis,
    pub prep: StatePrep,
    pub method: Method,
}

impl SweepSpec {
    pub fn new(probe: Vec<f64>, axis: SecondAxis, prep: StatePrep, method: Method) -> Result<Self> {
        let s = Self {
            probe,
            axis,
            prep,
            method,
        };
        s.validate()?;
        Ok(s)
    }

    /// Steady-state linear response.
    pub fn linear(probe: Vec<f64>, axis: SecondAxis) -> Result<Self> {
        Self::new(probe, axis, StatePrep::Steady, Method::LinearResponse)
    }

    pub fn validate(&self) -> Result<()> {
        if self.probe.len() < 3 {
            return Err(ArmError::InvalidParameter(format!(
                "probe grid needs at least 3 points, got {}",
                self.probe.len()
            )));
        }
        if self.probe.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ArmError::InvalidParameter("probe frequencies must be positive".into()));
        }
        if self.probe.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ArmError::InvalidParameter("probe grid must be strictly increasing".into()));
        }
        match &self.axis {
            SecondAxis::None => {}
            SecondAxis::QubitFreq(v) | SecondAxis::Theta(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(ArmError::InvalidParameter("second axis must be non-empty and finite".into()));
                }
            }
        }
        if let Method::TimeDomain(opts) = &self.method {
            opts.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega_p: f64,
    pub axis_value: Option<f64>,
    pub amplitude: C64,
    /// `|A|` divided by the slice maximum.
    pub transmission: f64,
}

/// Grid-ordered sweep output: all probe points of the first axis value,
/// then the second, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub axis: SecondAxis,
    pub probe: Vec<f64>,
    pub points: Vec<SpectrumPoint>,
}

/// One fixed-axis cut through a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub axis_value: Option<f64>,
    pub omega_p: Vec<f64>,
    pub amplitude: Vec<C64>,
    pub transmission: Vec<f64>,
}

impl Slice {
    /// Slice from raw magnitudes, normalized to a unit maximum.
    pub fn from_magnitudes(omega_p: Vec<f64>, magnitude: Vec<f64>) -> Result<Self> {
        if omega_p.len() != magnitude.len() {
            return Err(ArmError::DimensionMismatch {
                expected: omega_p.len(),
                actual: magnitude.len(),
            });
        }
        let max = magnitude.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0 && max.is_finite()) {
            return Err(ArmError::MalformedSlice("no positive finite response".into()));
        }
        Ok(Self {
            axis_value: None,
            transmission: magnitude.iter().map(|m| m / max).collect(),
            amplitude: magnitude.iter().map(|&m| C64::new(m, 0.0)).collect(),
            omega_p,
        })
    }

    pub fn len(&self) -> usize {
        self.omega_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_p.is_empty()
    }
}

impl SpectrumResult {
    pub fn slices(&self) -> Vec<Slice> {
        if self.probe.is_empty() {
            return Vec::new();
        }
        self.points
            .chunks(self.probe.len())
            .map(|chunk| Slice {
                axis_value: chunk[0].axis_value,
                omega_p: chunk.iter().map(|p| p.omega_p).collect(),
                amplitude: chunk.iter().map(|p| p.amplitude).collect(),
                transmission: chunk.iter().map(|p| p.transmission).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainResult {
    /// Fourier amplitude of `<a>` at the probe frequency per unit `eps_p`,
    /// in the same phase convention as the linear response.
    pub amplitude: C64,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub accepted_steps: usize,
}

/// Everything needed to probe one parameter point: Hamiltonian, dissipators,
/// linearization state and a factorization-ready response solver.
pub struct ProbeSetup {
    params: ArmParams,
    hamiltonian: Operator,
    collapses: Vec<Collapse>,
    rho0: DensityMatrix,
    drive: Operator,
    observe: Operator,
    solver: ResponseSolver,
}

impl ProbeSetup {
    pub fn new(params: &ArmParams, prep: StatePrep) -> Result<Self> {
        let dims = params.dims();
        let ops = CompositeOps::new(dims);
        let h = build_hamiltonian(params)?;
        let mut collapses = vec![Collapse::new(ops.a.clone(), params.kappa)];
        if prep == StatePrep::Steady && params.gamma > 0.0 {
            collapses.push(Collapse::new(ops.sigma_minus.clone(), params.gamma));
        }
        let l = build_liouvillian_on(dims, &h, &collapses)?;
        let drive = drive_operator(dims);
        let (rho0, solver) = match prep {
            StatePrep::Steady => {
                let rho = steady_state(&l)?;
                let solver = ResponseSolver::new(l, &rho, &drive, &ops.a)?;
                (rho, solver)
            }
            StatePrep::Ground | StatePrep::Excited => {
                let q = usize::from(prep == StatePrep::Excited);
                let eig = hermitian_eigen(&h)?;
                let (k, _) = dressed_label(&eig, dims, q, 0)?;
                let rho = DensityMatrix::pure(dims, &eig.vector(k))?;
                let solver = ResponseSolver::new_frozen(l, &rho, &drive, &ops.a)?;
                (rho, solver)
            }
        };
        Ok(Self {
            params: *params,
            hamiltonian: h,
            collapses,
            rho0,
            drive,
            observe: ops.a,
            solver,
        })
    }

    pub fn params(&self) -> &ArmParams {
        &self.params
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn amplitude(&self, omega_p: f64) -> Result<C64> {
        self.solver.amplitude(omega_p)
    }

    /// Response over `probe`, normalized to its maximum.
    pub fn slice(&self, probe: &[f64]) -> Result<Slice> {
        let amplitude = probe.iter().map(|&w| self.amplitude(w)).collect::<Result<Vec<C64>>>()?;
        let max = amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if !(max > 0.0 && max.is_finite()) {
            return Err(ArmError::MalformedSlice("no positive finite response".into()));
        }
        Ok(Slice {
            axis_value: None,
            omega_p: probe.to_vec(),
            transmission: amplitude.iter().map(|a| a.norm() / max).collect(),
            amplitude,
        })
    }

    /// Golden-section maximization of `|A|` on `[lo, hi]`; returns the peak
    /// frequency and height.
    pub fn refine_peak(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo < hi) {
            return Err(ArmError::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
        }
        let tol = 1e-12 * hi.abs().max(1.0);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let f = |w: f64| self.amplitude(w).map(|a| a.norm());
        let (mut a, mut b) = (lo, hi);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        while b - a > tol {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d)?;
            }
        }
        Ok(if fc >= fd { (c, fc) } else { (d, fd) })
    }

    /// Integrate the driven master equation from the linearization state and
    /// Fourier-project `<a>` at the probe frequency after settling.
    pub fn time_domain_amplitude(&self, omega_p: f64, opts: &TimeDomainOptions) -> Result<TimeDomainResult> {
        opts.validate()?;
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(ArmError::InvalidParameter(format!("probe frequency must be positive, got {omega_p}")));
        }
        let settle = match opts.settle_ns {
            Some(s) => s,
            None if self.params.kappa > 0.0 => 40.0 / (PI * self.params.kappa),
            None => {
                return Err(ArmError::InvalidParameter(
                    "default settling time needs kappa > 0".into(),
                ))
            }
        };
        // a few checkpoints during settling so trace and positivity are watched there too
        let mut times: Vec<f64> = if settle > 0.0 {
            (0..16).map(|k| settle * k as f64 / 16.0).collect()
        } else {
            Vec::new()
        };
        let first_sample = times.len();
        let n = opts.periods * opts.samples_per_period;
        let dt = 1.0 / (omega_p * opts.samples_per_period as f64);
        times.extend((0..n).map(|k| settle + k as f64 * dt));

        let mut eo = EvolveOptions::new(times);
        eo.observables = vec![self.observe.clone()];
        eo.store_states = false;
        eo.initial_step = Some(dt);
        let drive = Drive {
            op: self.drive.clone(),
            eps: opts.eps_p,
            omega_p,
        };
        let traj = evolve_with(&self.hamiltonian, Some(&drive), &self.collapses, &self.rho0, &eo)?;
        let proj: C64 = traj.times[first_sample..]
            .iter()
            .zip(&traj.expectations[0][first_sample..])
            .map(|(&t, &x)| x * C64::from_polar(1.0, 2.0 * PI * omega_p * t))
            .sum::<C64>()
            / n as f64;
        Ok(TimeDomainResult {
            amplitude: -proj / opts.eps_p,
            max_trace_drift: traj.max_trace_drift,
            min_eigenvalue: traj.min_eigenvalue,
            accepted_steps: traj.accepted_steps,
        })
    }
}

fn at_point(index: usize, context: String) -> impl FnOnce(ArmError) -> ArmError {
    move |e| ArmError::AtGridPoint {
        index,
        context,
        source: Box::new(e),
    }
}

fn first_error<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

/// Probe response over the sweep grid, normalized per fixed-axis slice.
///
/// Grid points run in parallel on the current rayon pool; the output order
/// and any reported error are independent of scheduling.
pub fn transmission_map(params: &ArmParams, sweep: &SweepSpec) -> Result<SpectrumResult> {
    params.validate()?;
    sweep.validate()?;
    let axis_values = sweep.axis.values();
    let np = sweep.probe.len();
    let axis_label = sweep.axis.column_name().unwrap_or("axis");
    let context = |v: Option<f64>| match v {
        Some(x) => format!("{axis_label} = {x}"),
        None => "single slice".to_string(),
    };

    let setups = first_error(
        axis_values
            .par_iter()
            .enumerate()
            .map(|(s, &v)| {
                sweep
                    .axis
                    .apply(params, v)
                    .and_then(|p| ProbeSetup::new(&p, sweep.prep))
                    .map_err(at_point(s * np, context(v)))
            })
            .collect(),
    )?;

    let amplitudes = first_error(
        (0..axis_values.len() * np)
            .into_par_iter()
            .map(|idx| {
                let (s, k) = (idx / np, idx % np);
                let wp = sweep.probe[k];
                let setup = &setups[s];
                match &sweep.method {
                    Method::LinearResponse => setup.amplitude(wp),
                    Method::TimeDomain(opts) => setup.time_domain_amplitude(wp, opts).map(|r| r.amplitude),
                }
                .map_err(at_point(idx, format!("{}, omega_p = {wp}", context(axis_values[s]))))
            })
            .collect(),
    )?;

    let mut points = Vec::with_capacity(amplitudes.len());
    for (s, chunk) in amplitudes.chunks(np).enumerate() {
        let max = chunk.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if !(max > 0.0 && max.is_finite()) {
            return Err(at_point(s * np, context(axis_values[s]))(ArmError::MalformedSlice(
                "no positive finite response in slice".into(),
            )));
        }
        points.extend(chunk.iter().zip(&sweep.probe).map(|(&a, &wp)| SpectrumPoint {
            omega_p: wp,
            axis_value: axis_values[s],
            amplitude: a,
            transmission: a.norm() / max,
        }));
    }
    Ok(SpectrumResult {
        axis: sweep.axis.clone(),
        probe: sweep.probe.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn sweep_validation() {
        assert!(SweepSpec::linear(vec![4.9, 5.0], SecondAxis::None).is_err());
        assert!(SweepSpec::linear(vec![4.9, 5.0, 5.0], SecondAxis::None).is_err());
        assert!(SweepSpec::linear(vec![4.9, 5.0, 5.1], SecondAxis::Theta(vec![])).is_err());
        assert!(SweepSpec::new(
            vec![4.9, 5.0, 5.1],
            SecondAxis::None,
            StatePrep::Steady,
            Method::TimeDomain(TimeDomainOptions::new(0.0))
        )
        .is_err());
    }

    #[test]
    fn slices_normalize_to_unit_maximum() {
        let p = ArmParams::polar(5.0, 5.0, 0.1, 0.0, 1e-3, 0.0, 3).unwrap();
        let sweep = SweepSpec::linear(linspace(4.85, 5.15, 31), SecondAxis::Theta(vec![0.0, 0.5])).unwrap();
        let res = transmission_map(&p, &sweep).unwrap();
        assert_eq!(res.points.len(), 62);
        for slice in res.slices() {
            let max = slice.transmission.iter().cloned().fold(0.0, f64::max);
            assert!((max - 1.0).abs() < 1e-15);
            assert!(slice.transmission.iter().all(|t| (0.0..=1.0).contains(t)));
        }
        assert_eq!(res.points[31].axis_value, Some(0.5));
    }

    #[test]
    fn grid_point_errors_carry_context() {
        let p = ArmParams::polar(5.0, 5.0, 0.1, 0.0, 1e-3, 0.0, 3).unwrap();
        let sweep = SweepSpec::linear(vec![4.9, 5.0, 5.1], SecondAxis::QubitFreq(vec![5.0, -1.0])).unwrap();
        match transmission_map(&p, &sweep) {
            Err(ArmError::AtGridPoint { index, context, .. }) => {
                assert_eq!(index, 3);
                assert!(context.contains("omega_q_ghz = -1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ground_prep_matches_steady_for_jc() {
        // with pure JC coupling and no qubit decay the dressed ground state is the vacuum
        let p = ArmParams::polar(5.0, 6.0, 0.1, 0.0, 1e-3, 0.0, 3).unwrap();
        let g = ProbeSetup::new(&p, StatePrep::Ground).unwrap();
        let s = ProbeSetup::new(&p.with_rates(1e-3, 1e-5).unwrap(), StatePrep::Steady).unwrap();
        for wp in [4.98, 4.99, 5.0] {
            let (a, b) = (g.amplitude(wp).unwrap(), s.amplitude(wp).unwrap());
            assert!((a - b).norm() / a.norm() < 1e-2);
        }
    }

    #[test]
    fn golden_section_finds_bare_resonance() {
        let p = ArmParams::polar(5.0, 7.0, 0.0, 0.0, 1e-3, 1e-4, 2).unwrap();
        let setup = ProbeSetup::new(&p, StatePrep::Steady).unwrap();
        let (w, h) = setup.refine_peak(4.99, 5.02).unwrap();
        assert!((w - 5.0).abs() < 1e-9, "{w}");
        assert!((h - 2.0 / 1e-3).abs() / h < 1e-6);
    }
}
