use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::sweep::{ProbeSetup, StatePrep};
use crate::arm_model::{build_hamiltonian, ArmParams};
use crate::error::{ArmError, Result};
use crate::linalg::{hermitian_eigen, HermitianEigen};
use crate::operators::HilbertDims;

/// Minimum `|<q,n|psi>|^2` for a dressed state to inherit the bare label.
pub const LABEL_OVERLAP_MIN: f64 = 0.7;

/// Truncation floor for the diagonalization oracle.
pub const CHI_MIN_N_MAX: usize = 20;

/// Bracket width and residual accepted by the sweet-spot search.
const SWEET_SPOT_THETA_TOL: f64 = 1e-10;
const SWEET_SPOT_CHI_TOL: f64 = 1e-6;
const SWEET_SPOT_SCAN_POINTS: usize = 33;

/// Closed-form dispersive shifts (GHz), with the oracle value when computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveReport {
    /// `g_jc^2 / delta`.
    pub chi_jc: f64,
    /// `-g_ajc^2 / sigma`.
    pub chi_ajc: f64,
    /// `chi_jc + chi_ajc`.
    pub chi_rabi: f64,
    pub chi_numeric: Option<f64>,
    pub delta: f64,
    pub sigma: f64,
    pub theta: f64,
}

pub fn dispersive_formulas(params: &ArmParams) -> Result<DispersiveReport> {
    params.validate()?;
    let det = params.detunings();
    if det.delta == 0.0 {
        return Err(ArmError::ZeroDetuning);
    }
    let (g_jc, g_ajc) = params.coupling.jc_ajc();
    let (_, theta) = params.coupling.polar();
    if g_jc.abs() > det.delta.abs() / 5.0 {
        log::warn!(
            "g_jc = {g_jc} GHz is not small against |delta| = {} GHz; dispersive formulas are unreliable",
            det.delta.abs()
        );
    }
    let chi_jc = g_jc * g_jc / det.delta;
    let chi_ajc = -g_ajc * g_ajc / det.sigma;
    Ok(DispersiveReport {
        chi_jc,
        chi_ajc,
        chi_rabi: chi_jc + chi_ajc,
        chi_numeric: None,
        delta: det.delta,
        sigma: det.sigma,
        theta,
    })
}

/// Eigenvector index with the largest weight on bare `|q, n>`, and that weight.
pub fn dressed_label(eig: &HermitianEigen, dims: HilbertDims, q: usize, n: usize) -> Result<(usize, f64)> {
    let row = dims.index(q, n);
    let (k, overlap) = (0..eig.values.len())
        .map(|k| (k, eig.vectors[(row, k)].norm_sqr()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if overlap < LABEL_OVERLAP_MIN {
        return Err(ArmError::AmbiguousLabel {
            label: format!("{},{n}", if q == 0 { 'g' } else { 'e' }),
            overlap,
        });
    }
    Ok((k, overlap))
}

/// Dispersive shift from exact diagonalization at the truncation given in
/// `params`: `chi = ((E_e1 - E_e0) - (E_g1 - E_g0)) / 2`.
pub fn chi_numeric_at(params: &ArmParams) -> Result<f64> {
    params.validate()?;
    let (g, _) = params.coupling.polar();
    let delta = params.detunings().delta;
    if delta.abs() <= 5.0 * g {
        log::warn!("|delta| = {} GHz is within 5 g of resonance; dressed labels may be ambiguous", delta.abs());
    }
    let dims = params.dims();
    let eig = hermitian_eigen(&build_hamiltonian(params)?)?;
    let energy = |q, n| dressed_label(&eig, dims, q, n).map(|(k, _)| eig.values[k]);
    let (g0, g1) = (energy(0, 0)?, energy(0, 1)?);
    let (e0, e1) = (energy(1, 0)?, energy(1, 1)?);
    Ok(0.5 * ((e1 - e0) - (g1 - g0)))
}

/// [`chi_numeric_at`] with the truncation raised to at least
/// [`CHI_MIN_N_MAX`].
pub fn chi_numeric(params: &ArmParams) -> Result<f64> {
    chi_numeric_at(&params.with_n_max(params.n_max.max(CHI_MIN_N_MAX))?)
}

/// Root of the closed form `g^2 cos^2 t / delta - g^2 sin^2 t / sigma` in
/// `[0, pi/2]`, which exists only for `delta > 0`.
pub fn closed_form_sweet_spot(params: &ArmParams) -> Option<f64> {
    let det = params.detunings();
    (det.delta > 0.0).then(|| (det.sigma / det.delta).sqrt().atan())
}

/// Mixing angle in `theta_range` where the numerically exact dispersive
/// shift vanishes, or `None` if it keeps one sign over the range.
pub fn sweet_spot(params: &ArmParams, theta_range: (f64, f64)) -> Result<Option<f64>> {
    let (g, _) = params.coupling.polar();
    if !(g > 0.0) {
        return Err(ArmError::InvalidParameter(
            "sweet-spot search needs g > 0 (the shift vanishes identically at g = 0)".into(),
        ));
    }
    let (lo, hi) = theta_range;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(ArmError::InvalidParameter(format!("bad theta range [{lo}, {hi}]")));
    }
    let chi = |t: f64| params.with_theta(t).and_then(|p| chi_numeric(&p));
    let thetas: Vec<f64> = (0..SWEET_SPOT_SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (SWEET_SPOT_SCAN_POINTS - 1) as f64)
        .collect();
    let values = thetas.par_iter().map(|&t| chi(t)).collect::<Vec<_>>();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;

    let Some(k) = (0..thetas.len() - 1).find(|&k| values[k] == 0.0 || values[k] * values[k + 1] < 0.0) else {
        return Ok(values.last().filter(|v| **v == 0.0).map(|_| hi));
    };
    if values[k] == 0.0 {
        return Ok(Some(thetas[k]));
    }
    let (mut a, mut b, mut fa) = (thetas[k], thetas[k + 1], values[k]);
    while b - a > SWEET_SPOT_THETA_TOL {
        let m = 0.5 * (a + b);
        let fm = chi(m)?;
        if fm == 0.0 {
            return Ok(Some(m));
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let root = 0.5 * (a + b);
    let residual = chi(root)?;
    if residual.abs() >= SWEET_SPOT_CHI_TOL {
        return Err(ArmError::InvalidParameter(format!(
            "sign change near theta = {root} but |chi| = {residual:e} GHz there"
        )));
    }
    Ok(Some(root))
}

/// Default theta range for [`sweet_spot`].
pub const SWEET_SPOT_RANGE: (f64, f64) = (0.0, FRAC_PI_2);

/// Resonator peak positions with the qubit pinned in its dressed ground and
/// excited states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutPeaks {
    pub ground: f64,
    pub excited: f64,
}

impl ReadoutPeaks {
    pub fn contrast(&self) -> f64 {
        self.excited - self.ground
    }
}

/// Locate the resonator-like transmission peak for both qubit states.
///
/// The search window is centered on `omega_r` with half-width
/// `10 kappa + 4 |chi|`, sampled on 801 points and refined by golden section.
pub fn readout_peaks(params: &ArmParams) -> Result<ReadoutPeaks> {
    if !(params.kappa > 0.0) {
        return Err(ArmError::InvalidParameter("readout peaks need kappa > 0".into()));
    }
    let chi = chi_numeric(params)?;
    let half = 10.0 * params.kappa + 4.0 * chi.abs();
    let n = 801;
    let grid: Vec<f64> = (0..n)
        .map(|k| params.omega_r - half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect();
    let step = grid[1] - grid[0];
    let peak = |prep| -> Result<f64> {
        let setup = ProbeSetup::new(params, prep)?;
        let mags = grid
            .iter()
            .map(|&w| setup.amplitude(w).map(|a| a.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let k = (0..n).fold(0, |best, i| if mags[i] > mags[best] { i } else { best });
        Ok(setup.refine_peak(grid[k] - step, grid[k] + step)?.0)
    };
    let (ground, excited) = rayon::join(|| peak(StatePrep::Ground), || peak(StatePrep::Excited));
    Ok(ReadoutPeaks {
        ground: ground?,
        excited: excited?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(omega_q: f64, g: f64, theta: f64) -> ArmParams {
        ArmParams::polar(5.0, omega_q, g, theta, 1e-3, 0.0, 10).unwrap()
    }

    #[test]
    fn closed_forms() {
        let r = dispersive_formulas(&params(8.0, 0.1, 0.0)).unwrap();
        assert!((r.chi_jc - 0.01 / 3.0).abs() < 1e-15);
        assert!(r.chi_ajc.abs() < 1e-20);
        let r = dispersive_formulas(&params(8.0, 0.1, PI / 2.0)).unwrap();
        assert!((r.chi_ajc + 0.01 / 13.0).abs() < 1e-15);
        assert_eq!(r.chi_rabi, r.chi_jc + r.chi_ajc);
        let r = dispersive_formulas(&params(8.0, 0.0, 0.3)).unwrap();
        assert_eq!((r.chi_jc, r.chi_ajc, r.chi_rabi), (0.0, 0.0, 0.0));
        assert_eq!(dispersive_formulas(&params(5.0, 0.1, 0.0)), Err(ArmError::ZeroDetuning));
    }

    #[test]
    fn numeric_jc_shift_agrees_with_formula() {
        let (wr, wq, g) = (5.0, 8.0, 0.1);
        let chi = chi_numeric(&params(wq, g, 0.0)).unwrap();
        // pure JC splits into 2x2 blocks {|e,m-1>, |g,m>}
        let delta: f64 = wq - wr;
        let root = |m: f64| (0.25 * delta * delta + g * g * m).sqrt();
        let centre = |m: f64| (m - 0.5) * wr;
        let (e0, g1) = (centre(1.0) + root(1.0), centre(1.0) - root(1.0));
        let (e1, g0) = (centre(2.0) + root(2.0), -0.5 * wq);
        let exact = 0.5 * ((e1 - e0) - (g1 - g0));
        assert!((chi - exact).abs() < 1e-12, "{chi} vs {exact}");
        // leading correction is -2 g^4 / delta^3
        assert!((chi - (g * g / delta - 2.0 * g.powi(4) / delta.powi(3))).abs() < 1e-7);
        assert!((chi - g * g / delta).abs() <= 10.0 * g.powi(4) / delta.powi(3));
    }

    #[test]
    fn numeric_ajc_shift_is_positive() {
        // counter-rotating terms push |g,0> down and |e,1> up by g^2/sigma
        let chi = chi_numeric(&params(8.0, 0.1, PI / 2.0)).unwrap();
        assert!((chi - 0.01 / 13.0).abs() < 1e-2 * 0.01 / 13.0, "{chi}");
    }

    #[test]
    fn uncoupled_shift_vanishes() {
        assert!(chi_numeric(&params(8.0, 0.0, 0.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn labels_fail_on_resonance() {
        assert!(matches!(
            chi_numeric(&params(5.0, 0.1, 0.0)),
            Err(ArmError::AmbiguousLabel { .. })
        ));
    }

    #[test]
    fn sweet_spot_only_below_resonator() {
        assert_eq!(sweet_spot(&params(8.0, 0.1, 0.0), SWEET_SPOT_RANGE).unwrap(), None);
        let p = params(2.0, 0.1, 0.0);
        let t0 = sweet_spot(&p, SWEET_SPOT_RANGE).unwrap().unwrap();
        // second-order estimate: tan^2 t0 = sigma / |delta|
        assert!((t0 - (7.0f64 / 3.0).sqrt().atan()).abs() < 2e-2, "{t0}");
        assert!(chi_numeric(&p.with_theta(t0).unwrap()).unwrap().abs() < 1e-6);
        assert!(sweet_spot(&params(2.0, 0.0, 0.0), SWEET_SPOT_RANGE).is_err());
    }

    #[test]
    fn closed_form_root() {
        let t0 = closed_form_sweet_spot(&params(8.0, 0.1, 0.0)).unwrap();
        assert!((t0.tan() - (13.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((t0 - 1.123).abs() < 1e-3);
        assert_eq!(closed_form_sweet_spot(&params(2.0, 0.1, 0.0)), None);
    }

    #[test]
    fn readout_contrast_is_twice_chi() {
        let p = params(8.0, 0.1, 0.0);
        let peaks = readout_peaks(&p).unwrap();
        let chi = chi_numeric(&p).unwrap();
        assert!((peaks.contrast() - 2.0 * chi).abs() < 0.1 * 2.0 * chi, "{peaks:?} {chi}");
    }
}
