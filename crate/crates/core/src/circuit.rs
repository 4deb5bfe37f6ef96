//! Closed-form circuit quantization: from transmission-line and qubit circuit
//! constants to `(omega_r, omega_q, g_C, g_L)`.
//!
//! The resonator is an open-ended line on `[-l/2, l/2]` expanded in the
//! normalized modes `f_n`, so each mode coordinate carries the per-length
//! constants `C'` and `L'` directly. Fluxes inside the energy coefficients
//! are reduced (`2 pi Phi / Phi_0`) and all energies are reported as `E / h`
//! in GHz.

use std::f64::consts::PI;

use crate::arm_model::{ArmParams, Coupling};
use crate::error::{ArmError, Result};

/// CODATA exact SI constants and the derived quantities used here.
pub mod constants {
    /// Elementary charge (C).
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    /// Planck constant (J s).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant (J s).
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    /// Magnetic flux quantum `h / 2e` (Wb).
    pub const PHI0: f64 = PLANCK / (2.0 * E_CHARGE);
    /// Reduced flux quantum `Phi_0 / 2 pi` (Wb).
    pub const PHI0_REDUCED: f64 = PHI0 / (2.0 * std::f64::consts::PI);
    /// Joules per GHz of `E / h`.
    pub const JOULE_PER_GHZ: f64 = PLANCK * 1e9;
}

use constants::{E_CHARGE, JOULE_PER_GHZ, PHI0_REDUCED};

/// Raw circuit constants, SI units unless noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// `C'` (F/m).
    pub c_per_len: f64,
    /// `L'` (H/m).
    pub l_per_len: f64,
    /// Resonator length `l` (m).
    pub length: f64,
    /// Coupling capacitance (F).
    pub c_g: f64,
    /// Qubit capacitance (F).
    pub c_q: f64,
    /// Qubit shunt inductance (H).
    pub l_q: f64,
    /// Josephson energy, `E_J / h` in GHz.
    pub e_j: f64,
    /// Critical current (A).
    pub i_c: f64,
    /// Mutual inductance (H), signed.
    pub m: f64,
    /// Capacitive tap position (m).
    pub x_c: f64,
    /// Inductive tap position (m).
    pub x_m: f64,
    /// External flux in units of `Phi_0`.
    pub phi_ext: f64,
    /// Resonator mode index, 1 for the fundamental.
    pub mode_index: u32,
}

impl CircuitParams {
    /// A 5 GHz half-wave line with a flux-biased inductively shunted qubit
    /// near 5.5 GHz. Taps sit at the line centre (inductive) and the right
    /// end (capacitive).
    pub fn example_device() -> Self {
        let c_per_len: f64 = 1.6e-10;
        let l_per_len = 4.2e-7;
        let v_p = 1.0 / (l_per_len * c_per_len).sqrt();
        let length = v_p / (2.0 * 5.0e9);
        let e_j = 15.0;
        Self {
            c_per_len,
            l_per_len,
            length,
            c_g: 5e-15,
            c_q: 80e-15,
            l_q: 100e-9,
            e_j,
            i_c: 2.0 * E_CHARGE * e_j * JOULE_PER_GHZ / constants::HBAR,
            m: 20e-12,
            x_c: length / 2.0,
            x_m: 0.0,
            phi_ext: 0.0,
            mode_index: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_per_len", self.c_per_len),
            ("l_per_len", self.l_per_len),
            ("length", self.length),
            ("c_q", self.c_q),
            ("l_q", self.l_q),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ArmError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [("c_g", self.c_g), ("e_j", self.e_j), ("i_c", self.i_c)];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ArmError::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !self.m.is_finite() || !self.phi_ext.is_finite() {
            return Err(ArmError::InvalidParameter("m and phi_ext must be finite".into()));
        }
        if self.mode_index < 1 {
            return Err(ArmError::InvalidParameter("mode_index must be >= 1".into()));
        }
        for (name, x) in [("x_c", self.x_c), ("x_m", self.x_m)] {
            check_position(name, x, self.length)?;
        }
        Ok(())
    }

    /// Mode wavenumber `k_r = r pi / l` (1/m).
    pub fn wavenumber(&self) -> f64 {
        self.mode_index as f64 * PI / self.length
    }

    /// Phase velocity `1 / sqrt(L' C')` (m/s).
    pub fn phase_velocity(&self) -> f64 {
        1.0 / (self.l_per_len * self.c_per_len).sqrt()
    }
}

fn check_position(name: &str, x: f64, length: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > 0.5 * length {
        return Err(ArmError::InvalidParameter(format!(
            "{name} = {x} m lies outside the resonator [-{h}, {h}]",
            h = 0.5 * length
        )));
    }
    Ok(())
}

/// `sin(pi t)` and `cos(pi t)` with exact zeros and unit values at
/// half-integers, odd and even in `t` respectively.
fn sin_cos_pi(t: f64) -> (f64, f64) {
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let t = t.abs();
    let quadrant = (2.0 * t).round();
    let rest = t - 0.5 * quadrant;
    let (s, c) = (PI * rest).sin_cos();
    let (s, c) = match (quadrant as u64) % 4 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    };
    (sign * s, c)
}

fn mode_parts(n: u32, length: f64, x: f64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(ArmError::InvalidParameter("mode index must be >= 1".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(ArmError::InvalidParameter(format!("length must be positive, got {length}")));
    }
    check_position("x", x, length)?;
    let norm = (2.0 / length).sqrt();
    let k = n as f64 * PI / length;
    let (s, c) = sin_cos_pi(n as f64 * x / length);
    Ok(if n % 2 == 1 {
        (norm * s, norm * k * c)
    } else {
        (norm * c, -norm * k * s)
    })
}

/// Normalized resonator mode `f_n(x)` in 1/sqrt(m): `sqrt(2/l) sin(n pi x / l)`
/// for odd `n`, `sqrt(2/l) cos(n pi x / l)` for even `n`.
pub fn mode_function(n: u32, length: f64, x: f64) -> Result<f64> {
    mode_parts(n, length, x).map(|(f, _)| f)
}

/// Spatial derivative `d f_n / dx` in m^(-3/2).
pub fn mode_derivative(n: u32, length: f64, x: f64) -> Result<f64> {
    mode_parts(n, length, x).map(|(_, d)| d)
}

/// Energy scales of the coupled circuit. `E_*` are `E / h` in GHz; the
/// resonator entries are per mode coordinate and so carry length units
/// folded into them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCoefficients {
    pub e_cq: f64,
    pub e_cr: f64,
    pub e_cqr: f64,
    pub e_lr: f64,
    pub e_lq: f64,
    /// Resonator mode capacitance (F/m).
    pub c_0: f64,
    /// Resonator mode inductance (H/m).
    pub l_0: f64,
}

pub fn charging_energies(p: &CircuitParams) -> Result<EnergyCoefficients> {
    p.validate()?;
    let f = mode_function(p.mode_index, p.length, p.x_c)?;
    let c_0 = p.c_per_len;
    let l_0 = p.l_per_len;
    let c_sigma = p.c_g + p.c_q;
    let f2 = f * f;
    let denom = f2 * p.c_g * p.c_q + c_0 * c_sigma;
    let pref = 0.5 * E_CHARGE * E_CHARGE / JOULE_PER_GHZ;

    let e_cq = pref * (f2 * f2 * p.c_g * p.c_g * p.c_q + 2.0 * c_0 * f2 * p.c_g * c_sigma + c_0 * c_0 * c_sigma)
        / (denom * denom);
    let e_cr = pref * c_sigma * (f2 * p.c_g * p.c_q + 2.0 * c_0 * c_sigma) / (2.0 * denom * denom);
    let e_cqr = pref * p.c_g * (f2 * p.c_g * p.c_q + 2.0 * c_0 * c_sigma) / (denom * denom);
    let flux2 = PHI0_REDUCED * PHI0_REDUCED / JOULE_PER_GHZ;
    Ok(EnergyCoefficients {
        e_cq,
        e_cr,
        e_cqr,
        e_lr: flux2 / (2.0 * l_0),
        e_lq: flux2 / (2.0 * p.l_q),
        c_0,
        l_0,
    })
}

/// Resonator and qubit frequencies with the two coupling strengths (GHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedModel {
    pub omega_r: f64,
    pub omega_q: f64,
    pub g_c: f64,
    pub g_l: f64,
}

impl DerivedModel {
    pub fn coupling(&self) -> Coupling {
        Coupling::CL {
            g_c: self.g_c,
            g_l: self.g_l,
        }
    }

    pub fn to_arm_params(&self, kappa: f64, gamma: f64, n_max: usize) -> Result<ArmParams> {
        ArmParams::new(self.omega_r, self.omega_q, self.coupling(), kappa, gamma, n_max)
    }
}

/// Inductive energy of the qubit after expanding the flux-biased Josephson
/// term to second order, `E_Lq + E_J cos(2 pi phi_ext) / 2`.
pub fn effective_qubit_inductive_energy(p: &CircuitParams, e: &EnergyCoefficients) -> Result<f64> {
    let (_, cos_bias) = sin_cos_pi(2.0 * p.phi_ext);
    let e_l = e.e_lq + 0.5 * p.e_j * cos_bias;
    if e_l <= 0.0 {
        return Err(ArmError::InvalidParameter(format!(
            "effective qubit inductive energy {e_l} GHz is not positive at phi_ext = {}",
            p.phi_ext
        )));
    }
    Ok(e_l)
}

pub fn derive_model(p: &CircuitParams) -> Result<DerivedModel> {
    let e = charging_energies(p)?;
    let k = p.wavenumber();
    let e_lq = effective_qubit_inductive_energy(p, &e)?;
    let f_c = mode_function(p.mode_index, p.length, p.x_c)?;
    let df_m = mode_derivative(p.mode_index, p.length, p.x_m)?;

    let omega_r = 4.0 * k * (e.e_cr * e.e_lr).sqrt();
    let omega_q = 4.0 * (e.e_cq * e_lq).sqrt();

    let g_c = 8.0 * e.e_cqr * f_c * (e_lq / (16.0 * e.e_cq) * k * k * e.e_lr / (16.0 * e.e_cr)).powf(0.25);

    // Reduced zero-point fluxes of both modes; the resonator one is turned
    // back into Wb sqrt(m) to meet the physical current I_c.
    let phi_q = (e.e_cq / e_lq).powf(0.25);
    let phi_r = PHI0_REDUCED * (e.e_cr / (k * k * e.e_lr)).powf(0.25);
    let g_l = p.m * p.i_c * df_m / e.l_0 * phi_q * phi_r / JOULE_PER_GHZ;

    Ok(DerivedModel {
        omega_r,
        omega_q,
        g_c,
        g_l,
    })
}

/// Adjust `C_g` and `M` of `template` so that the derived couplings hit the
/// `(g_C, g_L)` of `target`.
///
/// `g_C` is bracketed by doubling `C_g` and then bisected; `g_L` is exactly
/// linear in `M` at fixed `C_g`, so `M` follows from one evaluation.
pub fn solve_for_targets(target: &ArmParams, template: &CircuitParams) -> Result<CircuitParams> {
    let (g_c_target, g_l_target) = target.coupling.cl();
    solve_for_couplings(g_c_target, g_l_target, template)
}

pub fn solve_for_couplings(g_c_target: f64, g_l_target: f64, template: &CircuitParams) -> Result<CircuitParams> {
    template.validate()?;
    let mut p = *template;

    p.c_g = solve_c_g(g_c_target, template)?;

    let mut unit = p;
    unit.m = 1.0;
    let per_henry = derive_model(&unit)?.g_l;
    p.m = if g_l_target == 0.0 {
        0.0
    } else if per_henry == 0.0 {
        return Err(ArmError::Unreachable(format!(
            "g_L = {g_l_target} GHz requested but the inductive tap sits at a current node"
        )));
    } else {
        g_l_target / per_henry
    };
    Ok(p)
}

fn solve_c_g(target: f64, template: &CircuitParams) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    let f_c = mode_function(template.mode_index, template.length, template.x_c)?;
    if f_c == 0.0 || f_c.signum() != target.signum() {
        return Err(ArmError::Unreachable(format!(
            "g_C = {target} GHz has the wrong sign for the capacitive tap at x_C = {} m",
            template.x_c
        )));
    }
    let g_c_at = |c_g: f64| -> Result<f64> {
        let mut q = *template;
        q.c_g = c_g;
        Ok(derive_model(&q)?.g_c.abs())
    };
    let goal = target.abs();
    let mut lo = 0.0;
    let mut hi = template.c_g.max(1e-18);
    let mut g_hi = g_c_at(hi)?;
    let mut doublings = 0;
    while g_hi < goal {
        if doublings > 200 {
            return Err(ArmError::Unreachable(format!("g_C = {target} GHz beyond any C_g")));
        }
        let next = 2.0 * hi;
        let g_next = g_c_at(next)?;
        if g_next <= g_hi {
            return Err(ArmError::Unreachable(format!(
                "g_C = {target} GHz exceeds the maximum {g_hi} GHz reachable through C_g"
            )));
        }
        lo = hi;
        hi = next;
        g_hi = g_next;
        doublings += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_c_at(mid)? < goal {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
