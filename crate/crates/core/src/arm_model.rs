//! Anisotropic Rabi model Hamiltonian and its coupling parameterizations.
//!
//! All frequencies are linear frequencies in GHz. The Hamiltonian is
//!
//! ```text
//! H = w_r a^dag a - (w_q/2) sz + g cos(th) (a^dag s- + a s+) + g sin(th) (a^dag s+ + a s-)
//! ```
//!
//! Couplings can be given as capacitive/inductive strengths `(g_C, g_L)`, as
//! channel strengths `(g_JC, g_AJC)` or in polar form `(g, theta)`.

use std::f64::consts::PI;

use crate::error::{ArmError, Result};
use crate::operators::{CompositeOps, HilbertDims, Operator, C64, I};

/// One of the three equivalent coupling parameterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Capacitive and inductive strengths (GHz).
    CL { g_c: f64, g_l: f64 },
    /// Excitation-conserving and counter-rotating channel strengths (GHz).
    JcAjc { g_jc: f64, g_ajc: f64 },
    /// Total strength (GHz) and mixing angle (rad).
    Polar { g: f64, theta: f64 },
}

impl Coupling {
    pub fn jc_ajc(&self) -> (f64, f64) {
        match *self {
            Coupling::CL { g_c, g_l } => to_jc_ajc(g_c, g_l),
            Coupling::JcAjc { g_jc, g_ajc } => (g_jc, g_ajc),
            Coupling::Polar { g, theta } => from_polar(g, theta),
        }
    }

    pub fn polar(&self) -> (f64, f64) {
        match *self {
            Coupling::Polar { g, theta } => (g, theta),
            _ => {
                let (jc, ajc) = self.jc_ajc();
                to_polar(jc, ajc)
            }
        }
    }

    pub fn cl(&self) -> (f64, f64) {
        match *self {
            Coupling::CL { g_c, g_l } => (g_c, g_l),
            _ => {
                let (jc, ajc) = self.jc_ajc();
                to_cl(jc, ajc)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ArmError::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match *self {
            Coupling::CL { g_c, g_l } => {
                finite(g_c, "g_C")?;
                finite(g_l, "g_L")
            }
            Coupling::JcAjc { g_jc, g_ajc } => {
                finite(g_jc, "g_JC")?;
                finite(g_ajc, "g_AJC")
            }
            Coupling::Polar { g, theta } => {
                finite(g, "g")?;
                finite(theta, "theta")?;
                if g < 0.0 {
                    return Err(ArmError::InvalidParameter(format!("g must be >= 0, got {g}")));
                }
                if theta.abs() > PI {
                    return Err(ArmError::InvalidParameter(format!(
                        "theta must lie in [-pi, pi], got {theta}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `g_JC = g_C + g_L`, `g_AJC = g_C - g_L`.
pub fn to_jc_ajc(g_c: f64, g_l: f64) -> (f64, f64) {
    (g_c + g_l, g_c - g_l)
}

/// Inverse of [`to_jc_ajc`].
pub fn to_cl(g_jc: f64, g_ajc: f64) -> (f64, f64) {
    (0.5 * (g_jc + g_ajc), 0.5 * (g_jc - g_ajc))
}

/// `g = hypot(g_JC, g_AJC)`, `theta = atan2(g_AJC, g_JC)`.
pub fn to_polar(g_jc: f64, g_ajc: f64) -> (f64, f64) {
    (g_jc.hypot(g_ajc), g_ajc.atan2(g_jc))
}

/// Inverse of [`to_polar`].
pub fn from_polar(g: f64, theta: f64) -> (f64, f64) {
    (g * theta.cos(), g * theta.sin())
}

/// Physical model parameters. Construct through [`ArmParams::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmParams {
    pub omega_r: f64,
    pub omega_q: f64,
    pub coupling: Coupling,
    pub kappa: f64,
    pub gamma: f64,
    pub n_max: usize,
}

/// `delta = w_q - w_r`, `sigma = w_q + w_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedDetunings {
    pub delta: f64,
    pub sigma: f64,
}

impl ArmParams {
    pub fn new(
        omega_r: f64,
        omega_q: f64,
        coupling: Coupling,
        kappa: f64,
        gamma: f64,
        n_max: usize,
    ) -> Result<Self> {
        let p = Self {
            omega_r,
            omega_q,
            coupling,
            kappa,
            gamma,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Polar-coupling shorthand.
    pub fn polar(
        omega_r: f64,
        omega_q: f64,
        g: f64,
        theta: f64,
        kappa: f64,
        gamma: f64,
        n_max: usize,
    ) -> Result<Self> {
        Self::new(omega_r, omega_q, Coupling::Polar { g, theta }, kappa, gamma, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        HilbertDims::new(self.n_max)?;
        if !(self.omega_r.is_finite() && self.omega_r > 0.0) {
            return Err(ArmError::InvalidParameter(format!(
                "omega_r must be positive, got {}",
                self.omega_r
            )));
        }
        if !(self.omega_q.is_finite() && self.omega_q > 0.0) {
            return Err(ArmError::InvalidParameter(format!(
                "omega_q must be positive, got {}",
                self.omega_q
            )));
        }
        for (name, rate) in [("kappa", self.kappa), ("gamma", self.gamma)] {
            if !rate.is_finite() {
                return Err(ArmError::InvalidParameter(format!("{name} must be finite")));
            }
            if rate < 0.0 {
                return Err(ArmError::NegativeRate(rate));
            }
        }
        self.coupling.validate()
    }

    pub fn dims(&self) -> HilbertDims {
        HilbertDims::new(self.n_max).expect("validated on construction")
    }

    pub fn detunings(&self) -> DerivedDetunings {
        DerivedDetunings {
            delta: self.omega_q - self.omega_r,
            sigma: self.omega_q + self.omega_r,
        }
    }

    pub fn with_omega_q(&self, omega_q: f64) -> Result<Self> {
        Self::new(self.omega_r, omega_q, self.coupling, self.kappa, self.gamma, self.n_max)
    }

    /// Replace the mixing angle, keeping the total coupling `g`.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let (g, _) = self.coupling.polar();
        Self::new(
            self.omega_r,
            self.omega_q,
            Coupling::Polar { g, theta },
            self.kappa,
            self.gamma,
            self.n_max,
        )
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Result<Self> {
        Self::new(self.omega_r, self.omega_q, coupling, self.kappa, self.gamma, self.n_max)
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Self::new(self.omega_r, self.omega_q, self.coupling, self.kappa, self.gamma, n_max)
    }

    pub fn with_rates(&self, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(self.omega_r, self.omega_q, self.coupling, kappa, gamma, self.n_max)
    }
}

fn bare_part(ops: &CompositeOps, omega_r: f64, omega_q: f64) -> Operator {
    &ops.n_photon.scale_real(omega_r) - &ops.sigma_z.scale_real(0.5 * omega_q)
}

/// `a^dag s- + a s+`.
pub fn jc_term(ops: &CompositeOps) -> Operator {
    &ops.a_dag * &ops.sigma_minus + &ops.a * &ops.sigma_plus
}

/// `a^dag s+ + a s-`.
pub fn ajc_term(ops: &CompositeOps) -> Operator {
    &ops.a_dag * &ops.sigma_plus + &ops.a * &ops.sigma_minus
}

/// Interaction part `g cos(th) JC + g sin(th) AJC` of the Hamiltonian.
pub fn build_interaction(dims: HilbertDims, g: f64, theta: f64) -> Operator {
    let ops = CompositeOps::new(dims);
    let (jc, ajc) = from_polar(g, theta);
    jc_term(&ops).scale_real(jc) + ajc_term(&ops).scale_real(ajc)
}

/// The model Hamiltonian, using the polar form of whichever coupling
/// representation `params` carries.
pub fn build_hamiltonian(params: &ArmParams) -> Result<Operator> {
    params.validate()?;
    let dims = params.dims();
    let ops = CompositeOps::new(dims);
    let (g, theta) = params.coupling.polar();
    let (jc, ajc) = from_polar(g, theta);
    let h = bare_part(&ops, params.omega_r, params.omega_q)
        + jc_term(&ops).scale_real(jc)
        + ajc_term(&ops).scale_real(ajc);
    Ok(h)
}

/// The Hamiltonian in the capacitive/inductive form
/// `w_r a^dag a - (w_q/2) sz + i g_C (a - a^dag) Y + g_L (a + a^dag) sx`.
///
/// `Y = -sy`, which is the two-level image of the qubit charge operator
/// `i(b^dag - b)`. With this phase the excitation-conserving channel carries
/// exactly `g_C + g_L` while the counter-rotating channel carries
/// `g_L - g_C`, so the result equals `build_hamiltonian` at `(g, -theta)`
/// and is unitarily equivalent to it at `(g, theta)`; see [`ajc_gauge`].
pub fn build_from_cl(params: &ArmParams) -> Result<Operator> {
    params.validate()?;
    let Coupling::CL { g_c, g_l } = params.coupling else {
        return Err(ArmError::InvalidParameter(
            "build_from_cl requires the CL coupling representation".into(),
        ));
    };
    let ops = CompositeOps::new(params.dims());
    let y = ops.sigma_y.scale_real(-1.0);
    let cap = (&(&ops.a - &ops.a_dag) * &y).scale(I * g_c);
    let ind = (&(&ops.a + &ops.a_dag) * &ops.sigma_x).scale_real(g_l);
    Ok(bare_part(&ops, params.omega_r, params.omega_q) + cap + ind)
}

/// Diagonal unitary `exp(i pi/2 (a^dag a + s+ s-))`.
///
/// Conjugation `U H U^dag` maps `a -> -i a` and `s+ -> i s+`, leaving the
/// excitation-conserving term invariant and flipping the sign of the
/// counter-rotating term.
pub fn ajc_gauge(dims: HilbertDims) -> Operator {
    let n = dims.total_dim();
    Operator::from_fn(n, |(i, j)| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let (q, f) = dims.split(i);
        match (q + f) % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    })
}

/// Probe coupling operator `a + a^dag`; the drive term is
/// `2 eps_p (a + a^dag) cos(2 pi w_p t)`.
pub fn drive_operator(dims: HilbertDims) -> Operator {
    let ops = CompositeOps::new(dims);
    &ops.a + &ops.a_dag
}

/// Total excitation number `a^dag a + s+ s-` of each basis state.
pub fn excitation_numbers(dims: HilbertDims) -> Vec<usize> {
    (0..dims.total_dim())
        .map(|i| {
            let (q, f) = dims.split(i);
            q + f
        })
        .collect()
}

/// Split an interaction into its excitation-conserving part and the rest.
///
/// Entry `(i, j)` belongs to the conserving part when the basis states `i`
/// and `j` carry the same total excitation number.
pub fn rwa_decompose(h_int: &Operator, dims: HilbertDims) -> Result<(Operator, Operator)> {
    let n = dims.total_dim();
    if h_int.dim() != n {
        return Err(ArmError::DimensionMismatch {
            expected: n,
            actual: h_int.dim(),
        });
    }
    let exc = excitation_numbers(dims);
    let zero = C64::new(0.0, 0.0);
    let jc = Operator::from_fn(n, |(i, j)| if exc[i] == exc[j] { h_int.get(i, j) } else { zero });
    let ajc = Operator::from_fn(n, |(i, j)| if exc[i] != exc[j] { h_int.get(i, j) } else { zero });
    Ok((jc, ajc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn params(g: f64, theta: f64) -> ArmParams {
        ArmParams::polar(5.0, 5.0, g, theta, 1e-3, 0.0, 6).unwrap()
    }

    #[test]
    fn channel_conversion_examples() {
        assert_eq!(to_jc_ajc(0.1, 0.1), (0.2, 0.0));
        assert_eq!(to_jc_ajc(0.1, -0.1), (0.0, 0.2));
        assert_eq!(to_jc_ajc(0.1, 0.0), (0.1, 0.1));
    }

    #[test]
    fn polar_conversion_examples() {
        assert_eq!(to_polar(0.1, 0.0), (0.1, 0.0));
        let (g, th) = to_polar(0.0, 0.1);
        assert_eq!(g, 0.1);
        assert_relative_eq!(th, PI / 2.0, epsilon = 1e-15);
        let (g, th) = to_polar(0.1, 0.1);
        assert_relative_eq!(g, 0.1 * 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(th, FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(ArmParams::polar(0.0, 5.0, 0.1, 0.0, 0.0, 0.0, 4).is_err());
        assert!(ArmParams::polar(5.0, 5.0, -0.1, 0.0, 0.0, 0.0, 4).is_err());
        assert!(ArmParams::polar(5.0, 5.0, 0.1, 4.0, 0.0, 0.0, 4).is_err());
        assert_eq!(
            ArmParams::polar(5.0, 5.0, 0.1, 0.0, -1.0, 0.0, 4),
            Err(ArmError::NegativeRate(-1.0))
        );
        assert_eq!(
            ArmParams::polar(5.0, 5.0, 0.1, 0.0, 0.0, 0.0, 0),
            Err(ArmError::InvalidTruncation(0))
        );
        let d = ArmParams::polar(5.0, 8.0, 0.1, 0.0, 0.0, 0.0, 4).unwrap().detunings();
        assert_eq!((d.delta, d.sigma), (3.0, 13.0));
    }

    #[test]
    fn uncoupled_spectrum() {
        let p = ArmParams::polar(5.0, 7.0, 0.0, 0.0, 0.0, 0.0, 5).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        let mut expected: Vec<f64> = (0..=5)
            .flat_map(|n| [n as f64 * 5.0 - 3.5, n as f64 * 5.0 + 3.5])
            .collect();
        expected.sort_by(f64::total_cmp);
        let e = hermitian_eigen(&h).unwrap();
        for (a, b) in e.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_jc_doublet_splitting() {
        let h = build_hamiltonian(&params(0.1, 0.0)).unwrap();
        let e = hermitian_eigen(&h).unwrap();
        // ground -2.5, then the one-excitation doublet 2.5 +- g
        assert_relative_eq!(e.values[2] - e.values[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn resonant_ajc_has_no_repulsion() {
        let p = ArmParams::polar(5.0, 5.0, 0.1, PI / 2.0, 0.0, 0.0, 20).unwrap();
        let e = hermitian_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        // |e,0> is an exact eigenstate; |g,1> only feels a second-order pull
        // 2g^2/(w_q + w_r) from |e,2>, far below the JC doublet width 2g.
        let near: Vec<f64> = e.values.iter().copied().filter(|v| (v - 2.5).abs() < 0.05).collect();
        assert_eq!(near.len(), 2, "{near:?}");
        let gap = (near[1] - near[0]).abs();
        assert!(gap < 0.02 * 0.2);
        assert_relative_eq!(gap, 2.0 * 0.01 / 10.0, max_relative = 0.02);
    }

    #[test]
    fn cl_form_matches_polar_form_with_mirrored_angle() {
        for (g_c, g_l) in [(0.1, 0.1), (0.1, -0.1), (0.1, 0.0), (0.03, -0.07)] {
            let p = ArmParams::new(5.0, 6.0, Coupling::CL { g_c, g_l }, 0.0, 0.0, 5).unwrap();
            let h_cl = build_from_cl(&p).unwrap();
            let (g, theta) = p.coupling.polar();
            let mirrored = build_hamiltonian(&p.with_coupling(Coupling::Polar { g, theta: -theta }).unwrap()).unwrap();
            assert!(h_cl.max_abs_diff(&mirrored) < 1e-12);

            let u = ajc_gauge(p.dims());
            let direct = build_hamiltonian(&p).unwrap();
            let rotated = &(&u * &h_cl) * &u.adjoint();
            assert!(rotated.max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn pure_jc_cl_build_is_entrywise_identical() {
        let p = ArmParams::new(5.0, 5.0, Coupling::CL { g_c: 0.1, g_l: 0.1 }, 0.0, 0.0, 5).unwrap();
        let h = build_from_cl(&p).unwrap();
        let jc = build_hamiltonian(&p.with_coupling(Coupling::Polar { g: 0.2, theta: 0.0 }).unwrap()).unwrap();
        assert!(h.max_abs_diff(&jc) < 1e-12);
    }

    #[test]
    fn build_from_cl_requires_cl() {
        assert!(build_from_cl(&params(0.1, 0.0)).is_err());
    }

    #[test]
    fn drive_operator_examples() {
        let dims = HilbertDims::new(3).unwrap();
        let x = drive_operator(dims);
        assert_eq!(x.hermiticity_defect(), 0.0);
        assert_eq!(x.get(dims.index(0, 0), dims.index(0, 1)), C64::new(1.0, 0.0));
        let ops = CompositeOps::new(dims);
        assert_eq!(x.commutator(&ops.sigma_z).max_abs(), 0.0);
    }

    #[test]
    fn rwa_decompose_examples() {
        let dims = HilbertDims::new(6).unwrap();
        let ops = CompositeOps::new(dims);
        let g = 0.1;

        let (jc, ajc) = rwa_decompose(&build_interaction(dims, g, 0.0), dims).unwrap();
        assert_eq!(ajc.max_abs(), 0.0);
        assert!(jc.max_abs_diff(&jc_term(&ops).scale_real(g)) < 1e-15);

        let (jc, ajc) = rwa_decompose(&build_interaction(dims, g, PI / 2.0), dims).unwrap();
        assert!(jc.max_abs() < 1e-16);
        assert!(ajc.max_abs() > 0.0);

        let h = build_interaction(dims, g, FRAC_PI_4);
        let (jc, ajc) = rwa_decompose(&h, dims).unwrap();
        let expected = g / 2f64.sqrt() * jc_term(&ops).frobenius_norm();
        assert_relative_eq!(jc.frobenius_norm(), expected, max_relative = 1e-12);
        assert_relative_eq!(ajc.frobenius_norm(), expected, max_relative = 1e-12);
        assert_eq!(&jc + &ajc, h);
    }

    #[test]
    fn rwa_decompose_rejects_wrong_size() {
        let dims = HilbertDims::new(3).unwrap();
        assert!(rwa_decompose(&Operator::identity(5), dims).is_err());
    }

    #[test]
    fn excitation_symmetries() {
        let dims = HilbertDims::new(5).unwrap();
        let ops = CompositeOps::new(dims);
        let n_exc = &ops.n_photon + &ops.excited;
        let n_diff = &ops.n_photon - &ops.excited;
        let base = ArmParams::polar(5.0, 6.0, 0.1, 0.0, 0.0, 0.0, 5).unwrap();

        let h0 = build_hamiltonian(&base).unwrap();
        assert!(h0.commutator(&n_exc).max_abs() < 1e-15);

        let h_ajc = build_hamiltonian(&base.with_theta(PI / 2.0).unwrap()).unwrap();
        assert!(h_ajc.commutator(&n_diff).max_abs() < 1e-15);

        let norm_at = |theta: f64| {
            build_hamiltonian(&base.with_theta(theta).unwrap())
                .unwrap()
                .commutator(&n_exc)
                .frobenius_norm()
        };
        let r1 = norm_at(0.3) / (0.1 * 0.3f64.sin());
        let r2 = norm_at(1.1) / (0.1 * 1.1f64.sin());
        assert_relative_eq!(r1, r2, max_relative = 1e-12);
    }
}
