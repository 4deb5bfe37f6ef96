//! TOML run configuration.
//!
//! Every numeric key carries its unit as a suffix (`_ghz`, `_mhz`, `_rad`,
//! `_ns`, `_m`, `_f`, `_h`, `_a`). Unknown keys are rejected. The parsed
//! document keeps its defaults filled in so it can be echoed verbatim into
//! output headers.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use arm_core::circuit::{derive_model, CircuitParams, DerivedModel};
use arm_core::spectra::{ConvergenceScalar, Method, SecondAxis, StatePrep, SweepSpec, TimeDomainOptions};
use arm_core::{ArmParams, Coupling};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// A sequence of values: an explicit list or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Range(r) => {
                if r.points == 0 {
                    return Err(invalid(format!("{key}: points must be >= 1")));
                }
                if r.points == 1 {
                    vec![r.start]
                } else {
                    let step = (r.stop - r.start) / (r.points - 1) as f64;
                    (0..r.points).map(|k| r.start + step * k as f64).collect()
                }
            }
        };
        if v.is_empty() {
            return Err(invalid(format!("{key}: empty grid")));
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(invalid(format!("{key}: non-finite value {x}")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub omega_r_ghz: Option<f64>,
    pub omega_q_ghz: Option<f64>,
    pub g_ghz: Option<f64>,
    pub g_mhz: Option<f64>,
    pub theta_rad: Option<f64>,
    pub g_jc_ghz: Option<f64>,
    pub g_jc_mhz: Option<f64>,
    pub g_ajc_ghz: Option<f64>,
    pub g_ajc_mhz: Option<f64>,
    pub g_c_ghz: Option<f64>,
    pub g_c_mhz: Option<f64>,
    pub g_l_ghz: Option<f64>,
    pub g_l_mhz: Option<f64>,
    pub kappa_ghz: Option<f64>,
    pub kappa_mhz: Option<f64>,
    pub gamma_ghz: Option<f64>,
    pub gamma_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitBlock {
    pub c_per_m_f: f64,
    pub l_per_m_h: f64,
    pub length_m: f64,
    pub c_g_f: f64,
    pub c_q_f: f64,
    pub l_q_h: f64,
    pub e_j_ghz: f64,
    /// Defaults to `2 e E_J / hbar`.
    pub i_c_a: Option<f64>,
    pub m_h: f64,
    pub x_c_m: f64,
    pub x_m_m: f64,
    #[serde(default)]
    pub phi_ext_phi0: f64,
    #[serde(default = "one")]
    pub mode_index: u32,
}

fn one() -> u32 {
    1
}

impl CircuitBlock {
    pub fn params(&self) -> CircuitParams {
        use arm_core::circuit::constants::{E_CHARGE, HBAR, JOULE_PER_GHZ};
        CircuitParams {
            c_per_len: self.c_per_m_f,
            l_per_len: self.l_per_m_h,
            length: self.length_m,
            c_g: self.c_g_f,
            c_q: self.c_q_f,
            l_q: self.l_q_h,
            e_j: self.e_j_ghz,
            i_c: self
                .i_c_a
                .unwrap_or(2.0 * E_CHARGE * self.e_j_ghz * JOULE_PER_GHZ / HBAR),
            m: self.m_h,
            x_c: self.x_c_m,
            x_m: self.x_m_m,
            phi_ext: self.phi_ext_phi0,
            mode_index: self.mode_index,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateName {
    #[default]
    Steady,
    Ground,
    Excited,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub probe_ghz: Grid,
    pub omega_q_ghz: Option<Grid>,
    pub theta_rad: Option<Grid>,
    #[serde(default)]
    pub state: StateName,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    LinearResponse,
    TimeDomain,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EngineBlock {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub method: MethodName,
    /// Probe strength for the time-domain method.
    pub eps_p_ghz: Option<f64>,
    pub settle_ns: Option<f64>,
    pub periods: Option<usize>,
    pub samples_per_period: Option<usize>,
    /// Thread count; not echoed because results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

fn default_n_max() -> usize {
    10
}

impl Default for EngineBlock {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            method: MethodName::default(),
            eps_p_ghz: None,
            settle_ns: None,
            periods: None,
            samples_per_period: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing)]
    pub csv_path: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub svg_path: Option<PathBuf>,
    /// Divide each slice by its maximum; raw `|A|` otherwise.
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            csv_path: None,
            svg_path: None,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DispersiveBlock {
    pub theta_rad: Grid,
    /// Also locate the resonator peak for both qubit states.
    #[serde(default = "yes")]
    pub readout: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweetSpotBlock {
    /// Qubit frequencies to search; the model's own when absent.
    pub omega_q_ghz: Option<Vec<f64>>,
    #[serde(default)]
    pub theta_min_rad: f64,
    #[serde(default = "quarter_turn")]
    pub theta_max_rad: f64,
    /// Samples of chi(theta) written to the figure.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
}

fn quarter_turn() -> f64 {
    FRAC_PI_2
}

fn default_curve_points() -> usize {
    33
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PurcellBlock {
    pub chi_ghz: Option<Grid>,
    pub chi_mhz: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarName {
    Splitting,
    Peak,
    Chi,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceBlock {
    pub n_max: Vec<usize>,
    pub scalar: ScalarName,
}

/// The configuration document as written, with defaults applied.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelBlock>,
    pub circuit: Option<CircuitBlock>,
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub engine: EngineBlock,
    #[serde(default)]
    pub output: OutputBlock,
    pub dispersive: Option<DispersiveBlock>,
    pub sweet_spot: Option<SweetSpotBlock>,
    pub purcell: Option<PurcellBlock>,
    pub convergence: Option<ConvergenceBlock>,
}

/// Validated configuration ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    /// Model parameters; absent only for a circuit-only document.
    pub params: Option<ArmParams>,
    pub derived: Option<DerivedModel>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))
    }

    /// The document with defaults filled, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Read, parse and validate a configuration file.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    resolve(ConfigFile::parse(&text)?)
}

fn ghz_or_mhz(name: &str, ghz: Option<f64>, mhz: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match (ghz, mhz) {
        (Some(_), Some(_)) => Err(invalid(format!("give only one of {name}_ghz and {name}_mhz"))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(v * 1e-3)),
        (None, None) => Ok(None),
    }
}

fn model_coupling(m: &ModelBlock) -> Result<Option<Coupling>, ConfigError> {
    let g = ghz_or_mhz("g", m.g_ghz, m.g_mhz)?;
    let jc = ghz_or_mhz("g_jc", m.g_jc_ghz, m.g_jc_mhz)?;
    let ajc = ghz_or_mhz("g_ajc", m.g_ajc_ghz, m.g_ajc_mhz)?;
    let gc = ghz_or_mhz("g_c", m.g_c_ghz, m.g_c_mhz)?;
    let gl = ghz_or_mhz("g_l", m.g_l_ghz, m.g_l_mhz)?;
    let polar = g.is_some() || m.theta_rad.is_some();
    let channels = jc.is_some() || ajc.is_some();
    let cl = gc.is_some() || gl.is_some();
    if [polar, channels, cl].iter().filter(|&&b| b).count() > 1 {
        return Err(invalid(
            "model: give exactly one coupling form (g/theta_rad, g_jc/g_ajc or g_c/g_l)",
        ));
    }
    let pair = |a: Option<f64>, b: Option<f64>, names: &str| match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(invalid(format!("model: {names} must be given together"))),
    };
    Ok(if polar {
        let (g, theta) = pair(g, m.theta_rad, "g and theta_rad")?;
        Some(Coupling::Polar { g, theta })
    } else if channels {
        let (g_jc, g_ajc) = pair(jc, ajc, "g_jc and g_ajc")?;
        Some(Coupling::JcAjc { g_jc, g_ajc })
    } else if cl {
        let (g_c, g_l) = pair(gc, gl, "g_c and g_l")?;
        Some(Coupling::CL { g_c, g_l })
    } else {
        None
    })
}

/// Check the cross-field rules and build the model parameters.
pub fn resolve(file: ConfigFile) -> Result<RunConfig, ConfigError> {
    let n_max = file.engine.n_max;
    if n_max < 1 {
        return Err(invalid("engine.n_max must be >= 1"));
    }
    if file.engine.workers == Some(0) {
        return Err(invalid("engine.workers must be >= 1"));
    }
    if file.engine.method == MethodName::LinearResponse {
        let e = &file.engine;
        if e.eps_p_ghz.is_some() || e.settle_ns.is_some() || e.periods.is_some() || e.samples_per_period.is_some() {
            return Err(invalid("engine: time-domain keys given with method = \"linear_response\""));
        }
    }
    let derived = match &file.circuit {
        Some(c) => Some(derive_model(&c.params()).map_err(|e| invalid(format!("circuit: {e}")))?),
        None => None,
    };
    let params = match (&file.model, derived) {
        (None, None) => None,
        (None, Some(_)) => None,
        (Some(m), derived) => {
            let kappa = ghz_or_mhz("kappa", m.kappa_ghz, m.kappa_mhz)?
                .ok_or_else(|| invalid("model: missing kappa_ghz or kappa_mhz"))?;
            let gamma = ghz_or_mhz("gamma", m.gamma_ghz, m.gamma_mhz)?.unwrap_or(0.0);
            let coupling = model_coupling(m)?;
            let (omega_r, omega_q, coupling) = match derived {
                Some(d) => {
                    if coupling.is_some() || m.omega_r_ghz.is_some() || m.omega_q_ghz.is_some() {
                        return Err(invalid(
                            "model: frequencies and couplings come from [circuit]; remove them from [model]",
                        ));
                    }
                    (d.omega_r, d.omega_q, d.coupling())
                }
                None => (
                    m.omega_r_ghz.ok_or_else(|| invalid("model: missing omega_r_ghz"))?,
                    m.omega_q_ghz.ok_or_else(|| invalid("model: missing omega_q_ghz"))?,
                    coupling.ok_or_else(|| invalid("model: missing coupling (or a [circuit] block)"))?,
                ),
            };
            Some(
                ArmParams::new(omega_r, omega_q, coupling, kappa, gamma, n_max)
                    .map_err(|e| invalid(format!("model: {e}")))?,
            )
        }
    };
    Ok(RunConfig {
        workers: file.engine.workers,
        file,
        params,
        derived,
    })
}

impl RunConfig {
    pub fn params(&self) -> Result<&ArmParams, ConfigError> {
        self.params
            .as_ref()
            .ok_or_else(|| invalid("this subcommand needs a [model] block"))
    }

    pub fn method(&self) -> Result<Method, ConfigError> {
        let e = &self.file.engine;
        Ok(match e.method {
            MethodName::LinearResponse => Method::LinearResponse,
            MethodName::TimeDomain => {
                let eps = e
                    .eps_p_ghz
                    .ok_or_else(|| invalid("engine: time_domain needs eps_p_ghz"))?;
                let mut o = TimeDomainOptions::new(eps);
                o.settle_ns = e.settle_ns;
                o.periods = e.periods.unwrap_or(o.periods);
                o.samples_per_period = e.samples_per_period.unwrap_or(o.samples_per_period);
                Method::TimeDomain(o)
            }
        })
    }

    pub fn sweep(&self) -> Result<SweepSpec, ConfigError> {
        let s = self
            .file
            .sweep
            .as_ref()
            .ok_or_else(|| invalid("this subcommand needs a [sweep] block"))?;
        let probe = s.probe_ghz.values("sweep.probe_ghz")?;
        let axis = match (&s.omega_q_ghz, &s.theta_rad) {
            (Some(_), Some(_)) => return Err(invalid("sweep: give at most one of omega_q_ghz and theta_rad")),
            (Some(g), None) => SecondAxis::QubitFreq(g.values("sweep.omega_q_ghz")?),
            (None, Some(g)) => SecondAxis::Theta(g.values("sweep.theta_rad")?),
            (None, None) => SecondAxis::None,
        };
        let prep = match s.state {
            StateName::Steady => StatePrep::Steady,
            StateName::Ground => StatePrep::Ground,
            StateName::Excited => StatePrep::Excited,
        };
        SweepSpec::new(probe, axis, prep, self.method()?).map_err(|e| invalid(format!("sweep: {e}")))
    }

    pub fn dispersive_thetas(&self) -> Result<(Vec<f64>, bool), ConfigError> {
        let d = self
            .file
            .dispersive
            .as_ref()
            .ok_or_else(|| invalid("this subcommand needs a [dispersive] block"))?;
        Ok((d.theta_rad.values("dispersive.theta_rad")?, d.readout))
    }

    pub fn purcell_targets(&self) -> Result<Vec<f64>, ConfigError> {
        let p = self
            .file
            .purcell
            .as_ref()
            .ok_or_else(|| invalid("this subcommand needs a [purcell] block"))?;
        match (&p.chi_ghz, &p.chi_mhz) {
            (Some(g), None) => g.values("purcell.chi_ghz"),
            (None, Some(m)) => Ok(m.values("purcell.chi_mhz")?.iter().map(|v| v * 1e-3).collect()),
            _ => Err(invalid("purcell: give exactly one of chi_ghz and chi_mhz")),
        }
    }

    pub fn convergence(&self) -> Result<(Vec<usize>, ConvergenceScalar), ConfigError> {
        let c = self
            .file
            .convergence
            .as_ref()
            .ok_or_else(|| invalid("this subcommand needs a [convergence] block"))?;
        let scalar = match c.scalar {
            ScalarName::Chi => ConvergenceScalar::ChiNumeric,
            ScalarName::Splitting => ConvergenceScalar::Splitting {
                probe: self.sweep()?.probe,
            },
            ScalarName::Peak => ConvergenceScalar::PeakPosition {
                probe: self.sweep()?.probe,
            },
        };
        Ok((c.n_max.clone(), scalar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
omega_r_ghz = 5.0
omega_q_ghz = 5.0
g_ghz = 0.1
theta_rad = 0.7853981633974483
kappa_mhz = 1.0
"#;

    #[test]
    fn polar_model_with_defaults() {
        let c = resolve(ConfigFile::parse(BASE).unwrap()).unwrap();
        let p = c.params.unwrap();
        assert_eq!(p.coupling, Coupling::Polar { g: 0.1, theta: std::f64::consts::FRAC_PI_4 });
        assert!((p.kappa - 1e-3).abs() < 1e-18);
        assert_eq!((p.n_max, p.gamma), (10, 0.0));
        assert_eq!(c.method().unwrap(), Method::LinearResponse);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ConfigFile::parse(&format!("{BASE}kappa = 1.0\n")).unwrap_err();
        assert!(err.to_string().contains("kappa"), "{err}");
    }

    #[test]
    fn coupling_forms_are_exclusive() {
        let err = resolve(ConfigFile::parse(&format!("{BASE}g_jc_ghz = 0.1\ng_ajc_ghz = 0.0\n")).unwrap()).unwrap_err();
        assert!(err.to_string().contains("exactly one coupling"), "{err}");
    }

    #[test]
    fn circuit_excludes_model_couplings() {
        let circuit = r#"
[circuit]
c_per_m_f = 1.6e-10
l_per_m_h = 4.0e-7
length_m = 0.012
c_g_f = 5e-15
c_q_f = 80e-15
l_q_h = 100e-9
e_j_ghz = 10.0
m_h = 20e-12
x_c_m = 0.006
x_m_m = 0.0
"#;
        let err = resolve(ConfigFile::parse(&format!("{BASE}{circuit}")).unwrap()).unwrap_err();
        assert!(err.to_string().contains("[circuit]"), "{err}");
        let only = resolve(ConfigFile::parse(&format!("[model]\nkappa_mhz = 1.0\n{circuit}")).unwrap()).unwrap();
        let p = only.params.unwrap();
        assert!(matches!(p.coupling, Coupling::CL { .. }));
        assert_eq!(p.omega_r, only.derived.unwrap().omega_r);
    }

    #[test]
    fn sweep_grids() {
        let text = format!("{BASE}[sweep]\nprobe_ghz = {{ start = 4.8, stop = 5.2, points = 5 }}\ntheta_rad = [0.0, 0.5]\n");
        let c = resolve(ConfigFile::parse(&text).unwrap()).unwrap();
        let s = c.sweep().unwrap();
        assert_eq!(s.probe.len(), 5);
        assert!((s.probe[4] - 5.2).abs() < 1e-15);
        assert_eq!(s.axis, SecondAxis::Theta(vec![0.0, 0.5]));
    }

    #[test]
    fn echo_omits_workers_and_paths() {
        let text = format!("{BASE}[engine]\nworkers = 3\n[output]\ncsv_path = \"x.csv\"\n");
        let c = resolve(ConfigFile::parse(&text).unwrap()).unwrap();
        assert_eq!(c.workers, Some(3));
        let echo = c.file.echo();
        assert!(!echo.contains("workers") && !echo.contains("x.csv"));
        assert!(echo.contains("n_max = 10"));
    }

    #[test]
    fn time_domain_needs_probe_strength() {
        let c = resolve(ConfigFile::parse(&format!("{BASE}[engine]\nmethod = \"time_domain\"\n")).unwrap()).unwrap();
        assert!(c.method().is_err());
        let err = resolve(ConfigFile::parse(&format!("{BASE}[engine]\neps_p_ghz = 1e-4\n")).unwrap()).unwrap_err();
        assert!(err.to_string().contains("time-domain keys"));
    }
}
