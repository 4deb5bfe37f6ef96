//! Subcommand execution: configuration in, CSV text and optional SVG out.

use std::fmt::Write;

use arm_core::spectra::{
    chi_numeric, closed_form_sweet_spot, convergence_check, dispersive_formulas, purcell_comparison_curve,
    readout_peaks, refined_peaks, sweet_spot, transmission_map, Method, ProbeSetup,
};
use arm_core::{ArmError, ArmParams};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::csv::{num, opt, Table};
use crate::svg::{line_plot, spectrum_figure, LinePlot, Series, SvgError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Splitting,
    Dispersive,
    SweetSpot,
    Purcell,
    Circuit,
    Convergence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Splitting => "splitting",
            Command::Dispersive => "dispersive",
            Command::SweetSpot => "sweet-spot",
            Command::Purcell => "purcell",
            Command::Circuit => "circuit",
            Command::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] ArmError),
    #[error("figure: {0}")]
    Figure(#[from] SvgError),
    #[error("{0}")]
    Io(String),
}

impl RunError {
    /// 1 for anything wrong with the input, 2 for failures while computing
    /// or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Solver(_) => "solver",
            RunError::Figure(_) => "figure",
            RunError::Io(_) => "io",
        }
    }

    /// Single-line `key=value` report for stderr.
    pub fn report(&self) -> String {
        format!(
            "error kind={} exit={} message={:?}",
            self.kind(),
            self.exit_code(),
            self.to_string()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: String,
    pub svg: Option<String>,
}

/// Run `command`; the figure is produced only when `figure` is set.
pub fn execute(command: Command, cfg: &RunConfig, figure: bool) -> Result<Output, RunError> {
    if figure && matches!(command, Command::Circuit | Command::Convergence) {
        return Err(ConfigError::Invalid(format!("{} has no figure output", command.name())).into());
    }
    let (mut table, svg) = match command {
        Command::Spectrum => spectrum(cfg, figure)?,
        Command::Splitting => splitting(cfg, figure)?,
        Command::Dispersive => dispersive(cfg, figure)?,
        Command::SweetSpot => sweet_spot_scan(cfg, figure)?,
        Command::Purcell => purcell(cfg, figure)?,
        Command::Circuit => (circuit(cfg)?, None),
        Command::Convergence => (convergence(cfg)?, None),
    };
    table.comment(&header(command, cfg));
    Ok(Output {
        csv: table.render(),
        svg,
    })
}

fn header(command: Command, cfg: &RunConfig) -> String {
    let mut h = format!("arm-sim {VERSION}\ncommand = \"{}\"\n\n{}", command.name(), cfg.file.echo());
    if let Some(p) = &cfg.params {
        let (g_jc, g_ajc) = p.coupling.jc_ajc();
        let (g, theta) = p.coupling.polar();
        let (g_c, g_l) = p.coupling.cl();
        write!(
            h,
            "\n[resolved]\nomega_r_ghz = {:?}\nomega_q_ghz = {:?}\ng_ghz = {g:?}\ntheta_rad = {theta:?}\n\
             g_jc_ghz = {g_jc:?}\ng_ajc_ghz = {g_ajc:?}\ng_c_ghz = {g_c:?}\ng_l_ghz = {g_l:?}\n\
             kappa_ghz = {:?}\ngamma_ghz = {:?}\nn_max = {}\n",
            p.omega_r, p.omega_q, p.kappa, p.gamma, p.n_max
        )
        .unwrap();
    }
    h
}

/// Parallel map over grid items; results keep grid order and the first
/// failure in that order is reported with its grid context.
fn grid_map<T: Sync, R: Send>(
    items: &[T],
    context: impl Fn(&T) -> String + Sync,
    f: impl Fn(&T) -> arm_core::Result<R> + Sync,
) -> Result<Vec<R>, RunError> {
    let results: Vec<arm_core::Result<R>> = items.par_iter().map(&f).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| {
                RunError::Solver(ArmError::AtGridPoint {
                    index,
                    context: context(&items[index]),
                    source: Box::new(e),
                })
            })
        })
        .collect()
}

type Produced = (Table, Option<String>);

fn spectrum(cfg: &RunConfig, figure: bool) -> Result<Produced, RunError> {
    let params = cfg.params()?;
    let sweep = cfg.sweep()?;
    let map = transmission_map(params, &sweep)?;
    let axis = map.axis.column_name();
    let mut cols = axis.into_iter().collect::<Vec<_>>();
    cols.extend(["omega_p_ghz", "re_amp", "im_amp", "transmission"]);
    let mut t = Table::new(cols);
    for p in &map.points {
        let mut row: Vec<String> = p.axis_value.map(num).into_iter().collect();
        let level = if cfg.file.output.normalize {
            p.transmission
        } else {
            p.amplitude.norm()
        };
        row.extend([num(p.omega_p), num(p.amplitude.re), num(p.amplitude.im), num(level)]);
        t.row(row);
    }
    let svg = figure.then(|| spectrum_figure(&map)).transpose()?;
    Ok((t, svg))
}

fn axis_context(column: Option<&str>, v: &Option<f64>) -> String {
    match (column, v) {
        (Some(c), Some(x)) => format!("{c} = {x}"),
        _ => "base point".into(),
    }
}

fn splitting(cfg: &RunConfig, figure: bool) -> Result<Produced, RunError> {
    let params = cfg.params()?;
    let sweep = cfg.sweep()?;
    if sweep.method != Method::LinearResponse {
        return Err(ConfigError::Invalid("splitting refines peaks on the linear response only".into()).into());
    }
    let column = sweep.axis.column_name();
    let values = sweep.axis.values();
    let rows = grid_map(
        &values,
        |v| axis_context(column, v),
        |&v| {
            let p = sweep.axis.apply(params, v)?;
            let setup = ProbeSetup::new(&p, sweep.prep)?;
            let peaks = refined_peaks(&setup, &setup.slice(&sweep.probe)?)?;
            let mut top: Vec<f64> = peaks.iter().take(2).map(|k| k.omega).collect();
            top.sort_by(f64::total_cmp);
            let expected = 2.0 * p.coupling.jc_ajc().0.abs();
            Ok((v, peaks.len(), top, expected))
        },
    )?;
    let mut cols: Vec<&'static str> = column.into_iter().collect();
    cols.extend(["splitting_ghz", "two_g_jc_ghz", "peak_count", "peak_low_ghz", "peak_high_ghz"]);
    let mut t = Table::new(cols);
    let mut measured = Vec::new();
    let mut expected = Vec::new();
    for (v, count, top, two_g) in &rows {
        let split = (top.len() == 2).then(|| top[1] - top[0]);
        let mut row: Vec<String> = v.map(num).into_iter().collect();
        row.extend([
            opt(split),
            num(*two_g),
            count.to_string(),
            opt(top.first().copied()),
            opt(if top.len() == 2 { Some(top[1]) } else { None }),
        ]);
        t.row(row);
        let x = v.unwrap_or(0.0);
        if let Some(s) = split {
            measured.push((x, s));
        }
        expected.push((x, *two_g));
    }
    let svg = figure
        .then(|| {
            line_plot(&LinePlot {
                x_label: x_label(column),
                y_label: "splitting (GHz)".into(),
                log_y: false,
                series: vec![
                    Series { class: "measured".into(), points: measured },
                    Series { class: "closed-form".into(), points: expected },
                ],
            })
        })
        .transpose()?;
    Ok((t, svg))
}

fn x_label(column: Option<&str>) -> String {
    match column {
        Some("theta_rad") => "mixing angle theta (rad)".into(),
        Some(_) => "qubit frequency (GHz)".into(),
        None => "base point".into(),
    }
}

fn dispersive(cfg: &RunConfig, figure: bool) -> Result<Produced, RunError> {
    let params = cfg.params()?;
    let (thetas, readout) = cfg.dispersive_thetas()?;
    let rows = grid_map(
        &thetas,
        |t| format!("theta_rad = {t}"),
        |&theta| {
            let p = params.with_theta(theta)?;
            let f = dispersive_formulas(&p)?;
            let chi = chi_numeric(&p)?;
            let peaks = if readout { Some(readout_peaks(&p)?) } else { None };
            Ok((theta, f, chi, peaks))
        },
    )?;
    let mut t = Table::new(vec![
        "theta_rad",
        "chi_jc_ghz",
        "chi_ajc_ghz",
        "chi_rabi_ghz",
        "chi_numeric_ghz",
        "peak_g_ghz",
        "peak_e_ghz",
    ]);
    for (theta, f, chi, peaks) in &rows {
        t.row(vec![
            num(*theta),
            num(f.chi_jc),
            num(f.chi_ajc),
            num(f.chi_rabi),
            num(*chi),
            opt(peaks.map(|p| p.ground)),
            opt(peaks.map(|p| p.excited)),
        ]);
    }
    let svg = figure
        .then(|| {
            let series = if readout {
                vec![
                    Series {
                        class: "branch-g".into(),
                        points: rows.iter().map(|r| (r.0, r.3.unwrap().ground)).collect(),
                    },
                    Series {
                        class: "branch-e".into(),
                        points: rows.iter().map(|r| (r.0, r.3.unwrap().excited)).collect(),
                    },
                ]
            } else {
                vec![
                    Series {
                        class: "chi-numeric".into(),
                        points: rows.iter().map(|r| (r.0, r.2)).collect(),
                    },
                    Series {
                        class: "chi-closed-form".into(),
                        points: rows.iter().map(|r| (r.0, r.1.chi_rabi)).collect(),
                    },
                ]
            };
            line_plot(&LinePlot {
                x_label: "mixing angle theta (rad)".into(),
                y_label: if readout { "resonator peak (GHz)" } else { "dispersive shift (GHz)" }.into(),
                log_y: false,
                series,
            })
        })
        .transpose()?;
    Ok((t, svg))
}

fn sweet_spot_scan(cfg: &RunConfig, figure: bool) -> Result<Produced, RunError> {
    let params = cfg.params()?;
    let block = cfg.file.sweet_spot.clone().unwrap_or(crate::config::SweetSpotBlock {
        omega_q_ghz: None,
        theta_min_rad: 0.0,
        theta_max_rad: std::f64::consts::FRAC_PI_2,
        curve_points: 33,
    });
    let range = (block.theta_min_rad, block.theta_max_rad);
    if !(range.0 < range.1) {
        return Err(ConfigError::Invalid("sweet_spot: theta_min_rad must be below theta_max_rad".into()).into());
    }
    if figure && block.curve_points < 2 {
        return Err(ConfigError::Invalid("sweet_spot: curve_points must be >= 2".into()).into());
    }
    let omegas = block.omega_q_ghz.clone().unwrap_or_else(|| vec![params.omega_q]);
    if omegas.is_empty() {
        return Err(ConfigError::Invalid("sweet_spot: empty omega_q_ghz".into()).into());
    }
    let points: Vec<ArmParams> = omegas
        .iter()
        .map(|&w| params.with_omega_q(w))
        .collect::<arm_core::Result<_>>()
        .map_err(|e| ConfigError::Invalid(format!("sweet_spot: {e}")))?;
    let rows = grid_map(
        &points,
        |p| format!("omega_q_ghz = {}", p.omega_q),
        |p| Ok((sweet_spot(p, range)?, closed_form_sweet_spot(p))),
    )?;
    let mut t = Table::new(vec![
        "omega_q_ghz",
        "delta_ghz",
        "root_exists",
        "theta0_rad",
        "theta0_closed_form_rad",
    ]);
    for (p, (root, closed)) in points.iter().zip(&rows) {
        t.row(vec![
            num(p.omega_q),
            num(p.detunings().delta),
            u8::from(root.is_some()).to_string(),
            opt(*root),
            opt(*closed),
        ]);
    }
    let svg = if figure {
        let n = block.curve_points;
        let thetas: Vec<f64> = (0..n)
            .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
            .collect();
        let mut series = Vec::new();
        for (k, p) in points.iter().enumerate() {
            let chis = grid_map(
                &thetas,
                |t| format!("omega_q_ghz = {}, theta_rad = {t}", p.omega_q),
                |&t| chi_numeric(&p.with_theta(t)?),
            )?;
            series.push(Series {
                class: format!("chi-curve-{k}"),
                points: thetas.iter().copied().zip(chis).collect(),
            });
        }
        Some(line_plot(&LinePlot {
            x_label: "mixing angle theta (rad)".into(),
            y_label: "dispersive shift (GHz)".into(),
            log_y: false,
            series,
        })?)
    } else {
        None
    };
    Ok((t, svg))
}

fn purcell(cfg: &RunConfig, figure: bool) -> Result<Produced, RunError> {
    let params = cfg.params()?;
    let targets = cfg.purcell_targets()?;
    let rows = purcell_comparison_curve(&targets, params)?;
    let mut t = Table::new(vec![
        "chi_ghz",
        "gamma_jc_over_kappa",
        "gamma_ajc_over_kappa",
        "omega_q_jc_ghz",
        "omega_q_ajc_ghz",
    ]);
    for r in &rows {
        t.row(vec![
            num(r.chi),
            opt(r.gamma_jc_over_kappa),
            opt(r.gamma_ajc_over_kappa),
            opt(r.omega_q_jc),
            opt(r.omega_q_ajc),
        ]);
    }
    let svg = figure
        .then(|| {
            let pick = |f: fn(&arm_core::spectra::PurcellRow) -> Option<f64>| -> Vec<(f64, f64)> {
                rows.iter().filter_map(|r| f(r).map(|v| (r.chi, v))).collect()
            };
            line_plot(&LinePlot {
                x_label: "dispersive shift |chi| (GHz)".into(),
                y_label: "Purcell rate / kappa".into(),
                log_y: true,
                series: vec![
                    Series { class: "regime-jc".into(), points: pick(|r| r.gamma_jc_over_kappa) },
                    Series { class: "regime-ajc".into(), points: pick(|r| r.gamma_ajc_over_kappa) },
                ],
            })
        })
        .transpose()?;
    Ok((t, svg))
}

fn circuit(cfg: &RunConfig) -> Result<Table, RunError> {
    let d = cfg
        .derived
        .ok_or_else(|| ConfigError::Invalid("circuit needs a [circuit] block".into()))?;
    let (g_jc, g_ajc) = d.coupling().jc_ajc();
    let (_, theta) = d.coupling().polar();
    let mut t = Table::new(vec![
        "omega_r_ghz",
        "omega_q_ghz",
        "g_c_ghz",
        "g_l_ghz",
        "g_jc_ghz",
        "g_ajc_ghz",
        "theta_rad",
    ]);
    t.row([d.omega_r, d.omega_q, d.g_c, d.g_l, g_jc, g_ajc, theta].map(num).to_vec());
    Ok(t)
}

fn convergence(cfg: &RunConfig) -> Result<Table, RunError> {
    let params = cfg.params()?;
    let (list, scalar) = cfg.convergence()?;
    let rows = convergence_check(params, &list, &scalar)?;
    let mut t = Table::new(vec!["n_max", scalar.name(), "rel_change"]);
    for r in rows {
        t.row(vec![r.n_max.to_string(), num(r.value), opt(r.rel_change)]);
    }
    Ok(t)
}
