use rayon::prelude::*;

use super::dispersive::chi_numeric_at;
use super::peaks::refined_splitting;
use super::sweep::{ProbeSetup, StatePrep};
use crate::arm_model::ArmParams;
use crate::error::{ArmError, Result};

/// The scalar recomputed at each truncation.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceScalar {
    /// Refined steady-state splitting located on the given probe grid.
    Splitting { probe: Vec<f64> },
    /// Refined position of the strongest steady-state peak on the grid.
    PeakPosition { probe: Vec<f64> },
    /// Diagonalization shift at exactly the requested truncation.
    ChiNumeric,
}

impl ConvergenceScalar {
    pub fn name(&self) -> &'static str {
        match self {
            ConvergenceScalar::Splitting { .. } => "splitting_ghz",
            ConvergenceScalar::PeakPosition { .. } => "peak_ghz",
            ConvergenceScalar::ChiNumeric => "chi_numeric_ghz",
        }
    }

    fn evaluate(&self, params: &ArmParams) -> Result<f64> {
        match self {
            ConvergenceScalar::ChiNumeric => chi_numeric_at(params),
            ConvergenceScalar::Splitting { probe } => {
                let setup = ProbeSetup::new(params, StatePrep::Steady)?;
                refined_splitting(&setup, &setup.slice(probe)?)?
                    .ok_or_else(|| ArmError::MalformedSlice("single peak, no splitting to track".into()))
            }
            ConvergenceScalar::PeakPosition { probe } => {
                let setup = ProbeSetup::new(params, StatePrep::Steady)?;
                let slice = setup.slice(probe)?;
                let n = probe.len();
                let k = (0..n).fold(0, |b, i| if slice.transmission[i] > slice.transmission[b] { i } else { b });
                Ok(setup.refine_peak(probe[k.saturating_sub(1)], probe[(k + 1).min(n - 1)])?.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_max: usize,
    pub value: f64,
    /// `|v_k - v_{k-1}| / |v_{k-1}|`; absent for the first row.
    pub rel_change: Option<f64>,
}

/// Recompute `scalar` at each truncation in `n_max_list` (in the given order).
pub fn convergence_check(
    params: &ArmParams,
    n_max_list: &[usize],
    scalar: &ConvergenceScalar,
) -> Result<Vec<ConvergenceRow>> {
    if n_max_list.len() < 2 {
        return Err(ArmError::InvalidParameter(
            "convergence check needs at least two truncations".into(),
        ));
    }
    let values = n_max_list
        .par_iter()
        .map(|&n| params.with_n_max(n).and_then(|p| scalar.evaluate(&p)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(k, &value)| ConvergenceRow {
            n_max: n_max_list[k],
            value,
            rel_change: (k > 0).then(|| {
                let prev = values[k - 1];
                let diff = (value - prev).abs();
                if diff == 0.0 {
                    0.0
                } else {
                    diff / prev.abs()
                }
            }),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn needs_two_truncations() {
        let p = ArmParams::polar(5.0, 8.0, 0.1, 0.0, 1e-3, 0.0, 10).unwrap();
        assert!(convergence_check(&p, &[10], &ConvergenceScalar::ChiNumeric).is_err());
    }

    #[test]
    fn ajc_shift_converges() {
        let p = ArmParams::polar(5.0, 8.0, 0.1, FRAC_PI_2, 1e-3, 0.0, 10).unwrap();
        let rows = convergence_check(&p, &[10, 20, 30], &ConvergenceScalar::ChiNumeric).unwrap();
        assert!(rows[2].rel_change.unwrap() < 1e-3);
    }

    #[test]
    fn uncoupled_peak_is_truncation_independent() {
        let p = ArmParams::polar(5.0, 7.0, 0.0, 0.0, 1e-3, 1e-4, 2).unwrap();
        let scalar = ConvergenceScalar::PeakPosition { probe: grid(4.99, 5.01, 41) };
        let rows = convergence_check(&p, &[2, 5, 10], &scalar).unwrap();
        for r in &rows[1..] {
            assert!(r.rel_change.unwrap() < 1e-12, "{rows:?}");
        }
    }

    #[test]
    fn splitting_converges() {
        let p = ArmParams::polar(5.0, 5.0, 0.1, 0.0, 1e-3, 0.0, 5).unwrap();
        let scalar = ConvergenceScalar::Splitting { probe: grid(4.8, 5.2, 401) };
        let rows = convergence_check(&p, &[5, 10, 20], &scalar).unwrap();
        assert!(rows[2].rel_change.unwrap() < 1e-3);
        assert!((rows[2].value - 0.2).abs() < 0.2 * 0.02);
    }
}
