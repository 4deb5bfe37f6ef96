//! Transmission spectra, splitting extraction, dispersive shifts and Purcell
//! rates, each with an independent numerical oracle.

mod convergence;
mod dispersive;
mod peaks;
mod purcell;
mod sweep;

pub use convergence::{convergence_check, ConvergenceRow, ConvergenceScalar};
pub use dispersive::{
    chi_numeric, chi_numeric_at, closed_form_sweet_spot, dispersive_formulas, dressed_label, readout_peaks,
    sweet_spot, DispersiveReport, ReadoutPeaks, CHI_MIN_N_MAX, LABEL_OVERLAP_MIN, SWEET_SPOT_RANGE,
};
pub use peaks::{
    extract_splitting, find_peaks, parabolic_vertex, refined_peaks, refined_splitting, Peak, PEAK_THRESHOLD,
};
pub use purcell::{
    purcell_comparison_curve, purcell_formulas, purcell_numeric, purcell_numeric_with, PurcellDissipator,
    PurcellReport, PurcellRow,
};
pub use sweep::{
    transmission_map, Method, ProbeSetup, SecondAxis, Slice, SpectrumPoint, SpectrumResult, StatePrep, SweepSpec,
    TimeDomainOptions, TimeDomainResult,
};
