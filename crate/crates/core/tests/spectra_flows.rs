use std::f64::consts::PI;

use arm_core::spectra::{
    readout_peaks, refined_splitting, transmission_map, ProbeSetup, SecondAxis, StatePrep, SweepSpec,
    TimeDomainOptions,
};
use arm_core::ArmParams;

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn splitting_follows_jc_component() {
    let base = ArmParams::polar(5.0, 5.0, 0.1, 0.0, 1e-3, 0.0, 6).unwrap();
    let thetas = vec![0.0, PI / 6.0, PI / 3.0];
    let sweep = SweepSpec::linear(grid(4.8, 5.2, 201), SecondAxis::Theta(thetas.clone())).unwrap();
    let map = transmission_map(&base, &sweep).unwrap();
    for (slice, theta) in map.slices().iter().zip(&thetas) {
        let setup = ProbeSetup::new(&base.with_theta(*theta).unwrap(), StatePrep::Steady).unwrap();
        let s = refined_splitting(&setup, slice).unwrap().unwrap();
        let want = 0.2 * theta.cos();
        assert!((s - want).abs() < 0.03 * want, "theta {theta}: {s} vs {want}");
    }
}

#[test]
fn qubit_frequency_axis_moves_the_anticrossing() {
    let base = ArmParams::polar(5.0, 5.0, 0.05, 0.0, 2e-3, 0.0, 4).unwrap();
    let sweep = SweepSpec::linear(grid(4.7, 5.3, 121), SecondAxis::QubitFreq(vec![4.5, 5.0, 5.5])).unwrap();
    let map = transmission_map(&base, &sweep).unwrap();
    let slices = map.slices();
    assert_eq!(slices.len(), 3);
    // far detuned: the brightest line sits near the bare resonator and is pulled away from the qubit
    for (slice, wq) in [(&slices[0], 4.5), (&slices[2], 5.5)] {
        let k = (0..slice.len()).fold(0, |b, i| if slice.transmission[i] > slice.transmission[b] { i } else { b });
        let shift = slice.omega_p[k] - 5.0;
        assert!(shift.abs() < 0.02 && shift * (wq - 5.0) <= 0.0, "{wq}: {shift}");
    }
}

#[test]
fn time_domain_matches_linear_response_off_resonance() {
    let p = ArmParams::polar(5.0, 6.0, 0.05, PI / 4.0, 0.05, 0.0, 2).unwrap();
    let setup = ProbeSetup::new(&p, StatePrep::Steady).unwrap();
    let wp = 4.99;
    let lin = setup.amplitude(wp).unwrap();
    let td = setup.time_domain_amplitude(wp, &TimeDomainOptions::new(1e-4)).unwrap();
    assert!((td.amplitude - lin).norm() < 0.02 * lin.norm(), "{} vs {lin}", td.amplitude);
    assert!(td.max_trace_drift < 1e-8);
    assert!(td.min_eigenvalue > -1e-8);
}

#[test]
fn dispersive_readout_contrast() {
    let p = ArmParams::polar(5.0, 8.0, 0.1, PI / 4.0, 1e-3, 0.0, 10).unwrap();
    let peaks = readout_peaks(&p).unwrap();
    let chi = arm_core::spectra::chi_numeric(&p).unwrap();
    assert!((peaks.contrast() - 2.0 * chi).abs() < 0.1 * (2.0 * chi).abs());
}
