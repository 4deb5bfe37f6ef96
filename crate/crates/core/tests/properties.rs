use std::f64::consts::{FRAC_PI_2, PI};

use arm_core::arm_model::{
    ajc_gauge, build_from_cl, build_hamiltonian, excitation_numbers, from_polar, to_cl, to_jc_ajc, to_polar,
};
use arm_core::circuit::{charging_energies, derive_model, mode_function, CircuitParams};
use arm_core::lindblad::{build_liouvillian, steady_state, Collapse};
use arm_core::linalg::hermitian_eigen;
use arm_core::operators::CompositeOps;
use arm_core::spectra::{dispersive_formulas, extract_splitting, purcell_formulas, Slice};
use arm_core::{ArmParams, Coupling};
use proptest::prelude::*;

fn arm_params() -> impl Strategy<Value = ArmParams> {
    (4.0..6.0f64, 3.0..9.0f64, 0.0..0.2f64, 0.0..FRAC_PI_2, 1e-4..1e-2f64, 0.0..1e-3f64, 1usize..5)
        .prop_map(|(wr, wq, g, t, k, gm, n)| ArmParams::polar(wr, wq, g, t, k, gm, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_representations_round_trip(g_c in -1.0..1.0f64, g_l in -1.0..1.0f64) {
        let (jc, ajc) = to_jc_ajc(g_c, g_l);
        let (c, l) = to_cl(jc, ajc);
        prop_assert!((c - g_c).abs() < 1e-15 && (l - g_l).abs() < 1e-15);
        let (g, t) = to_polar(jc, ajc);
        let (jc2, ajc2) = from_polar(g, t);
        prop_assert!((jc2 - jc).abs() < 1e-14 && (ajc2 - ajc).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_is_hermitian(p in arm_params()) {
        prop_assert!(build_hamiltonian(&p).unwrap().hermiticity_defect() == 0.0);
    }

    #[test]
    fn circuit_form_is_gauge_equivalent(g_c in -0.2..0.2f64, g_l in -0.2..0.2f64, wq in 3.0..8.0f64) {
        let p = ArmParams::new(5.0, wq, Coupling::CL { g_c, g_l }, 1e-3, 0.0, 3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let h_cl = build_from_cl(&p).unwrap();
        let u = ajc_gauge(p.dims());
        let rotated = &(&u * &h_cl) * &u.adjoint();
        prop_assert!(rotated.max_abs_diff(&h) < 1e-13);
        let (a, b) = (hermitian_eigen(&h).unwrap(), hermitian_eigen(&h_cl).unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn jc_coupling_conserves_excitations(wq in 3.0..8.0f64, g in 0.0..0.3f64) {
        let p = ArmParams::polar(5.0, wq, g, 0.0, 1e-3, 0.0, 4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let n = excitation_numbers(p.dims());
        for i in 0..n.len() {
            for j in 0..n.len() {
                if n[i] != n[j] {
                    prop_assert!(h.get(i, j).norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn liouvillian_preserves_trace(p in arm_params()) {
        let ops = CompositeOps::new(p.dims());
        let l = build_liouvillian(
            &build_hamiltonian(&p).unwrap(),
            &[Collapse::new(ops.a.clone(), p.kappa), Collapse::new(ops.sigma_minus.clone(), p.gamma)],
        )
        .unwrap();
        prop_assert!(l.trace_defect() < 1e-12 * l.max_abs().max(1.0));
    }

    #[test]
    fn steady_state_is_a_density_matrix(p in arm_params()) {
        let ops = CompositeOps::new(p.dims());
        let l = build_liouvillian(
            &build_hamiltonian(&p).unwrap(),
            &[Collapse::new(ops.a.clone(), p.kappa), Collapse::new(ops.sigma_minus.clone(), p.gamma + 1e-4)],
        )
        .unwrap();
        let rho = steady_state(&l).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.operator().hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn closed_forms_are_additive(p in arm_params()) {
        prop_assume!(p.detunings().delta != 0.0);
        let d = dispersive_formulas(&p).unwrap();
        prop_assert_eq!(d.chi_rabi, d.chi_jc + d.chi_ajc);
        let r = purcell_formulas(&p).unwrap();
        prop_assert_eq!(r.gamma_rabi, r.gamma_jc + r.gamma_ajc);
    }

    #[test]
    fn synthetic_splitting_is_recovered(center in 4.95..5.05f64, half in 0.02..0.15f64, kappa in 5e-4..5e-3f64) {
        let n = 2001;
        let x: Vec<f64> = (0..n).map(|k| 4.7 + 0.6 * k as f64 / (n - 1) as f64).collect();
        let lor = |w: f64, w0: f64| 0.5 * kappa / (w - w0).hypot(0.5 * kappa);
        let y: Vec<f64> = x.iter().map(|&w| lor(w, center - half) + lor(w, center + half)).collect();
        let s = extract_splitting(&Slice::from_magnitudes(x, y).unwrap()).unwrap().unwrap();
        prop_assert!((s - 2.0 * half).abs() < 3e-4, "{} vs {}", s, 2.0 * half);
    }

    #[test]
    fn charging_matrix_stays_positive(
        c_g in 0.1e-15..50e-15f64,
        c_q in 20e-15..200e-15f64,
        x_frac in -0.5..0.5f64,
        c_per_len in 0.5e-10..3e-10f64,
    ) {
        let mut p = CircuitParams::example_device();
        p.c_g = c_g;
        p.c_q = c_q;
        p.c_per_len = c_per_len;
        p.x_c = x_frac * p.length;
        let e = charging_energies(&p).unwrap();
        let f = mode_function(p.mode_index, p.length, p.x_c).unwrap();
        prop_assert!(e.e_cq > 0.0 && e.e_cr > 0.0 && e.e_cqr > 0.0);
        prop_assert!(e.e_lr > 0.0 && e.e_lq > 0.0);
        // the mode coordinate carries sqrt(length), so f(x_C) weights the cross term
        prop_assert!((e.e_cqr * f).powi(2) < 4.0 * e.e_cq * e.e_cr);
    }

    #[test]
    fn coupling_sign_follows_mode_shape(x_frac in -0.5..0.5f64, m in -50e-12..50e-12f64) {
        let mut p = CircuitParams::example_device();
        p.x_c = x_frac * p.length;
        p.x_m = -x_frac * p.length;
        p.m = m;
        let d = derive_model(&p).unwrap();
        let f = mode_function(p.mode_index, p.length, p.x_c).unwrap();
        prop_assert!(d.g_c == 0.0 || d.g_c.signum() == f.signum());
        prop_assert!(d.omega_r > 0.0 && d.omega_q > 0.0);
        let mut mirrored = p;
        mirrored.x_c = -p.x_c;
        prop_assert_eq!(derive_model(&mirrored).unwrap().g_c, -d.g_c);
    }
}

#[test]
fn theta_quarter_turn_swaps_coupling_character() {
    let p = ArmParams::polar(5.0, 6.0, 0.1, PI / 2.0, 1e-3, 0.0, 3).unwrap();
    let (jc, ajc) = p.coupling.jc_ajc();
    assert!(jc.abs() < 1e-16 && (ajc - 0.1).abs() < 1e-16);
}
