use std::f64::consts::TAU;

use chiral_metrology::channels::{
    apply_birefringence, apply_dichroism, apply_external_loss, BirefringencePhases, ChiralSample,
    DichroismTransmissions, PathLength,
};
use chiral_metrology::fock::{apply_loss_fock, build_probe_fock, moments};
use chiral_metrology::gaussian::{make_polarization_squeezed_probe, make_twin_amplitude_squeezed_probe};
use chiral_metrology::metrology::{
    balanced_detection_stats, dichroism_concentration_variance, dichroism_stats,
    qfi_closed_form_birefringence, ratio_propagated_variance, BirefringenceModel, DichroismModel,
};
use chiral_metrology::montecarlo::{run_plan, ExperimentPlan, Scheme};
use chiral_metrology::{GaussianState, ProbeSpec, C64};
use proptest::prelude::*;

fn max_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    let dd = (a.d() - b.d()).camax();
    let ds = (a.sigma() - b.sigma()).camax();
    dd.max(ds)
}

fn scale(state: &GaussianState) -> f64 {
    state.sigma().camax().max(state.d().camax()).max(1.0)
}

fn alpha() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn probe_state() -> impl Strategy<Value = GaussianState> {
    (alpha(), 0.0..1.5f64, 0.0..TAU, any::<bool>()).prop_map(|(a, s, theta, twin)| {
        if twin {
            make_twin_amplitude_squeezed_probe(a, s, theta).unwrap()
        } else {
            make_polarization_squeezed_probe(a, s, theta).unwrap()
        }
    })
}

fn hv_state() -> impl Strategy<Value = GaussianState> {
    (alpha(), 0.0..1.5f64, 0.0..TAU, 0.05..1.0f64).prop_map(|(a, s, theta, eta)| {
        let pure = make_polarization_squeezed_probe(a, s, theta).unwrap();
        apply_external_loss(&pure, eta).unwrap()
    })
}

proptest! {
    #[test]
    fn probes_are_conjugation_symmetric_and_pure(state in probe_state()) {
        prop_assert!(state.is_conjugation_symmetric());
        let spec = state.symplectic_eigenvalues();
        prop_assert!((spec.lambda1 - 1.0).abs() < 1e-10, "{:?}", spec);
        prop_assert!((spec.lambda2 - 1.0).abs() < 1e-10, "{:?}", spec);
    }

    #[test]
    fn brightness_increases_with_amplitude_and_squeezing(
        a in 0.0..3.0f64, da in 1e-3..1.0f64, s in 0.0..1.5f64, ds in 1e-3..0.5f64, theta in 0.0..TAU,
    ) {
        let n = |a: f64, s: f64| make_polarization_squeezed_probe(C64::new(a, 0.0), s, theta).unwrap().mean_photons();
        prop_assert!(n(a + da, s) > n(a, s));
        prop_assert!(n(a, s + ds) > n(a, s));
    }

    #[test]
    fn losses_compose(state in hv_state(), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let two = apply_external_loss(&apply_external_loss(&state, e1).unwrap(), e2).unwrap();
        let one = apply_external_loss(&state, e1 * e2).unwrap();
        prop_assert!(max_diff(&two, &one) < 1e-12 * scale(&state));
    }

    #[test]
    fn loss_scales_photon_number(state in hv_state(), eta in 0.0..1.0f64) {
        let lossy = apply_external_loss(&state, eta).unwrap();
        prop_assert!((lossy.mean_photons() - eta * state.mean_photons()).abs() < 1e-12 * scale(&state));
        prop_assert!(lossy.is_physical());
    }

    #[test]
    fn birefringence_is_unitary(state in hv_state(), delta in -TAU..TAU, common in -TAU..TAU) {
        let out = apply_birefringence(&state, &BirefringencePhases::from_delta(delta, common)).unwrap();
        prop_assert!((out.mean_photons() - state.mean_photons()).abs() < 1e-10 * scale(&state));
        let (a, b) = (state.symplectic_eigenvalues(), out.symplectic_eigenvalues());
        prop_assert!((a.lambda1 - b.lambda1).abs() < 1e-8 * a.lambda1);
        prop_assert!((a.lambda2 - b.lambda2).abs() < 1e-8 * a.lambda2);
        prop_assert!(out.is_physical());
    }

    #[test]
    fn equal_phases_act_as_global_phase(state in hv_state(), phi in -TAU..TAU) {
        let out = apply_birefringence(&state, &BirefringencePhases::from_delta(0.0, phi)).unwrap();
        let tol = 1e-12 * scale(&state);
        prop_assert!((out.n_block() - state.n_block()).camax() < tol);
        let (d0, d1) = (state.amplitudes(), out.amplitudes());
        prop_assert!((d1 * d1.adjoint() - d0 * d0.adjoint()).camax() < tol * scale(&state));
        let invariant = |s: &GaussianState| {
            let d = s.amplitudes();
            s.m_block().component_mul(&(d * d.transpose()).map(|z| z.conj()))
        };
        prop_assert!((invariant(&out) - invariant(&state)).camax() < tol * scale(&state).powi(2));
        for mode in 0..2 {
            prop_assert!((out.mode_mean_photons(mode) - state.mode_mean_photons(mode)).abs() < tol);
        }
    }

    #[test]
    fn dichroism_preserves_physicality(a in alpha(), s in 0.0..1.5f64, al in 0.0..3.0f64, ar in 0.0..3.0f64) {
        let state = make_twin_amplitude_squeezed_probe(a, s, 0.0).unwrap();
        let out = apply_dichroism(&state, &DichroismTransmissions::from_absorbances(al, ar)).unwrap();
        prop_assert!(out.is_physical());
    }
}

fn birefringence(alpha: f64, s: f64, theta: f64, eta: f64, dphi: f64, l: f64, dg: f64) -> BirefringenceModel {
    let probe = ProbeSpec::polarization_squeezed(C64::new(alpha, 0.0), s, theta);
    let sample = ChiralSample::birefringent(dphi / (l * dg), PathLength::from_dm(l), dg).with_efficiency(eta);
    BirefringenceModel::new(probe, sample).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classical_information_never_exceeds_quantum(
        alpha in 1.0..100.0f64, s in 0.0..1.5f64, theta in 0.0..TAU, eta in 0.05..1.0f64,
        dphi in 0.0..3.0f64, xi in -3.0..3.0f64,
    ) {
        let model = birefringence(alpha, s, theta, eta, dphi, 1.0, 1.0);
        let cfi = balanced_detection_stats(&model, xi).cfi_gaussian;
        prop_assert!(cfi <= model.qfi().unwrap() * (1.0 + 1e-6));
    }

    #[test]
    fn qfi_does_not_grow_with_loss(
        alpha in 0.5..10.0f64, s in 0.0..1.5f64, theta in 0.0..TAU, eta in 0.05..1.0f64,
        shrink in 0.0..1.0f64, dphi in 0.0..3.0f64,
    ) {
        let hi = birefringence(alpha, s, theta, eta, dphi, 1.0, 1.0).qfi().unwrap();
        let lo = birefringence(alpha, s, theta, eta * shrink.max(1e-3), dphi, 1.0, 1.0).qfi().unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn qfi_scales_with_path_and_rotatory_power(
        alpha in 0.5..10.0f64, s in 0.0..1.0f64, eta in 0.1..1.0f64, dphi in 0.0..1.0f64,
        l in 0.1..5.0f64, dg in 0.1..5.0f64, k in 0.2..5.0f64,
    ) {
        let base = birefringence(alpha, s, 0.0, eta, dphi, l, dg).qfi().unwrap();
        let swapped = birefringence(alpha, s, 0.0, eta, dphi, 2.0 * l, dg / 2.0).qfi().unwrap();
        prop_assert!((swapped - base).abs() < 1e-8 * base);
        let scaled = birefringence(alpha, s, 0.0, eta, dphi, l, k * dg).qfi().unwrap();
        prop_assert!((scaled - k * k * base).abs() < 1e-8 * scaled);
    }

    #[test]
    fn unsqueezed_closed_form_is_standard_quantum_limit(
        alpha in 0.1..100.0f64, eta in 0.01..1.0f64, dphi in 0.0..3.0f64, l in 0.1..5.0f64, dg in 0.1..5.0f64,
    ) {
        let report = qfi_closed_form_birefringence(&birefringence(alpha, 0.0, 0.0, eta, dphi, l, dg), 1).unwrap();
        let sql = eta * alpha * alpha * l * l * dg * dg;
        prop_assert!((report.qfi_closed_form - sql).abs() <= 1e-12 * sql);
        prop_assert_eq!(report.vacuum_term, 0.0);
    }

    #[test]
    fn dichroism_variance_composes_from_arm_statistics(
        alpha in 1e6..1e8f64, s in 0.0..1.5f64, eta in 0.05..1.0f64, c in 0.0..0.5f64,
        el in 0.1..3.0f64, er in 0.1..3.0f64,
    ) {
        prop_assume!((el - er).abs() > 1e-3);
        let probe = ProbeSpec::twin_amplitude_squeezed(C64::new(alpha, 0.0), s, 0.0);
        let sample = ChiralSample::dichroic(c, PathLength::from_cm(1.0), el, er).with_efficiency(eta);
        let model = DichroismModel::new(probe, sample).unwrap();
        let direct = dichroism_concentration_variance(&model).unwrap();
        let composed = ratio_propagated_variance(&dichroism_stats(&model), el - er, 1.0);
        prop_assert!((direct - composed).abs() < 1e-10 * direct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seeded_runs_are_identical(seed in any::<u64>(), trials in 1usize..3000, s in 0.0..1.0f64) {
        let model = birefringence(100.0, s, 0.0, 0.9, 0.4, 1.0, 1.0);
        let plan = ExperimentPlan::new(Scheme::Balanced { model, xi: 0.1 }, trials, seed);
        prop_assert_eq!(run_plan(&plan).unwrap(), run_plan(&plan).unwrap());
    }

    #[test]
    fn number_state_losses_compose(re in -1.5..1.5f64, s in 0.0..0.4f64, e1 in 0.1..1.0f64, e2 in 0.1..1.0f64) {
        let probe = build_probe_fock(&ProbeSpec::polarization_squeezed(C64::new(re, 0.0), s, 0.0), None).unwrap();
        let two = apply_loss_fock(&apply_loss_fock(&probe, e1, e1).unwrap(), e2, e2).unwrap();
        let one = apply_loss_fock(&probe, e1 * e2, e1 * e2).unwrap();
        prop_assert!(max_diff(&moments(&two), &moments(&one)) < 1e-9);
        let lost = moments(&one).mean_photons();
        prop_assert!((lost - e1 * e2 * moments(&probe).mean_photons()).abs() < 1e-9);
    }
}
