use std::sync::OnceLock;
use std::time::{Duration, Instant};

use chiral_cli::{run_dichroism, run_fig2, run_sucrose, run_validate, ScenarioConfig};
use chiral_metrology::channels::{
    apply_birefringence, apply_external_loss, BirefringencePhases, ChiralSample, PathLength,
};
use chiral_metrology::fock::{apply_loss_fock, build_probe_fock, moments};
use chiral_metrology::gaussian::{make_polarization_squeezed_probe, make_twin_amplitude_squeezed_probe};
use chiral_metrology::metrology::BirefringenceModel;
use chiral_metrology::montecarlo::{run_plan, ExperimentPlan, Scheme};
use chiral_metrology::validate::{arbitrate, monte_carlo_suite, Scale, ValidationReport, ORACLE_TOL};
use chiral_metrology::{GaussianState, ProbeSpec, C64};
use chiral_verification::report;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const SEED: u64 = 2024;

fn validation() -> &'static (ValidationReport, String, Duration) {
    static REPORT: OnceLock<(ValidationReport, String, Duration)> = OnceLock::new();
    REPORT.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("validation_report.json");
        let start = Instant::now();
        let report = run_validate(Scale::Small, SEED, &path).unwrap();
        let elapsed = start.elapsed();
        let text = std::fs::read_to_string(&path).expect("report file written");
        (report, text, elapsed)
    })
}

#[test]
fn criterion_1_standard_quantum_limit() {
    let mut worst = 0.0f64;
    let mut points = 0;
    for alpha in [0.5, 1.0, 3.0, 10.0, 100.0] {
        for (l, dg) in [(0.1, 1.16), (1.0, 1.0), (0.5, 66.5), (2.0, 0.3)] {
            let probe = ProbeSpec::coherent(C64::new(alpha, 0.0));
            let sample = ChiralSample::birefringent(0.01, PathLength::from_dm(l), dg);
            let qfi = BirefringenceModel::new(probe, sample).unwrap().qfi().unwrap();
            let sql = alpha * alpha * l * l * dg * dg;
            worst = worst.max((qfi - sql).abs() / sql);
            points += 1;
        }
    }
    report(
        1,
        "coherent QFI equals |alpha|^2 l^2 dgamma^2",
        points == 20 && worst <= 1e-10,
        format!("{points} points, worst relative error {worst:e}"),
    );
}

#[test]
fn criterion_2_fourfold_enhancement() {
    let table = run_fig2().unwrap();
    let (s, eta, e) = (
        table.column("s").unwrap(),
        table.column("eta").unwrap(),
        table.column("enhancement").unwrap(),
    );
    let row = (0..table.rows.len())
        .find(|&i| (s[i].unwrap() - 1.73).abs() < 1e-9 && eta[i] == Some(1.0))
        .expect("grid contains s = 1.73, eta = 1");
    let value = e[row].unwrap();
    report(
        2,
        "fig2 enhancement at s = 1.73, eta = 1 in [3.9, 4.1]",
        (3.9..=4.1).contains(&value),
        format!("{value}"),
    );
}

#[test]
fn criterion_3_sucrose_ratio() {
    let r = run_sucrose(None).unwrap();
    report(
        3,
        "sucrose coherent/squeezed precision ratio in [1.90, 2.00]",
        (1.90..=2.00).contains(&r.enhancement),
        format!(
            "enhancement {}, dC/C coherent {} squeezed {}",
            r.enhancement, r.coherent_relative_precision, r.squeezed_relative_precision
        ),
    );
}

fn dichroism_ratio(t: f64, s: f64) -> f64 {
    let config = ScenarioConfig::from_toml_str(&format!(
        r#"
        [probe]
        family = "twin_amplitude_squeezed"
        alpha = 1000.0
        s = {s}
        [sample]
        concentration = {{ value = 0.0, unit = "mol/L" }}
        path_length = {{ value = 1.0, unit = "cm" }}
        eps_left = 1.5
        eps_right = 1.0
        [channel]
        mode = "dichroism"
        eta = {t}
        "#
    ))
    .unwrap();
    run_dichroism(&config).unwrap().column("precision_ratio").unwrap()[0].unwrap()
}

#[test]
fn criterion_4_dichroism_ratios() {
    let r90 = dichroism_ratio(0.9, 3.0);
    let r99 = dichroism_ratio(0.99, 3.0);
    report(
        4,
        "dichroism precision ratio in [3.0, 3.3] at T = 0.9 and in [9.5, 10.5] at T = 0.99 (s = 3)",
        (3.0..=3.3).contains(&r90) && (9.5..=10.5).contains(&r99),
        format!("T = 0.9: {r90}, T = 0.99: {r99}"),
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let (report_, _, elapsed) = validation();
    let grid = &report_.grid;
    let worst = grid.iter().map(|c| c.rel_diff).fold(0.0, f64::max);
    report(
        5,
        "Gaussian QFI matches Fock SLD QFI within 1% on the 54-point grid",
        grid.len() == 54 && worst <= ORACLE_TOL && grid.iter().all(|c| c.agrees),
        format!(
            "{} points, worst relative difference {worst:e}, full validation {:.1} s",
            grid.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_arbitration_report() {
    let (r, text, _) = validation();
    let parsed: serde_json::Value = serde_json::from_str(text).expect("report is JSON");
    let tensions = parsed["tensions"].as_array().expect("tensions listed");
    let ids: Vec<&str> = tensions.iter().map(|t| t["id"].as_str().unwrap()).collect();
    let unique = ids.iter().all(|id| ids.iter().filter(|x| *x == id).count() == 1);
    let required = ["bright_term_vs_balanced_limit", "lossy_displacement_term"]
        .iter()
        .all(|id| ids.contains(id));
    let backed = r.tensions.iter().all(|t| t.is_decided() && t.points.len() >= 3);
    let all: Vec<_> = r.grid.iter().chain(&r.anchors).copied().collect();
    let deterministic = arbitrate(&all) == r.tensions;
    let summary: Vec<String> = r
        .tensions
        .iter()
        .map(|t| format!("{} -> {} ({} points)", t.id, t.verdict, t.points.len()))
        .collect();
    report(
        6,
        "report written with one deterministic verdict per tension, each on >= 3 oracle points, chain ordered",
        unique && required && backed && deterministic && r.chain_ordered && r.bounds_respected,
        format!("{}; chain ordered {}", summary.join(", "), r.chain_ordered),
    );
}

#[test]
fn criterion_7_monte_carlo_crb() {
    let start = Instant::now();
    let records = monte_carlo_suite(100_000, SEED).unwrap();
    let elapsed = start.elapsed();
    let ok = records.len() == 4
        && records
            .iter()
            .all(|r| r.trials == 100_000 && r.within_tolerance && r.verdict.bound_respected())
        && elapsed < Duration::from_secs(60);
    let detail: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "{}: emp/pred {:.4}, {}",
                r.label,
                r.empirical_variance / r.predicted_variance,
                r.verdict_label
            )
        })
        .collect();
    report(
        7,
        "Monte Carlo variance within 5% of propagation and never below the QCRB at nu = 1e5",
        ok,
        format!("{}; {:.2} s", detail.join("; "), elapsed.as_secs_f64()),
    );
}

fn max_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    (a.d() - b.d()).camax().max((a.sigma() - b.sigma()).camax())
}

fn scale(s: &GaussianState) -> f64 {
    s.sigma().camax().max(s.d().camax()).max(1.0)
}

fn lossy_probe() -> impl Strategy<Value = GaussianState> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        0.0..1.5f64,
        0.0..std::f64::consts::TAU,
        0.05..1.0f64,
    )
        .prop_map(|(re, im, s, theta, eta)| {
            let pure = make_polarization_squeezed_probe(C64::new(re, im), s, theta).unwrap();
            apply_external_loss(&pure, eta).unwrap()
        })
}

fn suite<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

#[test]
fn criterion_8_invariant_suites() {
    let results = [
        (
            "channel composition",
            suite(
                256,
                (lossy_probe(), 0.0..1.0f64, 0.0..1.0f64),
                |(state, e1, e2)| {
                    let two = apply_external_loss(&apply_external_loss(&state, e1).unwrap(), e2).unwrap();
                    let one = apply_external_loss(&state, e1 * e2).unwrap();
                    prop_assert!(max_diff(&two, &one) < 1e-12 * scale(&state));
                    Ok(())
                },
            ),
        ),
        (
            "photon bookkeeping under loss",
            suite(256, (lossy_probe(), 0.0..1.0f64), |(state, eta)| {
                let lossy = apply_external_loss(&state, eta).unwrap();
                prop_assert!(
                    (lossy.mean_photons() - eta * state.mean_photons()).abs() < 1e-12 * scale(&state)
                );
                prop_assert!(lossy.is_physical());
                Ok(())
            }),
        ),
        (
            "photon bookkeeping in the Fock oracle",
            suite(32, (-1.5..1.5f64, 0.0..0.4f64, 0.1..1.0f64), |(re, s, eta)| {
                let probe =
                    build_probe_fock(&ProbeSpec::polarization_squeezed(C64::new(re, 0.0), s, 0.0), None)
                        .unwrap();
                let lossy = apply_loss_fock(&probe, eta, eta).unwrap();
                let expected = eta * moments(&probe).mean_photons();
                prop_assert!((moments(&lossy).mean_photons() - expected).abs() < 1e-9);
                Ok(())
            }),
        ),
        (
            "unitarity of birefringence",
            suite(
                256,
                (lossy_probe(), -6.0..6.0f64, -6.0..6.0f64),
                |(state, delta, common)| {
                    let out =
                        apply_birefringence(&state, &BirefringencePhases::from_delta(delta, common)).unwrap();
                    prop_assert!((out.mean_photons() - state.mean_photons()).abs() < 1e-10 * scale(&state));
                    let (a, b) = (state.symplectic_eigenvalues(), out.symplectic_eigenvalues());
                    prop_assert!((a.lambda1 - b.lambda1).abs() < 1e-8 * a.lambda1);
                    prop_assert!((a.lambda2 - b.lambda2).abs() < 1e-8 * a.lambda2);
                    Ok(())
                },
            ),
        ),
        (
            "purity of probe states",
            suite(
                256,
                (
                    -3.0..3.0f64,
                    -3.0..3.0f64,
                    0.0..1.5f64,
                    0.0..std::f64::consts::TAU,
                    any::<bool>(),
                ),
                |(re, im, s, theta, twin)| {
                    let a = C64::new(re, im);
                    let state = if twin {
                        make_twin_amplitude_squeezed_probe(a, s, theta).unwrap()
                    } else {
                        make_polarization_squeezed_probe(a, s, theta).unwrap()
                    };
                    let spec = state.symplectic_eigenvalues();
                    prop_assert!((spec.lambda1 - 1.0).abs() < 1e-10 && (spec.lambda2 - 1.0).abs() < 1e-10);
                    Ok(())
                },
            ),
        ),
        (
            "determinism under fixed seeds",
            suite(
                16,
                (any::<u64>(), 1usize..2000, 0.0..1.0f64),
                |(seed, trials, s)| {
                    let probe = ProbeSpec::polarization_squeezed(C64::new(100.0, 0.0), s, 0.0);
                    let sample =
                        ChiralSample::birefringent(0.4, PathLength::from_dm(1.0), 1.0).with_efficiency(0.9);
                    let model = BirefringenceModel::new(probe, sample).unwrap();
                    let plan = ExperimentPlan::new(Scheme::Balanced { model, xi: 0.1 }, trials, seed);
                    prop_assert_eq!(run_plan(&plan).unwrap(), run_plan(&plan).unwrap());
                    Ok(())
                },
            ),
        ),
    ];
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    report(
        8,
        "invariant suites pass",
        failed.is_empty(),
        if failed.is_empty() {
            names.join(", ")
        } else {
            failed.join("; ")
        },
    );
}
