use proptest::prelude::*;
use serde_json::Value;
use sha2::{Digest, Sha256};

use wpl_core::experiments::{fit_points, run_experiment, run_equivalence_suite, ExperimentConfig, ExperimentKind, Status, SuiteConfig};
use wpl_core::extremizers::ExtremizerKind;

fn small_squarefunction(p: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults_for(ExperimentKind::Squarefunction);
    c.p = p;
    c.k_min = 3;
    c.k_max = 5;
    c.khintchine_samples = 8;
    c
}

#[test]
fn jsonl_layout_and_content_hash() {
    let out = run_experiment(&small_squarefunction(2.0)).unwrap();
    let text = out.to_jsonl();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3 + 3);
    let kinds: Vec<String> = lines.iter().map(|l| serde_json::from_str::<Value>(l).unwrap()["type"].as_str().unwrap().to_string()).collect();
    assert_eq!(kinds, ["header", "record", "record", "record", "fit", "trailer"]);
    let body: String = lines[..5].iter().map(|l| format!("{l}\n")).collect();
    let trailer: Value = serde_json::from_str(lines[5]).unwrap();
    assert_eq!(trailer["content_hash"], hex::encode(Sha256::digest(body.as_bytes())));

    let csv = out.to_csv();
    assert!(csv.lines().any(|l| l == "k,lhs,rhs,log2_ratio"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn p2_square_function_ratio_is_flat() {
    let out = run_experiment(&small_squarefunction(2.0)).unwrap();
    assert!(out.fit.slope.abs() < 0.02, "{}", out.fit.slope);
    assert!(out.passed);
    for r in &out.records {
        let kh = r.diagnostics["khintchine_ratio"];
        assert!((0.25..=4.0).contains(&kh));
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let c = small_squarefunction(4.0);
    assert_eq!(run_experiment(&c).unwrap().to_jsonl(), run_experiment(&c).unwrap().to_jsonl());
}

#[test]
fn seed_changes_random_records() {
    let mut c = ExperimentConfig::defaults_for(ExperimentKind::Decoupling);
    c.extremizer = ExtremizerKind::RandomAnnulus;
    c.p = 4.0;
    c.k_min = 3;
    c.k_max = 5;
    let a = run_experiment(&c).unwrap();
    c.seed = 2;
    let b = run_experiment(&c).unwrap();
    assert_ne!(a.records[0].lhs, b.records[0].lhs);
}

#[test]
fn wrong_family_is_a_config_error() {
    let mut c = ExperimentConfig::defaults_for(ExperimentKind::Sharpness);
    c.extremizer = ExtremizerKind::Unit;
    let err = run_experiment(&c).unwrap_err();
    assert!(err.is_usage());
    assert!(err.to_string().contains("extremizer"), "{err}");
}

#[test]
fn fixed_grid_below_nyquist_names_the_bound() {
    let mut c = ExperimentConfig::defaults_for(ExperimentKind::Decoupling);
    c.points = Some(64);
    c.k_max = 6;
    let err = run_experiment(&c).unwrap_err();
    assert!(err.is_usage());
    assert!(err.to_string().contains("Nyquist"), "{err}");
}

#[test]
fn flat_phase_is_recorded_without_a_bound() {
    let mut c = ExperimentConfig::defaults_for(ExperimentKind::LocalSmoothing);
    c.phase = "linear".into();
    c.k_min = 3;
    c.k_max = 5;
    let out = run_experiment(&c).unwrap();
    assert!(out.passed);
    assert!(out.warnings.iter().any(|w| w.contains("Hessian rank 0")));
}

#[test]
fn suite_detects_a_dropped_sector() {
    let cfg = SuiteConfig { points: 128, k_min: 2, k_max: 4, drop_sector: Some(2), ..Default::default() };
    let report = run_equivalence_suite(&cfg).unwrap();
    assert!(!report.passed);
    let unity = report.tests.iter().find(|t| t.name == "partition-of-unity").unwrap();
    assert_eq!(unity.status, Status::Fail);
    let zero = report.tests.iter().find(|t| t.name == "zero-input").unwrap();
    assert_eq!(zero.status, Status::Skip);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_recovers_exact_power_laws(slope in -2.0f64..2.0, c in -5.0f64..5.0, k0 in 0u32..6, len in 3usize..8) {
        let pts: Vec<(u32, f64)> = (0..len as u32).map(|j| (k0 + j, c + slope * f64::from(k0 + j))).collect();
        let fit = fit_points(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - c).abs() < 1e-8);
        prop_assert!(fit.max_residual < 1e-9);
    }
}
