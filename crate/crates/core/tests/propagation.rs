use wpl_core::extremizers::{build_family, random_annulus, ExtremizerKind};
use wpl_core::propagator::{propagate, spacetime_lp_norms, translation_defect, TimeRule};
use wpl_core::{GridSpec, PhaseSymbol};

#[test]
fn packet_translation_defect_is_linear_in_small_t() {
    let ext = build_family(ExtremizerKind::Full, 2, 6, None, 1, None).unwrap();
    let h = &ext.components[3];
    let nu = &ext.directions[3];
    let t = 2f64.powi(-6);
    let a = translation_defect(h, nu, t, &PhaseSymbol::Euclidean, 2.0).unwrap();
    let b = translation_defect(h, nu, t / 2.0, &PhaseSymbol::Euclidean, 2.0).unwrap();
    assert!(a.defect <= a.bound * (1.0 + 1e-6));
    assert!(b.defect <= b.bound * (1.0 + 1e-6));
    let ratio = (a.defect / t) / (b.defect / (t / 2.0));
    assert!((ratio - 1.0).abs() < 0.05, "defect/t ratio {ratio}");
}

#[test]
fn zero_time_has_zero_defect() {
    let ext = build_family(ExtremizerKind::Unit, 2, 4, None, 1, None).unwrap();
    let r = translation_defect(&ext.components[0], &ext.directions[0], 0.0, &PhaseSymbol::Euclidean, 2.0).unwrap();
    assert_eq!(r.defect, 0.0);
}

#[test]
fn propagation_preserves_l2_and_composes() {
    let f = random_annulus(2, 4, 3, GridSpec::standard(2, 128).unwrap()).unwrap().total;
    let ph = PhaseSymbol::Euclidean;
    let u = propagate(&propagate(&f, 0.2, &ph), 0.3, &ph);
    let v = propagate(&f, 0.5, &ph);
    let err = u.values().iter().zip(v.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12);
    assert!((v.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-13);
}

#[test]
fn coarse_time_rules_are_flagged() {
    let f = random_annulus(2, 5, 3, GridSpec::standard(2, 256).unwrap()).unwrap().total;
    let coarse = spacetime_lp_norms(&f, &[4.0], &PhaseSymbol::Euclidean, &TimeRule { intervals: 8 }, 2.0).unwrap();
    let fine = spacetime_lp_norms(&f, &[4.0], &PhaseSymbol::Euclidean, &TimeRule::for_scale(5), 2.0).unwrap();
    assert!(coarse.coarse_rule);
    assert!(!fine.coarse_rule);
}

#[test]
fn full_family_components_scale_like_the_packet_norm() {
    // ||f_nu||_6 ~ 2^{-k/4}.
    let norms: Vec<f64> = (3..=5)
        .map(|k| build_family(ExtremizerKind::Full, 2, k, None, 1, None).unwrap().components[0].lp_norm(6.0, 2.0).unwrap())
        .collect();
    for w in norms.windows(2) {
        assert!(((w[1] / w[0]).log2() + 0.25).abs() < 0.02, "{norms:?}");
    }
}
