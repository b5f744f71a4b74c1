use wpl_core::extremizers::random_annulus;
use wpl_core::{GridSpec, SphereRule, Spectrum, WavePacketSystem};

fn annulus(k: u32) -> Spectrum {
    random_annulus(2, k, 21, GridSpec::standard(2, 128).unwrap()).unwrap().total
}

#[test]
fn reconstruction_defect_decreases_under_refinement() {
    let sys = WavePacketSystem::new(2).unwrap();
    let f = annulus(4);
    let base = SphereRule::for_scale(2, 4).unwrap().len();
    let defects: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|m| sys.reconstruction_defect(&f, &SphereRule::uniform(2, m * base).unwrap()).unwrap().defect)
        .collect();
    for w in defects.windows(2) {
        assert!(w[1] < w[0], "{defects:?}");
    }
    assert!(defects[2] < 1e-2, "{defects:?}");
    assert!(defects[3] < 1e-3, "{defects:?}");
    let matched = sys.reconstruction_defect(&f, &SphereRule::matched(2, 4).unwrap()).unwrap();
    assert_eq!(matched.nodes, 4 * base);
}

#[test]
fn zero_input_sets_flag() {
    let sys = WavePacketSystem::new(2).unwrap();
    let f = Spectrum::empty(GridSpec::standard(2, 64).unwrap());
    let r = sys.reconstruction_defect(&f, &SphereRule::for_scale(2, 3).unwrap()).unwrap();
    assert!(r.zero_input);
    assert_eq!(r.defect, 0.0);
}

#[test]
fn fast_packet_matches_adaptive_reference() {
    let sys = WavePacketSystem::new(2).unwrap();
    let omega = [1.0, 0.0];
    for (r, a) in [(3.0, 0.1), (10.0, 0.05), (40.0, 0.2), (0.3, 1.0), (100.0, 0.0)] {
        let f64_a: f64 = a;
        let xi = [r * f64_a.cos(), r * f64_a.sin()];
        let fast = sys.eval_packet_fast(&omega, &xi);
        let reference = sys.eval_continuous_packet(&omega, &xi, 1e-12).unwrap();
        assert!((fast - reference).abs() < 1e-7, "r = {r}, angle {a}: {fast} vs {reference}");
    }
}

#[test]
fn continuous_norm_is_positive_and_flags_coarse_rules() {
    let sys = WavePacketSystem::new(2).unwrap();
    let f = annulus(4);
    let coarse = sys.hfio_continuous_norm(&f, 0.0, 4.0, &SphereRule::uniform(2, 6).unwrap(), 2.0).unwrap();
    let fine = sys.hfio_continuous_norm(&f, 0.0, 4.0, &SphereRule::matched(2, 4).unwrap(), 2.0).unwrap();
    assert!(coarse.coarse_rule);
    assert!(!fine.coarse_rule);
    assert!(fine.value > 0.0 && fine.value.is_finite());
}

#[test]
fn three_dimensional_calderon_condition() {
    let sys = WavePacketSystem::new(3).unwrap();
    for r in [0.3, 1.0, 7.5, 300.0] {
        assert!((sys.calderon_integral(r).unwrap() - 1.0).abs() < 1e-6);
    }
}
