//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpl_core::directions::circle_count;
use wpl_core::experiments::{fit_points, run_experiment, ExperimentConfig, ExperimentKind};
use wpl_core::extremizers::{build_family, random_annulus, ExtremizerKind};
use wpl_core::norms::hfio_discrete_norm;
use wpl_core::propagator::{
    decoupling_rhs, propagate_field, spacetime_lp_norm, translation_defect, windowed_hfio_time_norm, TimeRule, WindowedOptions,
};
use wpl_core::{DirectionSet, Domain, Field, GridSpec, PhaseSymbol, SectorPartition, SphereRule, WavePacketSystem, Window};

const IDENTITY_TOL: f64 = 1e-10;
const PARTITION_TOL: f64 = 1e-8;
const CALDERON_TOL: f64 = 1e-6;
const P2_BAND: f64 = 2.0;
const P2_SLOPE: f64 = 0.05;
const CONSERVATION_TOL: f64 = 1e-8;
const EQUIVALENCE_SLOPE: f64 = 0.07;
const RECONSTRUCTION_TOL: f64 = 1e-2;
const TRANSLATION_SLACK: f64 = 1e-6;
const SCALING_TOL: f64 = 0.05;
const LOWER_MARGIN: f64 = 0.05;
const UPPER_MARGIN: f64 = 0.1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn slope(ks: &[u32], values: &[f64]) -> f64 {
    let pts: Vec<(u32, f64)> = ks.iter().copied().zip(values.iter().map(|v| v.log2())).collect();
    fit_points(&pts).expect("fit").slope
}

fn list(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    s.join(" ")
}

fn random_field(grid: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    Field::from_values(grid, Domain::Space, v).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn spectral_identities() -> Outcome {
    let grid = GridSpec::standard(2, 64).map_err(|e| e.to_string())?;
    let f = random_field(grid, 7);
    let scale = f.max_abs();
    let hat = f.forward().unwrap();
    let back = hat.inverse().unwrap();
    let roundtrip = max_diff(back.values(), f.values()) / scale;

    // Parseval against the plain Riemann sum of |f|^2 on the cell.
    let space_l2 = (f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume()).sqrt();
    let parseval = (hat.frequency_l2_norm().unwrap() / space_l2 - 1.0).abs();

    let m1 = |xi: &[f64]| Complex64::new(1.0 + xi[0] * xi[0], 0.0);
    let m2 = |xi: &[f64]| Complex64::from_polar(1.0, xi[1]);
    let m12 = |xi: &[f64]| m1(xi) * m2(xi);
    let a = hat.apply_multiplier(&m1).unwrap().apply_multiplier(&m2).unwrap();
    let b = hat.apply_multiplier(&m12).unwrap();
    let composition = max_diff(a.values(), b.values()) / b.max_abs();

    // v t is an exact grid shift of (8, -4) cells.
    let h = grid.spacing();
    let v = [1.0, -0.5];
    let t = 8.0 * h;
    let smooth = Field::from_space_fn(grid, |x| Complex64::new((x[0]).sin() * (2.0 * x[1]).cos(), (3.0 * x[0] + x[1]).cos()));
    let phase = PhaseSymbol::Linear { v: v.to_vec() };
    let moved = propagate_field(&smooth.forward().unwrap(), t, &phase).unwrap().inverse().unwrap();
    let n = grid.points;
    let mut translation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let src = ((i + 8) % n) * n + (j + n - 4) % n;
            translation = translation.max((moved.values()[i * n + j] - smooth.values()[src]).norm());
        }
    }
    check(
        roundtrip < IDENTITY_TOL && parseval < IDENTITY_TOL && composition < 1e-14 && translation < IDENTITY_TOL,
        format!("roundtrip {roundtrip:.1e}, Parseval {parseval:.1e}, composition {composition:.1e}, translation {translation:.1e}"),
    )
}

/// Largest number of points on the circle with pairwise chord at least `delta`.
fn circle_packing_oracle(k: u32) -> usize {
    let delta = 2f64.powf(-(k as f64) / 2.0);
    // Equality is allowed, and pi / asin(1/2) rounds just below 6.
    (PI / (delta / 2.0).asin() + 1e-9).floor() as usize
}

fn partition_structure() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, kmax) in [(2usize, 9u32), (3, 5)] {
        for k in 0..=kmax {
            let d = DirectionSet::build(n, k).map_err(|e| e.to_string())?;
            if let Err(e) = d.verify() {
                ok = false;
                notes.push(format!("n={n} k={k}: {e}"));
            }
        }
    }
    for k in 0..=9 {
        if circle_count(k) != circle_packing_oracle(k) {
            ok = false;
            notes.push(format!("k={k}: count {} vs oracle {}", circle_count(k), circle_packing_oracle(k)));
        }
    }
    ok &= circle_count(0) == 6 && circle_count(4) == 25;

    let grid = GridSpec::standard(2, 512).unwrap();
    let mut unity: f64 = 0.0;
    let mut xi = [0.0; 2];
    for k in 3..=7 {
        let part = SectorPartition::build(2, k).unwrap();
        for j in 1..grid.len() {
            grid.frequency(j, &mut xi);
            unity = unity.max((part.total(&xi) - 1.0).abs());
        }
    }
    let grid3 = GridSpec::standard(3, 32).unwrap();
    let mut xi3 = [0.0; 3];
    for k in 2..=4 {
        let part = SectorPartition::build(3, k).unwrap();
        for j in 1..grid3.len() {
            grid3.frequency(j, &mut xi3);
            unity = unity.max((part.total(&xi3) - 1.0).abs());
        }
    }
    ok &= unity <= PARTITION_TOL;

    let sys = WavePacketSystem::new(2).unwrap();
    let mut calderon: f64 = 0.0;
    for j in 0..200 {
        let r = 2f64.powf(-4.0 + 16.0 * j as f64 / 199.0);
        calderon = calderon.max((sys.calderon_integral(r).unwrap() - 1.0).abs());
    }
    ok &= calderon <= CALDERON_TOL;

    // phi_omega vanishes for |xi| < 1/8 and for |xi_hat - omega| >= sqrt(2 / |xi|).
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut support_violations = 0;
    for _ in 0..2000 {
        let a: f64 = rng.random_range(0.0..2.0 * PI);
        let b: f64 = rng.random_range(0.0..2.0 * PI);
        let r: f64 = 2f64.powf(rng.random_range(-5.0..8.0));
        let omega = [a.cos(), a.sin()];
        let xi = [r * b.cos(), r * b.sin()];
        let dist = ((b.cos() - a.cos()).powi(2) + (b.sin() - a.sin()).powi(2)).sqrt();
        let must_vanish = r < 0.125 || dist >= (2.0 / r).sqrt();
        if must_vanish && sys.eval_packet_fast(&omega, &xi) != 0.0 {
            support_violations += 1;
        }
    }
    ok &= support_violations == 0;
    if notes.is_empty() {
        notes.push("direction sets verified".into());
    }
    check(
        ok,
        format!(
            "{}; max |sum chi - 1| {unity:.1e}; Calderon {calderon:.1e}; packet support violations {support_violations}",
            notes.join("; ")
        ),
    )
}

fn p2_oracles() -> Outcome {
    let grid = GridSpec::standard(2, 1024).unwrap();
    let window = Window::build();
    let opts = WindowedOptions::default();
    let g2 = window.power_integral(2.0, opts.range.0, opts.range.1).sqrt();
    let ks: Vec<u32> = (3..=7).collect();
    let (mut disc, mut dec, mut conservation) = (Vec::new(), Vec::new(), 0.0f64);
    for &k in &ks {
        let f = random_annulus(2, k, 11, grid).unwrap().total;
        let part = SectorPartition::build(2, k).unwrap();
        let l2 = f.l2_norm();
        disc.push(hfio_discrete_norm(&f, 0.0, 2.0, &part, 2.0).unwrap().value / l2);
        dec.push(decoupling_rhs(&f, 2.0, &PhaseSymbol::Euclidean, &window, &part, &opts).unwrap().value / (g2 * l2));
        let st = spacetime_lp_norm(&f, 2.0, &PhaseSymbol::Euclidean, &TimeRule::for_scale(k), 1.0).unwrap();
        conservation = conservation.max((st / l2 - 1.0).abs());
    }
    let in_band = |v: &[f64]| v.iter().all(|r| (1.0 / P2_BAND..=P2_BAND).contains(r));
    let (sd, sw) = (slope(&ks, &disc), slope(&ks, &dec));
    check(
        in_band(&disc) && in_band(&dec) && sd.abs() <= P2_SLOPE && sw.abs() <= P2_SLOPE && conservation <= CONSERVATION_TOL,
        format!(
            "discrete/L2 {} (slope {sd:.4}); windowed/(|g|_2 L2) {} (slope {sw:.4}); L2 conservation {conservation:.1e}",
            list(&disc),
            list(&dec)
        ),
    )
}

fn continuous_consistency() -> Outcome {
    let grid = GridSpec::standard(2, 512).unwrap();
    let sys = WavePacketSystem::new(2).unwrap();
    let ks: Vec<u32> = (3..=6).collect();
    let mut ratios = Vec::new();
    let mut defect: f64 = 0.0;
    for &k in &ks {
        let f = random_annulus(2, k, 5, grid).unwrap().total;
        let part = SectorPartition::build(2, k).unwrap();
        let rule = SphereRule::matched(2, k).unwrap();
        let c = sys.hfio_continuous_norm(&f, 0.0, 4.0, &rule, 2.0).unwrap();
        let d = hfio_discrete_norm(&f, 0.0, 4.0, &part, 2.0).unwrap();
        ratios.push(c.value / d.value);
        defect = defect.max(sys.reconstruction_defect(&f, &rule).unwrap().defect);
    }
    let s = slope(&ks, &ratios);
    check(
        s.abs() <= EQUIVALENCE_SLOPE && defect < RECONSTRUCTION_TOL,
        format!("continuous/discrete p=4 {} (slope {s:.4}); reconstruction defect {defect:.1e}", list(&ratios)),
    )
}

fn windowed_band() -> Outcome {
    let grid = GridSpec::standard(2, 512).unwrap();
    let window = Window::build();
    let opts = WindowedOptions::default();
    let ks: Vec<u32> = (3..=6).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for phase in [PhaseSymbol::Euclidean, PhaseSymbol::Linear { v: vec![0.6, 0.8] }] {
        for p in [2.0, 4.0] {
            let mut ratios = Vec::new();
            for &k in &ks {
                let f = random_annulus(2, k, 9, grid).unwrap().total;
                let part = SectorPartition::build(2, k).unwrap();
                let w = windowed_hfio_time_norm(&f, 0.0, p, &phase, &window, &part, &opts).unwrap();
                let d = hfio_discrete_norm(&f, 0.0, p, &part, 2.0).unwrap();
                ratios.push(w.value / d.value);
            }
            let s = slope(&ks, &ratios);
            ok &= s.abs() <= EQUIVALENCE_SLOPE;
            notes.push(format!("{} p={p} slope {s:.4}", phase.name()));
        }
    }
    check(ok, notes.join("; "))
}

fn translation_estimate() -> Outcome {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for kind in [ExtremizerKind::Full, ExtremizerKind::Unit] {
        for k in [4u32, 5] {
            let ext = build_family(kind, 2, k, None, 1, None).unwrap();
            let m = ext.components.len();
            for nu in [0, m / 3] {
                for t in [2f64.powi(-(k as i32)), 0.1, 0.25] {
                    let h = &ext.components[nu];
                    let r = translation_defect(h, &ext.directions[nu], t, &PhaseSymbol::Euclidean, 2.0).unwrap();
                    cases += 1;
                    worst = worst.max(r.defect / r.bound);
                    if r.defect > r.bound * (1.0 + TRANSLATION_SLACK) {
                        failures.push(format!("{kind} k={k} nu={nu} t={t}: {} > {}", r.defect, r.bound));
                    }
                }
            }
        }
    }
    let ext = build_family(ExtremizerKind::Full, 2, 4, None, 1, None).unwrap();
    let linear = PhaseSymbol::Linear { v: vec![1.0, 0.0] };
    let mut linear_defect: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        let r = translation_defect(&ext.components[1], &ext.directions[1], t, &linear, 2.0).unwrap();
        if r.kappa != 0.0 {
            failures.push(format!("linear phase kappa {}", r.kappa));
        }
        linear_defect = linear_defect.max(r.defect);
    }
    check(
        failures.is_empty() && cases >= 20 && linear_defect <= IDENTITY_TOL,
        format!("{cases} cases, max defect/bound {worst:.3}; linear kappa 0, defect {linear_defect:.1e}; {}", failures.join("; ")),
    )
}

fn extremizer_scalings() -> Outcome {
    let ks: Vec<u32> = (3..=7).collect();
    let n = 2.0;
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [4.0, 6.0] {
        let (mut fnu, mut hf, mut hg) = (Vec::new(), Vec::new(), Vec::new());
        for &k in &ks {
            let part = SectorPartition::build(2, k).unwrap();
            let full = build_family(ExtremizerKind::Full, 2, k, None, 1, None).unwrap();
            let unit = build_family(ExtremizerKind::Unit, 2, k, None, 1, None).unwrap();
            fnu.push(full.components[0].lp_norm(p, 2.0).unwrap());
            hf.push(hfio_discrete_norm(&full.total, 0.0, p, &part, 2.0).unwrap().value);
            hg.push(hfio_discrete_norm(&unit.total, 0.0, p, &part, 2.0).unwrap().value);
        }
        let targets = [
            ("|f_nu|", slope(&ks, &fnu), -(n + 1.0) / (2.0 * p)),
            ("H(sum f_nu)", slope(&ks, &hf), (n - 1.0) / 2.0 * (0.5 - 1.0 / p) - 1.0 / p),
            ("H(sum g_nu)", slope(&ks, &hg), (n - 1.0) / 4.0),
        ];
        for (name, got, want) in targets {
            ok &= (got - want).abs() <= SCALING_TOL;
            notes.push(format!("p={p} {name} {got:.4} vs {want:.4}"));
        }
    }
    check(ok, notes.join("; "))
}

fn config(kind: ExperimentKind, p: f64, family: ExtremizerKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults_for(kind);
    c.p = p;
    c.extremizer = family;
    c.k_min = 3;
    c.k_max = 6;
    c
}

fn fitted(c: &ExperimentConfig) -> Result<f64, String> {
    run_experiment(c).map(|o| o.fit.slope).map_err(|e| e.to_string())
}

fn sharpness() -> Outcome {
    let s12 = fitted(&config(ExperimentKind::Sharpness, 12.0, ExtremizerKind::Full))?;
    let s6 = fitted(&config(ExperimentKind::Sharpness, 6.0, ExtremizerKind::Full))?;
    let sq = fitted(&config(ExperimentKind::Squarefunction, 4.0, ExtremizerKind::Unit))?;
    check(
        s12 >= 0.125 - LOWER_MARGIN && s6 >= -LOWER_MARGIN && sq >= -LOWER_MARGIN,
        format!("sharpness p=12 {s12:.4}, p=6 {s6:.4}; square function p=4 {sq:.4}"),
    )
}

fn upper_slopes() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for family in [ExtremizerKind::Full, ExtremizerKind::Unit, ExtremizerKind::RandomAnnulus] {
        for (p, d) in [(6.0, 1.0 / 6.0), (4.0, 0.125)] {
            let s = fitted(&config(ExperimentKind::Decoupling, p, family))?;
            ok &= s <= d + UPPER_MARGIN;
            notes.push(format!("{family} p={p} {s:.4}"));
        }
    }
    for family in [ExtremizerKind::Full, ExtremizerKind::RandomAnnulus] {
        let s = fitted(&config(ExperimentKind::LocalSmoothing, 12.0, family))?;
        ok &= s <= UPPER_MARGIN;
        notes.push(format!("local smoothing {family} {s:.4}"));
    }
    check(ok, notes.join("; "))
}

fn determinism() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for c in [
        config(ExperimentKind::Squarefunction, 4.0, ExtremizerKind::Unit),
        config(ExperimentKind::Decoupling, 4.0, ExtremizerKind::RandomAnnulus),
    ] {
        let mut c = c;
        c.k_max = 5;
        let a = run_experiment(&c).map_err(|e| e.to_string())?.to_jsonl();
        let b = run_experiment(&c).map_err(|e| e.to_string())?.to_jsonl();
        ok &= a == b;
        notes.push(format!("{} identical: {}", c.experiment, a == b));
    }
    check(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("spectral identities", spectral_identities),
        ("partition and packet structure", partition_structure),
        ("p=2 oracles", p2_oracles),
        ("continuous vs discrete norm", continuous_consistency),
        ("windowed time norm band", windowed_band),
        ("translation estimate", translation_estimate),
        ("extremizer scalings", extremizer_scalings),
        ("sharpness slopes", sharpness),
        ("upper slopes", upper_slopes),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} ({name}): PASS [{secs:.1}s] {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
