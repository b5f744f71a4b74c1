use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wpl_bench::annulus_input;
use wpl_core::extremizers::{build_family, ExtremizerKind};
use wpl_core::norms::hfio_discrete_norm;
use wpl_core::propagator::{spacetime_lp_norm, windowed_hfio_time_norm, TimeRule, WindowedOptions};
use wpl_core::{PhaseSymbol, Window};

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("fft-roundtrip");
    for points in [128usize, 256, 512] {
        let (f, _) = annulus_input(4, points);
        let field = f.to_field();
        g.bench_with_input(BenchmarkId::from_parameter(points), &field, |b, field| {
            b.iter(|| field.inverse().unwrap().forward().unwrap())
        });
    }
    g.finish();
}

fn discrete_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("hfio-discrete-p4");
    for k in [4u32, 5, 6] {
        let (f, part) = annulus_input(k, 512);
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| b.iter(|| hfio_discrete_norm(&f, 0.0, 4.0, &part, 2.0).unwrap()));
    }
    g.finish();
}

fn time_norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("time-norms");
    g.sample_size(10);
    let (f, part) = annulus_input(4, 256);
    let phase = PhaseSymbol::Euclidean;
    g.bench_function("spacetime-p6-k4", |b| b.iter(|| spacetime_lp_norm(&f, 6.0, &phase, &TimeRule::for_scale(4), 2.0).unwrap()));
    let window = Window::build();
    let opts = WindowedOptions::default();
    g.bench_function("windowed-p4-k4", |b| {
        b.iter(|| windowed_hfio_time_norm(&f, 0.0, 4.0, &phase, &window, &part, &opts).unwrap())
    });
    g.finish();
}

fn extremizers(c: &mut Criterion) {
    let mut g = c.benchmark_group("extremizer-build");
    g.sample_size(10);
    g.bench_function("full-k4", |b| b.iter(|| build_family(ExtremizerKind::Full, 2, 4, None, 1, None).unwrap()));
    g.finish();
}

criterion_group!(benches, transforms, discrete_norm, time_norms, extremizers);
criterion_main!(benches);
