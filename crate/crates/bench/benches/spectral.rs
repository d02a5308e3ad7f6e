use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;

use spectral_riesz::bounds::{self, VerifyOptions};
use spectral_riesz::exact::rat;
use spectral_riesz::riesz::{Spectrum, SpectrumQuery, DEFAULT_LEVEL_CAP};
use spectral_riesz::{scan, sumrules, Space};

fn spectrum_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectrum_build");
    for space in ["sphere:2", "sphere:7", "cp:6", "cayley"] {
        let space: Space = space.parse().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(space.descriptor()), &space, |b, s| {
            b.iter(|| Spectrum::up_to_level(SpectrumQuery::laplacian(*s), black_box(1000)).unwrap())
        });
    }
    g.finish();
}

fn riesz_eval(c: &mut Criterion) {
    let s3: Space = "sphere:3".parse().unwrap();
    let t = Spectrum::covering(SpectrumQuery::laplacian(s3), 1.0e6, DEFAULT_LEVEL_CAP).unwrap();
    c.bench_function("riesz_f64_r2_sphere3", |b| b.iter(|| t.riesz(2, black_box(987_654.25))));
    let z = rat(3_950_001, 4);
    let t = Spectrum::covering_exact(SpectrumQuery::laplacian(s3), &z, DEFAULT_LEVEL_CAP).unwrap();
    c.bench_function("riesz_exact_r2_sphere3", |b| b.iter(|| t.riesz_exact(2, black_box(&z))));
    let k = BigUint::from(123_456u32);
    c.bench_function("prefix_sums_sphere3", |b| b.iter(|| t.prefix_sums(black_box(&k))));
}

fn verify_bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    for id in ["s2.r1.lower", "sd.r2.twosided", "fail.hemi.polya.d≥3"] {
        let spec = bounds::lookup(id).unwrap();
        let params = spec.default_params();
        g.bench_function(id, |b| b.iter(|| bounds::verify(id, &params, &VerifyOptions::default()).unwrap()));
    }
    g.finish();
}

fn sum_rules(c: &mut Criterion) {
    let mut g = c.benchmark_group("sumrules");
    g.sample_size(10);
    let s2: Space = "sphere:2".parse().unwrap();
    g.bench_function("pq_identity_sphere2_l50", |b| {
        b.iter(|| sumrules::check_pq_identity(&s2, black_box(50)).unwrap())
    });
    g.bench_function("trace_series_sphere2_l1000", |b| {
        b.iter(|| sumrules::trace_identity_partial(&s2, black_box(1000)).unwrap())
    });
    g.finish();
}

fn figures(c: &mut Criterion) {
    let mut g = c.benchmark_group("figure");
    g.sample_size(10);
    for id in ["f1", "f9"] {
        g.bench_function(id, |b| b.iter(|| scan::figure(id, scan::DEFAULT_RESOLUTION).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, spectrum_build, riesz_eval, verify_bounds, sum_rules, figures);
criterion_main!(benches);
