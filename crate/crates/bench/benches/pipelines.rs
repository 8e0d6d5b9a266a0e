use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rieszlab_core::criteria::{GTable, GTilde};
use rieszlab_core::linalg::c;
use rieszlab_core::operator_lab::build_truncated_t;
use rieszlab_core::scenarios::{make_counterexample, make_power_alpha};
use rieszlab_core::sequence_models::{Spectrum, WeightSequence};
use rieszlab_core::spectral_analysis::{
    contour_projection, spectral_report, Contour, Eigensystem, SpectralParams,
};

fn tables(c: &mut Criterion) {
    let lin = Spectrum::linear();
    let w = WeightSequence::sqrtlog_loglog(1.0).unwrap();
    let mut g = c.benchmark_group("tables");
    g.sample_size(10);
    g.bench_function("g_table_fft_2^16", |b| {
        b.iter(|| GTable::build(&lin, &w, 1 << 16, 1 << 18).unwrap())
    });
    let geo = Spectrum::power(1.0, 2.0).unwrap();
    g.bench_function("g_table_direct_2^10", |b| {
        b.iter(|| GTable::build(&geo, &w, 1 << 10, 1 << 12).unwrap())
    });
    let lp = WeightSequence::log_power(2.0).unwrap();
    g.bench_function("g_tilde_2^12", |b| {
        b.iter(|| {
            let gt = GTilde::build(&lin, &lp, 1 << 12, 1 << 14).unwrap();
            black_box(gt.value(16, 2))
        })
    });
    g.finish();
}

fn spectral(cr: &mut Criterion) {
    let mut g = cr.benchmark_group("spectral");
    g.sample_size(10);
    let (lin, _, v) = make_power_alpha(1.0, 160, 0).unwrap();
    let t = build_truncated_t(&lin, &v, 160).unwrap();
    g.bench_function("eigensystem_dense_160", |b| {
        b.iter(|| Eigensystem::new(t.matrix()).unwrap())
    });
    let eigs = Eigensystem::new(t.matrix()).unwrap();
    let circle = Contour::Circle {
        center: c(40.0, 0.0),
        radius: 0.5,
    };
    g.bench_function("contour_projection_64", |b| {
        b.iter(|| contour_projection(&eigs, &circle, 64).unwrap())
    });
    let mut p = SpectralParams::new(160, 11, 1.6532414807006717, 3.1814039777964354);
    p.buffer = Some(20);
    g.bench_function("spectral_report_160", |b| {
        b.iter(|| spectral_report(&lin, &v, &p).unwrap())
    });
    let (cl, _, cv) = make_counterexample(30, 1802).unwrap();
    let ct = build_truncated_t(&cl, &cv, 1802).unwrap();
    g.bench_function("eigensystem_counterexample_1802", |b| {
        b.iter(|| Eigensystem::new(ct.matrix()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, tables, spectral);
criterion_main!(benches);
