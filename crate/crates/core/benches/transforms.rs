//! Hot paths on a one-thread pool against the default pool.
//!
//! `cargo bench --no-default-features` runs the same groups through the
//! sequential fallback; both labels then measure the same code.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sphere_edgelab_core::edge::coefficient_map;
use sphere_edgelab_core::geometry::SpherePoint;
use sphere_edgelab_core::region::{graph_region_coeffs, GraphRegion};
use sphere_edgelab_core::sh::{sht_forward_real, QuadratureGrid};
use sphere_edgelab_core::wavelet::WaveletSpec;
use std::hint::black_box;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![("threads-1".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if default > 1 {
        out.push((format!("threads-{default}"), rayon::ThreadPoolBuilder::new().num_threads(default).build().unwrap()));
    }
    out
}

fn sht(c: &mut Criterion) {
    let region = GraphRegion::example();
    let grid = QuadratureGrid::new(256);
    let samples = grid.sample(|t, p| region.contains(&SpherePoint::from_polar(t, p)) as u8 as f64);
    let mut group = c.benchmark_group("sht_forward_real/degree256");
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            pool.install(|| b.iter(|| sht_forward_real(&grid, black_box(&samples), 128).unwrap()))
        });
    }
    group.finish();
}

fn region_coeffs(c: &mut Criterion) {
    let region = GraphRegion::example();
    let mut group = c.benchmark_group("graph_region_coeffs/lmax96");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            pool.install(|| b.iter(|| graph_region_coeffs(black_box(&region), 96)))
        });
    }
    group.finish();
}

fn map(c: &mut Criterion) {
    let spec = WaveletSpec::new(2, 16).unwrap();
    let f = graph_region_coeffs(&GraphRegion::example(), spec.lmax());
    let mut group = c.benchmark_group("coefficient_map/N16_M48");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            pool.install(|| b.iter(|| coefficient_map(black_box(&f), &spec, 48, 0.0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sht, region_coeffs, map);
criterion_main!(benches);
