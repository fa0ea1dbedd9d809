use std::hint::black_box;

use convex_enclose::divergence::{self, DivergenceKernel};
use convex_enclose::quadrature::{self, Partition, TagRule, DEFAULT_MAX_CELLS};
use convex_enclose::{oracle, pointwise};
use convex_enclose_bench::{distributions, functions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pointwise_bounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("ostrowski_enclosure");
    for (name, f) in functions() {
        let x = f.domain().lo() + 0.37 * f.domain().width();
        group.bench_function(name, |b| b.iter(|| pointwise::ostrowski_enclosure(&f, black_box(x)).unwrap()));
    }
    group.finish();
}

fn midpoint(c: &mut Criterion) {
    let mut group = c.benchmark_group("midpoint_rule");
    let (_, f) = functions().swap_remove(0);
    for n in [16, 256, 4096] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| quadrature::midpoint_rule(&f, n).unwrap())
        });
    }
    group.finish();
}

fn remainder(c: &mut Criterion) {
    let mut group = c.benchmark_group("remainder_enclosure");
    let (_, f) = functions().swap_remove(3);
    for n in [16, 256, 4096] {
        let p = Partition::uniform(f.domain(), n, TagRule::Left).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| quadrature::remainder_enclosure(&f, p).unwrap())
        });
    }
    group.finish();
}

fn adaptive(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_adaptive");
    for (name, f) in functions() {
        group.bench_function(name, |b| {
            b.iter(|| quadrature::integrate_adaptive(&f, black_box(1e-6), DEFAULT_MAX_CELLS).unwrap())
        });
    }
    group.finish();
}

fn reference(c: &mut Criterion) {
    let mut group = c.benchmark_group("simpson_integral_auto");
    for (name, f) in functions() {
        group.bench_function(name, |b| b.iter(|| oracle::simpson_integral_auto(&f, f.domain()).unwrap()));
    }
    group.finish();
}

fn divergences(c: &mut Criterion) {
    let mut group = c.benchmark_group("hh_divergence");
    for kernel in ["chi2", "kl", "hellinger"] {
        let k = DivergenceKernel::by_name(kernel).unwrap();
        for n in [4, 64] {
            let (p, q) = distributions(n);
            group.bench_with_input(BenchmarkId::new(kernel, n), &(p, q), |b, (p, q)| {
                b.iter(|| divergence::hh_divergence(&k, p, q).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pointwise_bounds, midpoint, remainder, adaptive, reference, divergences);
criterion_main!(benches);
