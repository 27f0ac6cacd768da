use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use heom_bench::{bath_only, composite, generator};
use heom_core::heom::IndexSet;
use heom_core::propagator::Rk4;
use heom_core::{CouplingMode, TlsOperator};
use num_complex::Complex64;

fn index_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("index_enumeration");
    for depth in [8, 12, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| IndexSet::enumerate(5, black_box(d), usize::MAX).unwrap())
        });
    }
    group.finish();
}

fn generator_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("generator_apply");
    for depth in [8, 12] {
        let g = generator(&composite(depth, CouplingMode::Full));
        let x = g.initial_stack(&TlsOperator::excited()).into_values();
        let mut out = vec![Complex64::new(0.0, 0.0); g.dim()];
        group.bench_with_input(BenchmarkId::new("matrix_free", depth), &depth, |b, _| {
            b.iter(|| g.apply(black_box(&x), &mut out))
        });
        let csr = g.to_csr();
        group.bench_with_input(BenchmarkId::new("csr", depth), &depth, |b, _| {
            b.iter(|| csr.mul_vec(black_box(&x), &mut out))
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let g = generator(&bath_only(16, CouplingMode::Full));
    let mut x = g.initial_stack(&TlsOperator::excited()).into_values();
    let mut rk = Rk4::new(g.dim());
    c.bench_function("rk4_step_bath_L16", |b| b.iter(|| rk.step(&g, black_box(&mut x), 0.01)));
}

criterion_group!(benches, index_enumeration, generator_apply, rk4_step);
criterion_main!(benches);
