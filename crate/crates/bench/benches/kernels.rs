use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hc_core::kernels;

fn bench_kernels(c: &mut Criterion) {
    c.bench_function("kernel_f sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..256 {
                let tau = i as f64 * 0.01;
                acc += kernels::kernel_f(black_box(2.0), black_box(1.3), black_box(tau));
            }
            acc
        })
    });
    c.bench_function("coth/csch identity", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..1000 {
                let x = i as f64 * 1e-3;
                acc += kernels::coth_sq_minus_csch_sq(black_box(x));
            }
            acc
        })
    });
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
