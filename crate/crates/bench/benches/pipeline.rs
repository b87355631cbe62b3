use criterion::{criterion_group, criterion_main, Criterion};
use hc_core::{assemble_epsilon_squared, build_model, spectral_decompose, ModelParams};

fn bench_pipeline(c: &mut Criterion) {
    let model = build_model(&ModelParams::with_defaults(1.0, 10.0, 160, 1.0)).unwrap();

    c.bench_function("assemble epsilon^2 (n=160)", |b| {
        b.iter(|| assemble_epsilon_squared(&model).unwrap())
    });

    let op = assemble_epsilon_squared(&model).unwrap();
    c.bench_function("spectral decompose (n=160)", |b| {
        b.iter(|| spectral_decompose(&op).unwrap())
    });
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
