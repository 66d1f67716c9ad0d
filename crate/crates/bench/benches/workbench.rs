use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use vecr::encodings::{apply_and_decode, encode_matrix, CoeffMatrix};
use vecr::rewrite::normal_form;
use vecr::syntax::Context;
use vecr::typesys::{check, synthesize};
use vecr_bench::{dense_4x4, hadamard_on_plus, hadamard_result};

fn reduction(c: &mut Criterion) {
    let t = hadamard_on_plus();
    c.bench_function("normalize (H) plus", |b| b.iter(|| normal_form(black_box(&t), 10_000).unwrap()));
    let (m, v) = dense_4x4();
    c.bench_function("apply_and_decode 4x4", |b| b.iter(|| apply_and_decode(black_box(&m), &v, 100_000).unwrap()));
}

fn typing(c: &mut Criterion) {
    let ctx = Context::new();
    let (t, ty) = hadamard_result();
    c.bench_function("check true + 0 false", |b| b.iter(|| check(&ctx, black_box(&t), &ty).unwrap()));
    let m = CoeffMatrix::new(vec![vec![vecr::Scalar::one(); 2]; 2]).unwrap();
    let (tt, _, _, _) = vecr::encodings::booleans();
    let u_true = vecr::Term::app(encode_matrix(&m).0, tt);
    let mut g = c.benchmark_group("synthesize");
    g.sample_size(10);
    g.bench_function("(U) true", |b| b.iter(|| synthesize(&ctx, black_box(&u_true)).unwrap()));
    g.finish();
}

criterion_group!(benches, reduction, typing);
criterion_main!(benches);
