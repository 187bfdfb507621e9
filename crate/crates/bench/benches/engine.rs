//! Cold-start costs of the graded-basis engine and the module builders.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use hopfkit_core::engine::{Engine, Side};
use hopfkit_core::presets;
use hopfkit_core::repr::{character_with_exponents, decompose, simple_module, tensor};

fn engine(name: &str) -> Arc<Engine> {
    Arc::new(Engine::new(presets::by_name(name).expect("known preset")).expect("valid datum"))
}

fn graded_dimensions(c: &mut Criterion) {
    let mut group = c.benchmark_group("dimension-table");
    group.sample_size(10);
    for name in ["A1", "A2", "B2"] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let engine = engine(name);
                black_box(engine.dimension_table(Side::Lower, 6).expect("within cap"))
            });
        });
    }
    group.finish();
}

fn simple_modules(c: &mut Criterion) {
    let mut group = c.benchmark_group("simple-module");
    group.sample_size(10);
    for (label, m) in [("A2-L(1,1)", vec![1, 1]), ("A2-L(2,2)", vec![2, 2])] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let engine = engine("A2");
                let chi = character_with_exponents(&engine, &m).expect("dominant exponents");
                black_box(simple_module(&engine, &chi).expect("module closes"))
            });
        });
    }
    group.finish();
}

fn tensor_decomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("tensor-decompose");
    group.sample_size(10);
    group.bench_function("A1-L(4)⊗L(4)", |b| {
        let engine = engine("A1");
        let chi = character_with_exponents(&engine, &[4]).expect("dominant exponents");
        let factor = simple_module(&engine, &chi).expect("module closes");
        b.iter(|| {
            let product = tensor(&factor, &factor).expect("shared engine");
            black_box(decompose(&product).expect("complete reducibility"))
        });
    });
    group.finish();
}

criterion_group!(benches, graded_dimensions, simple_modules, tensor_decomposition);
criterion_main!(benches);
