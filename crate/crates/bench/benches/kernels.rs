use aggdiff_bench::{gaussian, weak_solver};
use aggdiff_core::estimates::{constants_table, Case};
use aggdiff_core::operators::{fractional_laplacian, riesz_potential, FractionalOrder};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn solver_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver_step");
    group.sample_size(20);
    for cells in [64, 128, 256] {
        let solver = weak_solver(cells);
        let field = gaussian(cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, _| {
            b.iter(|| solver.step(black_box(&field), 0.0, f64::INFINITY).unwrap())
        });
    }
    group.finish();
}

fn interaction_velocity(c: &mut Criterion) {
    let mut group = c.benchmark_group("interaction_velocity");
    for cells in [64, 128, 256] {
        let solver = weak_solver(cells);
        let field = gaussian(cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, _| {
            b.iter(|| solver.velocity(black_box(&field)).unwrap())
        });
    }
    group.finish();
}

fn fractional(c: &mut Criterion) {
    let field = gaussian(128);
    let s = FractionalOrder::new(0.5).unwrap();
    c.bench_function("fractional_laplacian/128", |b| b.iter(|| fractional_laplacian(black_box(&field), s)));
    c.bench_function("riesz_potential/128", |b| b.iter(|| riesz_potential(black_box(&field), s).unwrap()));
}

fn constants(c: &mut Criterion) {
    c.bench_function("constants_table/strong_k20", |b| {
        b.iter(|| constants_table(Case::Strong, black_box(1.5), 3, 1.0, -1.5, 20).unwrap())
    });
}

criterion_group!(benches, solver_step, interaction_velocity, fractional, constants);
criterion_main!(benches);
