use std::hint::black_box;

use alphaflow_bench::{alpha_euler, annulus, PERTURBED_RING};
use alphaflow_core::{advect, EllipticWorkspace};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn elliptic(c: &mut Criterion) {
    let mut group = c.benchmark_group("elliptic");
    for (nr, nt) in [(32, 64), (64, 128)] {
        let grid = annulus(nr, nt);
        let q = PERTURBED_RING.field(&grid);
        let id = format!("{nr}x{nt}");
        group.bench_with_input(BenchmarkId::new("workspace_setup", &id), &grid, |b, g| {
            b.iter(|| EllipticWorkspace::new(g.clone(), 0.05).unwrap())
        });
        let ws = EllipticWorkspace::new(grid.clone(), 0.05).unwrap();
        group.bench_with_input(BenchmarkId::new("velocity_from_state", &id), &q, |b, q| {
            b.iter(|| ws.velocity_from_state(black_box(q), &[1.0]).unwrap())
        });
    }
    group.finish();
}

fn transport(c: &mut Criterion) {
    let sim = alpha_euler(64, 128, 0.05);
    let state = sim.initial_state().unwrap();
    let dt = sim.stable_dt(&state);
    c.bench_function("advect/64x128", |b| {
        b.iter(|| advect(black_box(&state.q), &state.u_cache, dt, 8).unwrap())
    });
    c.bench_function("step/64x128", |b| b.iter(|| sim.step(black_box(&state), dt).unwrap()));
}

criterion_group!(benches, elliptic, transport);
criterion_main!(benches);
