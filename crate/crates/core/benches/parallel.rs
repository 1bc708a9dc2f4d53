//! Sequential vs rayon execution of the data-parallel stages.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qpot::bohmian::{integrate, seed_from_density, IntegratorOptions, SeedMethod};
use qpot::fields::{ComplexField, Grid, RealField};
use qpot::scenario::{evolve, potential_stack, preset};
use qpot::schrodinger::{AdiSolver, PhysicalConstants, WavePacketSpec};
use qpot::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn small_crossing() -> qpot::scenario::ScenarioConfig {
    preset("crossing", &["evolution.n_steps=100".into()]).unwrap()
}

fn trajectories(c: &mut Criterion) {
    let cfg = small_crossing();
    let psi = evolve(&cfg, Execution::Parallel).unwrap();
    let seeds = seed_from_density(&psi.get(0).density(), 2000, SeedMethod::Quantile).unwrap();
    let mut group = c.benchmark_group("trajectories");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = IntegratorOptions { exec, ..IntegratorOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| integrate(black_box(&psi), &seeds, SeedMethod::Quantile, &cfg.constants, &opts).unwrap())
        });
    }
    group.finish();
}

fn quantum_potential(c: &mut Criterion) {
    let cfg = small_crossing();
    let psi = evolve(&cfg, Execution::Parallel).unwrap();
    let mut group = c.benchmark_group("quantum_potential_frames");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| potential_stack(black_box(&psi), &cfg.constants, 1e-8, exec).unwrap())
        });
    }
    group.finish();
}

fn adi(c: &mut Criterion) {
    let k = PhysicalConstants::default();
    let g = Grid::new_2d((-16.0, 16.0, 192), (-16.0, 16.0, 192)).unwrap();
    let (px, py) = (WavePacketSpec::new(-2.0, 1.0, 1.0), WavePacketSpec::new(0.0, 1.0, 0.5));
    let psi0 =
        ComplexField::from_fn(&g, |p| px.amplitude(&k, 0.0, p[0]) * py.amplitude(&k, 0.0, p[1])).normalized().unwrap();
    let v = RealField::zeros(&g);
    let mut group = c.benchmark_group("adi_20_steps");
    group.sample_size(10);
    for (name, exec) in MODES {
        let solver = AdiSolver::new(&g, &v, &k, 1e-2, exec).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solver.evolve(black_box(&psi0), 20, 20).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories, quantum_potential, adi);
criterion_main!(benches);
