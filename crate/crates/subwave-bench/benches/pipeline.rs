//! Timings along the whole pipeline: operator assembly, capacitance
//! extraction, the per-defect Schur query that dominates every sensing
//! experiment, the small complex eigensolve, and a full loss
//! evaluation.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use subwave_bench::{bodies, chain_scene, resolution};
use subwave_core::bie::BoundaryOperator;
use subwave_core::capacitance::{self, DefectSolver};
use subwave_core::sensing::SensingModel;
use subwave_core::spectral;

fn assembly(c: &mut Criterion) {
    let scene = chain_scene();
    let chain = bodies(&scene);
    c.bench_function("assemble_chain_operator", |b| {
        b.iter(|| BoundaryOperator::new(black_box(&chain), resolution()).unwrap())
    });
}

fn capacitance_matrix(c: &mut Criterion) {
    let scene = chain_scene();
    let chain = bodies(&scene);
    c.bench_function("capacitance_chain", |b| {
        b.iter(|| capacitance::capacitance(black_box(&chain), resolution()).unwrap())
    });
}

fn defect_query(c: &mut Criterion) {
    let scene = chain_scene();
    let solver = DefectSolver::from_bodies(&bodies(&scene), resolution()).unwrap();
    c.bench_function("perturbed_capacitance_query", |b| {
        b.iter(|| {
            solver
                .perturbed_capacitance(black_box([3.0, 0.4, 0.0]), 1e-2)
                .unwrap()
        })
    });
}

fn weighted_spectrum(c: &mut Criterion) {
    let scene = chain_scene().with_defect([3.0, 0.0, 0.0], 1e-2);
    let all = capacitance::scene_bodies(&scene);
    let weights = capacitance::material_weights(&scene);
    let cap = capacitance::capacitance(&all, resolution()).unwrap();
    let wt = capacitance::weighted(&cap, &weights);
    c.bench_function("weighted_eigenvalues_4x4", |b| {
        b.iter(|| spectral::eigenvalues(black_box(&wt)))
    });
}

fn sensing_query(c: &mut Criterion) {
    let scene = chain_scene();
    let model = SensingModel::new(&scene, resolution(), 1e-2).unwrap();
    let clean = model.resonances_at([3.0, 0.0]).unwrap();
    c.bench_function("sensing_loss_query", |b| {
        b.iter(|| model.loss_at(&clean, black_box([3.1, 0.2])).unwrap())
    });
}

criterion_group!(
    benches,
    assembly,
    capacitance_matrix,
    defect_query,
    weighted_spectrum,
    sensing_query
);
criterion_main!(benches);
