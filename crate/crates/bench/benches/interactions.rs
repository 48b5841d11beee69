use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use resonance_core::{
    AtomPair, BranchLabel, DielectricResponse, GeometryConfig, OscillatorDielectric,
    PolarizabilityModel, Tolerances,
};

fn matsubara(c: &mut Criterion) {
    let membrane: DielectricResponse = OscillatorDielectric::phospholipid_like().into();
    let atom = PolarizabilityModel::helium_like();
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("matsubara");
    for rho in [10.0, 100.0, 1000.0] {
        let pair = AtomPair::new(GeometryConfig::stacked(2.0, rho).unwrap(), atom, &membrane);
        group.bench_function(format!("resonance_rho_{rho}"), |b| {
            b.iter(|| pair.resonance_energies(black_box(300.0), &tol).unwrap())
        });
        group.bench_function(format!("casimir_polder_rho_{rho}"), |b| {
            b.iter(|| pair.casimir_polder_energy(black_box(300.0), &tol).unwrap())
        });
    }
    group.finish();
}

fn zero_temperature(c: &mut Criterion) {
    let vacuum = DielectricResponse::Vacuum;
    let atom = PolarizabilityModel::helium_like();
    let tol = Tolerances {
        abs_tol: 0.0,
        ..Tolerances::with_rel_tol(1e-10)
    };
    let mut group = c.benchmark_group("zero_temperature");
    for rho in [5.0, 1e3, 5e4] {
        let pair = AtomPair::new(
            GeometryConfig::side_by_side(2.0, rho).unwrap(),
            atom,
            &vacuum,
        );
        group.bench_function(format!("resonance_x_rho_{rho}"), |b| {
            b.iter(|| {
                pair.resonance_energy_zero_temperature(black_box(BranchLabel::X), &tol)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, matsubara, zero_temperature);
criterion_main!(benches);
