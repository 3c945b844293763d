use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ngfiber_core::bath::{self, BathSpec};
use ngfiber_core::bb::{self, JointModel, PulsePlacement, SegmentProfile, ToyBath, DEFAULT_DIM_BUDGET};
use ngfiber_core::entanglement::{negativity_analytic, negativity_numeric};
use ngfiber_core::states::{build_state, build_state_truncated, DEFAULT_TAIL_TOL};
use ngfiber_core::Complex64;

fn negativity(c: &mut Criterion) {
    let mut group = c.benchmark_group("negativity");
    for zeta in [0.3, 0.6, 0.8] {
        let state = build_state(1, Complex64::new(zeta, 0.0), DEFAULT_TAIL_TOL).unwrap();
        let rho = state.density_matrix();
        group.bench_with_input(BenchmarkId::new("series", zeta), &state, |b, s| b.iter(|| negativity_analytic(black_box(s))));
        group.bench_with_input(BenchmarkId::new("eigensolver", zeta), &rho, |b, r| {
            b.iter(|| negativity_numeric(black_box(r)).unwrap())
        });
    }
    group.finish();
}

fn dissipation_rate(c: &mut Criterion) {
    let mut group = c.benchmark_group("dissipation_rate");
    let cold = BathSpec::new(1.0, 0.0, 1.0).unwrap();
    let warm = BathSpec::with_energy_ratio(1.0, 1.0, 1.0).unwrap();
    for x in [0.1, 10.0, 1000.0] {
        group.bench_with_input(BenchmarkId::new("quadrature_cold", x), &x, |b, &x| {
            b.iter(|| bath::dissipation_rate_quadrature(&cold, black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadrature_warm", x), &x, |b, &x| {
            b.iter(|| bath::dissipation_rate_quadrature(&warm, black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("series_warm", x), &x, |b, &x| {
            b.iter(|| bath::dissipation_rate_series(&warm, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn visibility(c: &mut Criterion) {
    let bath = BathSpec::with_energy_ratio(0.3, 1.0, 1.0).unwrap();
    c.bench_function("visibility_direct", |b| b.iter(|| bath::visibility_direct(&bath, black_box(0.7), 3).unwrap()));
    c.bench_function("visibility_closed", |b| b.iter(|| bath::visibility_closed(&bath, black_box(0.7), 3).unwrap()));
}

fn bang_bang(c: &mut Criterion) {
    let model = JointModel::new(5, ToyBath::single(0.7, 0.3, 0.0, 0.0, 4), 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
    let psi = build_state_truncated(1, Complex64::new(0.5, 0.0), 2).unwrap().embed(model.space.system()).unwrap();
    let psi0 = model.space.product_state(&psi, &[0]).unwrap();
    let pi = model.space.phase_shifter_diagonal();
    let mut group = c.benchmark_group("bang_bang");
    group.sample_size(20);
    for n in [16usize, 64] {
        let hs = bb::segment_hamiltonians(&model, &SegmentProfile::homogeneous(n, 0.0, 1).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("homogeneous", n), &hs, |b, hs| {
            b.iter(|| bb::propagate_bb(hs, 10.0 / n as f64, &psi0, &pi, PulsePlacement::Bracketed).unwrap())
        });
        let rough = SegmentProfile::gaussian(n, 0.0, 1, 0.1, 7).unwrap();
        let hs = bb::segment_hamiltonians(&model, &rough).unwrap();
        group.bench_with_input(BenchmarkId::new("inhomogeneous", n), &hs, |b, hs| {
            b.iter(|| bb::propagate_bb(hs, 10.0 / n as f64, &psi0, &pi, PulsePlacement::Bracketed).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, negativity, dissipation_rate, visibility, bang_bang);
criterion_main!(benches);
