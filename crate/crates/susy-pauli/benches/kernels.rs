//! Parallel-vs-sequential comparison of the grid kernels.
//!
//! Both paths run in one process through the thread-local execution override;
//! results are bitwise identical, so only throughput differs.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use susy_pauli::aux_ode::AuxSolution;
use susy_pauli::exec::{with_mode, ExecMode};
use susy_pauli::fields::{FieldProfile, PhysicalConfig};
use susy_pauli::grid::{d_dz, GridSpec};
use susy_pauli::operators::{apply, probe_field, OperatorKind};
use susy_pauli::propagator::step;

fn bench_kernels(c: &mut Criterion) {
    let profile = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
    let cfg = PhysicalConfig::default();
    let sol = AuxSolution::analytic_constant(
        &cfg,
        1.0,
        0.0,
        Complex64::default(),
        Complex64::new(1.0, 0.0),
    )
    .unwrap();
    for &n in &[128usize, 256] {
        let spec = GridSpec::new(n, 28.0).unwrap();
        let field = probe_field(&spec, 0.0, 5);
        let ctx = sol.context_at(0.0).unwrap();
        let mut group = c.benchmark_group(format!("N{n}"));
        group.sample_size(20);
        for (mode, label) in [(ExecMode::Sequential, "seq"), (ExecMode::Parallel, "par")] {
            group.bench_function(format!("d_dz/{label}"), |b| {
                b.iter(|| with_mode(mode, || d_dz(&spec, field.up())))
            });
            group.bench_function(format!("hamiltonian/{label}"), |b| {
                b.iter(|| with_mode(mode, || apply(OperatorKind::H, &field, &ctx).unwrap()))
            });
            group.bench_function(format!("dressed_hamiltonian/{label}"), |b| {
                b.iter(|| with_mode(mode, || apply(OperatorKind::HTilde, &field, &ctx).unwrap()))
            });
            group.bench_function(format!("inner/{label}"), |b| {
                b.iter(|| with_mode(mode, || field.inner(&field).unwrap()))
            });
            group.bench_function(format!("rk4_step/{label}"), |b| {
                b.iter(|| with_mode(mode, || step(&field, &profile, &cfg, 0.0, 1e-4).unwrap()))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
