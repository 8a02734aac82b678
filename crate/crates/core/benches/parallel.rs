use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use microind::em_model::{Inductor, OperatingPoint, K_SINE};
use microind::geometry::{CoreGeometry, VolumeRule, WindingGeometry};
use microind::materials::{load_material_registry, MaterialSpec};
use microind::optimizer::{optimize, CurrentRule, Objective, ObjectiveKind, SearchSpace, Spacing};
use microind::reference_data::SHIPPED_REGISTRY;
use microind::sweep::{frequency_sweep, log_grid};
use microind::synthesis::DesignConstraints;
use microind::Execution;

fn strategies() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn bench_optimize(c: &mut Criterion) {
    let reg = load_material_registry(SHIPPED_REGISTRY).unwrap();
    let space = SearchSpace {
        n_turns: 5..=40,
        n_lam: 1..=10,
        t_lam: (1..=10).map(|k| k as f64 * 1e-6).collect(),
        t_w: vec![45e-6, 90e-6, 135e-6, 180e-6],
        w_w: (1..=12).map(|k| k as f64 * 50e-6).collect(),
        material: reg.get("CoFeCu").unwrap(),
        conductor: Arc::new(MaterialSpec::copper()),
        f: 0.5e6,
        k_wave: K_SINE,
        b_pk: 1.4,
        w_lam: 500e-6,
        t_ins: 5e-6,
        l_c: 10e-3,
        mtl: 1.59e-3,
        spacing: Spacing::Ratio(0.1),
        volume: VolumeRule::Computed { overhead: 1.5 },
        current: CurrentRule::OperatingLimit { j_max: 10e6 },
    };
    let obj = Objective { kind: ObjectiveKind::MaxEfficiency, l_target: 0.3e-6, l_tolerance: 0.05 };
    let constraints = DesignConstraints::default();
    let mut group = c.benchmark_group(format!("optimize_{}", space.candidate_count()));
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(name, |b| {
            b.iter(|| optimize(black_box(&space), &obj, &constraints, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let reg = load_material_registry(SHIPPED_REGISTRY).unwrap();
    let inductor = Inductor {
        core: CoreGeometry::new(1, 10e-6, 500e-6, 5e-6, 10e-3).unwrap(),
        winding: WindingGeometry::new(33, 90e-6, 200e-6, 20e-6, 1.59e-3, reg.copper()).unwrap(),
        material: reg.get("CoFeCu").unwrap(),
        volume: VolumeRule::default(),
    };
    let op = OperatingPoint { f: 0.5e6, i_drive: 0.18, k_wave: K_SINE, b_pk: 1.4 };
    let grid = log_grid(1e3, 10e6, 2000).unwrap();
    let mut group = c.benchmark_group(format!("sweep_{}", grid.len()));
    for (name, exec) in strategies() {
        group.bench_function(name, |b| {
            b.iter(|| frequency_sweep(&inductor, black_box(&op), &grid, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_optimize, bench_sweep);
criterion_main!(benches);
