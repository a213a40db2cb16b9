use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jls::experiment::{presets, run_type1_grid, ExperimentGrid};
use jls::{permute_and_rescore, simulate_dataset, Execution, JlsConfig, PermutationPlan, SimulationSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn type1_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("type1_grid");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut grid = ExperimentGrid::new(presets::type1_by_maf(&[0.3, 0.1], 1000), 400, vec![0.05]);
        grid.execution = exec;
        group.bench_with_input(BenchmarkId::from_parameter(name), &grid, |b, g| {
            b.iter(|| run_type1_grid(g).unwrap())
        });
    }
    group.finish();
}

fn permutation(c: &mut Criterion) {
    let data = simulate_dataset(&SimulationSpec {
        n: 1000,
        seed: 3,
        ..SimulationSpec::default()
    })
    .unwrap();
    let (g, y) = (data.genotype_vector("v"), data.phenotype_vector());
    let plan = PermutationPlan::new(999, 17);
    let cfg = JlsConfig::default();
    let mut group = c.benchmark_group("permute_and_rescore");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| permute_and_rescore(&g, &y, &plan, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, type1_grid, permutation);
criterion_main!(benches);
