use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pnp_steric::branch_algebra::{BranchId, TwoSpeciesParams};
use pnp_steric::bvp_solver::{solve_with, BvpOptions, BvpProblem, RobinBC};
use pnp_steric::rhs_assembly::{assemble_three_species, ThreeSpeciesConfig};
use pnp_steric::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn config() -> ThreeSpeciesConfig {
    ThreeSpeciesConfig::new(TwoSpeciesParams::new(1.0, 20.0, 1.0).unwrap(), 1.0, 0.5).unwrap()
}

fn rhs_grid(c: &mut Criterion) {
    let rhs = assemble_three_species(&config(), BranchId::A).unwrap();
    let d = rhs.domain();
    let n = 20_001;
    let phis: Vec<f64> = (0..n)
        .map(|i| d.lo + (d.hi - d.lo) * (0.01 + 0.98 * i as f64 / (n - 1) as f64))
        .collect();
    let mut group = c.benchmark_group("rhs_eval");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, n), &phis, |b, phis| {
            b.iter(|| mode.map(black_box(phis), |&p| rhs.eval(p)))
        });
    }
    group.finish();
}

fn bvp_solve(c: &mut Criterion) {
    let rhs = assemble_three_species(&config(), BranchId::A).unwrap();
    let root = rhs.root().unwrap();
    let bc = RobinBC::new(root + 0.3, root - 0.2, 0.05).unwrap();
    let mut group = c.benchmark_group("bvp_solve");
    group.sample_size(10);
    for n in [2001usize, 20_001] {
        let problem = BvpProblem::new(1e-4, rhs.clone(), bc, Some(n)).unwrap();
        for (name, mode) in MODES {
            let options = BvpOptions::default().with_execution(mode);
            group.bench_with_input(BenchmarkId::new(name, n), &problem, |b, p| {
                b.iter(|| solve_with(black_box(p), &options).unwrap())
            });
        }
    }
    group.finish();
}

fn branch_table(c: &mut Criterion) {
    let b = config().branches().unwrap();
    let n = 10_000;
    let sz = b.sigma_z();
    let mut group = c.benchmark_group("branch_table");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, n), |bench| {
            bench.iter(|| {
                mode.map_index(n, |i| {
                    let sigma = sz + 1e-6 + 20.0 * i as f64 / n as f64;
                    let p = b.params();
                    pnp_steric::branch_algebra::phi_on_branch(sigma, p, BranchId::A)
                        .and_then(|a| pnp_steric::branch_algebra::concentrations(sigma, p, BranchId::A).map(|c| (a, c)))
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, rhs_grid, bvp_solve, branch_table);
criterion_main!(benches);
