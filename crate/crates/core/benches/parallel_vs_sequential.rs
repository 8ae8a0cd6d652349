use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hpoela::analysis::{kmeans, repeated_stratified_cv, CartParams};
use hpoela::bbob::{instantiate_bbob, BbobInstance};
use hpoela::design::{Design, ElaSample};
use hpoela::ela;
use hpoela::optimizers::{run, OptimizerSpec};
use hpoela::parallel::{self, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn problems(dim: usize) -> Vec<BbobInstance> {
    (1..=24).map(|fid| instantiate_bbob(fid, 1, dim).unwrap()).collect()
}

fn feature_batch(c: &mut Criterion) {
    let samples: Vec<ElaSample> = problems(3)
        .iter()
        .enumerate()
        .map(|(i, p)| ElaSample::from_design(&Design::sample(p, 150, i as u64, 10).unwrap()).unwrap())
        .collect();
    let mut g = c.benchmark_group("ela_features_24_problems");
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| parallel::map(exec, &samples, |s| black_box(ela::compute_all(s).unwrap())))
        });
    }
    g.finish();
}

fn optimizer_cells(c: &mut Criterion) {
    let probs = problems(5);
    let spec = OptimizerSpec::roster().into_iter().find(|o| o.name() == "cmaes").unwrap();
    let mut g = c.benchmark_group("cmaes_cells_24_problems");
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| parallel::map(exec, &probs, |p| black_box(run(&spec, p, 250, 1).unwrap().len())))
        });
    }
    g.finish();
}

fn meta_analysis(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..360)
        .map(|i| {
            let centre = (i % 3) as f64 * 2.0;
            (0..10).map(|_| centre + rng.random::<f64>()).collect()
        })
        .collect();
    let y: Vec<usize> = (0..360).map(|i| i % 3).collect();
    let mut g = c.benchmark_group("meta_analysis");
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::new("kmeans_25_restarts", name), |b| {
            b.iter(|| black_box(kmeans(&x, 3, 1, 25, exec).unwrap().within_ss))
        });
        g.bench_function(BenchmarkId::new("cart_cv_10x10", name), |b| {
            b.iter(|| black_box(repeated_stratified_cv(&x, &y, 10, 10, 1, &CartParams::default(), exec).unwrap().error))
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = feature_batch, optimizer_cells, meta_analysis
}
criterion_main!(benches);
