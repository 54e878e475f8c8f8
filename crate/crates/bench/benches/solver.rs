use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use gmec_core::{
    build_interaction_graph, build_pseudo_tree, kbest_solve, merge_and, min_fill_ordering,
    mini_bucket_elimination, plain_bnb, random_instance, solve, EnergyModel,
    MiniBucketHeuristic, PseudoTree, SolveOptions, DEFAULT_MEM_CAP,
};

fn pipeline(model: &EnergyModel, i_bound: usize) -> (EnergyModel, PseudoTree, MiniBucketHeuristic) {
    let (g, ms) = build_interaction_graph(model, 0.0).unwrap();
    let tree = build_pseudo_tree(&g, &min_fill_ordering(&g));
    let h = mini_bucket_elimination(&ms, &tree, i_bound, DEFAULT_MEM_CAP).unwrap();
    (ms, tree, h)
}

fn bench_solve(c: &mut Criterion) {
    let m = random_instance(42, 12, 4, 0.4, 1.0).unwrap();
    let (ms, tree, h) = pipeline(&m, 4);
    c.bench_function("aobb_solve_n12", |b| {
        b.iter(|| solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap())
    });
    c.bench_function("plain_bnb_n12", |b| {
        b.iter(|| plain_bnb(&m, None::<fn(usize, &[usize]) -> f64>).unwrap())
    });
}

fn bench_heuristic_build(c: &mut Criterion) {
    let m = random_instance(43, 14, 4, 0.5, 1.0).unwrap();
    let (g, ms) = build_interaction_graph(&m, 0.0).unwrap();
    let tree = build_pseudo_tree(&g, &min_fill_ordering(&g));
    c.bench_function("mbe_build_n14_i4", |b| {
        b.iter(|| mini_bucket_elimination(&ms, &tree, 4, DEFAULT_MEM_CAP).unwrap())
    });
}

fn bench_kbest(c: &mut Criterion) {
    let m = random_instance(44, 10, 4, 0.4, 1.0).unwrap();
    let (ms, tree, h) = pipeline(&m, 4);
    c.bench_function("kbest_n10_k5", |b| {
        b.iter(|| kbest_solve(&ms, &tree, Some(&h), 5, f64::INFINITY).unwrap())
    });
}

fn bench_merge(c: &mut Criterion) {
    let children: Vec<Vec<f64>> =
        (0..6).map(|i| (0..50).map(|j| (i * 7 + j * 3) as f64 * 0.125).collect()).collect();
    c.bench_function("merge_and_6x50_k20", |b| {
        b.iter_batched(|| children.clone(), |ch| merge_and(&ch, 20), BatchSize::SmallInput)
    });
}

criterion_group!(benches, bench_solve, bench_heuristic_build, bench_kbest, bench_merge);
criterion_main!(benches);
