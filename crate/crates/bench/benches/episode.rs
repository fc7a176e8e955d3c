use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hiprl::controllers::shortest_path_estimate;
use hiprl::metapolicy::{episode_seeds, run_episode, EpisodeConfig, Policy};
use hiprl_bench::put_in_task;

fn bench_episodes(c: &mut Criterion) {
    let (scene, task) = put_in_task(11);
    let config = EpisodeConfig::default();
    let seeds = episode_seeds(0, &task);
    let mut group = c.benchmark_group("episode");
    group.sample_size(20);
    group.bench_function("planner only", |b| {
        b.iter(|| black_box(run_episode(&scene, &task, &Policy::PlannerOnly, seeds, &config)))
    });
    group.bench_function("random", |b| b.iter(|| black_box(run_episode(&scene, &task, &Policy::Random, seeds, &config))));
    group.bench_function("shortest path estimate", |b| b.iter(|| black_box(shortest_path_estimate(&scene, &task))));
    group.finish();
}

criterion_group!(benches, bench_episodes);
criterion_main!(benches);
