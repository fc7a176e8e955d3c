use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hiprl::controllers::household;
use hiprl::pddl::{ground, print_problem};
use hiprl::planner::{ff_heuristic, plan, PlannerConfig};
use hiprl_bench::{global_layout_problem, put_in_task};

fn bench_search(c: &mut Criterion) {
    let (scene, task) = put_in_task(3);
    let ground_task = global_layout_problem(&scene, &task);
    let config = PlannerConfig::default();
    c.bench_function("plan search-all-receptacles", |b| b.iter(|| black_box(plan(&ground_task, &config))));
    c.bench_function("ff heuristic at init", |b| {
        b.iter(|| black_box(ff_heuristic(&ground_task, &ground_task.init)))
    });
}

fn bench_grounding(c: &mut Criterion) {
    let (scene, task) = put_in_task(3);
    let k = hiprl::knowledge::KnowledgeState::with_global_layout(&scene, task.start);
    let goal = hiprl::knowledge::goal_for_vsp(&task).unwrap();
    let pp = hiprl::knowledge::to_pddl_problem(&k, &goal);
    let text = print_problem(&pp.problem);
    c.bench_function("ground household problem", |b| b.iter(|| black_box(ground(household(), &pp.problem))));
    c.bench_function("parse household problem", |b| {
        b.iter(|| black_box(hiprl::pddl::parse_problem(&text, household())))
    });
}

criterion_group!(benches, bench_search, bench_grounding);
criterion_main!(benches);
