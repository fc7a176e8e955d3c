mod common;

use common::{room, task};
use hiprl::controllers::{Env, Termination};
use hiprl::knowledge::KnowledgeState;
use hiprl::metapolicy::{
    episode_seeds, featurize, gradient_check, run_episode, train, Checkpoint, EpisodeConfig, FeatureVector, History,
    MetaAction, MetaError, MetaPolicy, Mode, Policy, TrainConfig, FEATURE_DIM,
};
use hiprl::world::rng::stream;
use hiprl::world::{
    generate_scene, generate_task, Cell, Heading, NoiseModel, ObjectClass, Place, Pose, ReceptacleClass,
    SceneConfig, Split, TaskKind, Tile,
};
use rand::Rng;

fn bias_only() -> FeatureVector {
    let mut f = [0.0; FEATURE_DIM];
    f[0] = 1.0;
    f
}

fn draw_counts(p: &MetaPolicy, f: &FeatureVector, n: usize) -> [usize; 4] {
    let mut rng = stream(5, "draws");
    let mut counts = [0; 4];
    for _ in 0..n {
        counts[p.select(f, &mut rng, Mode::Sample).index()] += 1;
    }
    counts
}

#[test]
fn zero_weights_sample_uniformly() {
    let p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    let counts = draw_counts(&p, &bias_only(), 100_000);
    for c in counts {
        let share = c as f64 / 100_000.0;
        assert!((share - 0.25).abs() <= 0.01, "{counts:?}");
    }
}

#[test]
fn dominant_logit_wins_almost_always() {
    let mut p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    p.actor[2][0] = 10.0;
    let counts = draw_counts(&p, &bias_only(), 100_000);
    assert!(counts[2] as f64 / 100_000.0 >= 0.999, "{counts:?}");
}

#[test]
fn greedy_ties_go_to_the_first_action() {
    let p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    let mut rng = stream(0, "greedy");
    assert_eq!(p.select(&bias_only(), &mut rng, Mode::Greedy), MetaAction::Planner);
}

fn random_instance(rng: &mut impl Rng) -> (MetaPolicy, FeatureVector, usize, f64) {
    let mut p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    for w in p.actor.iter_mut().flatten().chain(p.critic.iter_mut()) {
        *w = rng.gen_range(-0.5..0.5);
    }
    let mut f = [0.0; FEATURE_DIM];
    for x in f.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
    f[0] = 1.0;
    (p, f, rng.gen_range(0..4), rng.gen_range(-2.0..2.0))
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut rng = stream(11, "gradcheck");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (p, f, a, g) = random_instance(&mut rng);
        worst = worst.max(gradient_check(&p, &f, a, g, 0.01));
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn zero_advantage_and_exact_critic_give_zero_gradients() {
    let mut rng = stream(12, "zero");
    let (p, f, a, _) = random_instance(&mut rng);
    assert!(p.policy_gradient(&f, a, 0.0).iter().flatten().all(|&x| x == 0.0));
    let exact = p.value(&f);
    assert!(p.critic_gradient(&f, exact).iter().all(|&x| x == 0.0));
}

/// One-step bandit: a single decision on constant features, reward +1 for
/// the scanner and -1 otherwise, updated after every episode.
#[test]
fn bandit_concentrates_on_the_rewarded_action() {
    let mut p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    let f = bias_only();
    let mut rng = stream(3, "bandit");
    let (actor_lr, critic_lr, entropy_weight) = (0.01, 0.05, 0.01);
    let good = MetaAction::Scanner.index();
    let mut reached = None;
    for episode in 0..2000 {
        let a = p.select(&f, &mut rng, Mode::Sample).index();
        let reward = if a == good { 1.0 } else { -1.0 };
        let advantage = reward - p.value(&f);
        let pg = p.policy_gradient(&f, a, advantage);
        let eg = p.entropy_gradient(&f);
        let cg = p.critic_gradient(&f, reward);
        for j in 0..4 {
            for i in 0..FEATURE_DIM {
                p.actor[j][i] += actor_lr * (pg[j][i] + entropy_weight * eg[j][i]);
            }
        }
        for (w, g) in p.critic.iter_mut().zip(&cg) {
            *w -= critic_lr * g;
        }
        if reached.is_none() && p.probabilities(&f)[good] > 0.95 {
            reached = Some(episode);
        }
    }
    assert!(reached.is_some(), "final probability {}", p.probabilities(&f)[good]);
}

fn small_suite(n: u64) -> (Vec<hiprl::world::Scene>, Vec<hiprl::world::TaskSpec>) {
    let mut scenes = Vec::new();
    let mut tasks = Vec::new();
    for s in 0..n {
        let scene = generate_scene(s, &SceneConfig::default()).unwrap();
        if let Ok(t) = generate_task(&scene, s, TaskKind::PutIn) {
            tasks.push(t);
        }
        scenes.push(scene);
    }
    (scenes, tasks)
}

#[test]
fn zero_learning_rates_leave_weights_unchanged() {
    let (scenes, tasks) = small_suite(4);
    let config = TrainConfig {
        actor_lr: 0.0,
        critic_lr: 0.0,
        batch_size: 4,
        total_hierarchical_steps: 60,
        probe_every: 0,
        workers: 1,
        ..TrainConfig::default()
    };
    let start = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    let out = train(start.clone(), &scenes, &tasks, &[], &config).unwrap();
    assert_eq!(out.policy, start);
    assert!(out.episodes > 0);
}

#[test]
fn training_without_tasks_is_an_error() {
    let config = TrainConfig { workers: 1, ..TrainConfig::default() };
    let r = train(MetaPolicy::zeros(MetaAction::ALL.to_vec()), &[], &[], &[], &config);
    assert!(matches!(r, Err(MetaError::NoTasks)));
}

#[test]
fn same_seeds_give_identical_traces() {
    let (scenes, tasks) = small_suite(3);
    let config = EpisodeConfig::default();
    for policy in [Policy::Random, Policy::PlannerOnly] {
        for t in &tasks {
            let scene = scenes.iter().find(|s| s.seed == t.scene_seed).unwrap();
            let a = run_episode(scene, t, &policy, episode_seeds(9, t), &config);
            let b = run_episode(scene, t, &policy, episode_seeds(9, t), &config);
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }
}

#[test]
fn answering_immediately_costs_nothing() {
    let (scenes, _) = small_suite(1);
    let t = generate_task(&scenes[0], 1, TaskKind::Existence).unwrap();
    let trace = run_episode(&scenes[0], &t, &Policy::AnswerImmediately, episode_seeds(1, &t), &EpisodeConfig::default());
    assert_eq!(trace.primitive_length, 0);
    assert_eq!(trace.hierarchical_steps(), 1);
    assert_eq!(trace.records[0].action, MetaAction::Stopper);
    assert!(trace.answer.is_some());
}

#[test]
fn answering_immediately_is_a_coin_flip_on_balanced_existence() {
    let mut correct = 0;
    let mut total = 0;
    let mut yes = 0;
    for s in 0..150 {
        let scene = generate_scene(s, &SceneConfig::default()).unwrap();
        for j in 0..3 {
            let Ok(mut t) = generate_task(&scene, 10 * s + j, TaskKind::Existence) else { continue };
            t.split = Split::UnseenTest;
            let trace = run_episode(&scene, &t, &Policy::AnswerImmediately, episode_seeds(2, &t), &EpisodeConfig::default());
            yes += (t.answer == Some(hiprl::world::Answer::Yes)) as usize;
            correct += trace.success as usize;
            total += 1;
        }
    }
    let balance = yes as f64 / total as f64;
    let accuracy = correct as f64 / total as f64;
    assert!((balance - 0.5).abs() < 0.06, "yes share {balance}");
    assert!((accuracy - 0.5).abs() < 0.1, "accuracy {accuracy} over {total}");
}

#[test]
fn planner_only_relocates_in_plain_sight() {
    let scene = room(
        10,
        5,
        &[(ReceptacleClass::Sink, 2, 1), (ReceptacleClass::Microwave, 7, 1)],
        &[(ObjectClass::Apple, Place::In(0))],
    );
    let mut t = task(&scene, TaskKind::PutIn, ObjectClass::Apple, Some(ReceptacleClass::Microwave), Pose {
        cell: Cell::new(4, 3),
        heading: Heading::N,
    });
    t.oracle_length = Some(10);
    let config = EpisodeConfig { noise: NoiseModel::ground_truth(), ..EpisodeConfig::default() };
    let trace = run_episode(&scene, &t, &Policy::PlannerOnly, episode_seeds(4, &t), &config);
    assert!(trace.success, "{:?}", trace.records.iter().map(|r| (&r.action, &r.result.termination)).collect::<Vec<_>>());
}

#[test]
fn planner_only_gives_up_on_an_unseen_target() {
    // The sink sits behind a partition with a single gap at the bottom.
    let mut scene = room(
        16,
        8,
        &[(ReceptacleClass::Fridge, 1, 1), (ReceptacleClass::Sink, 14, 1)],
        &[(ObjectClass::Apple, Place::In(0))],
    );
    for y in 1..6 {
        scene.grid.set(Cell::new(8, y), Tile::Wall);
    }
    let t = task(&scene, TaskKind::PutIn, ObjectClass::Apple, Some(ReceptacleClass::Sink), Pose {
        cell: Cell::new(2, 2),
        heading: Heading::E,
    });
    let config = EpisodeConfig { noise: NoiseModel::ground_truth(), ..EpisodeConfig::default() };
    let trace = run_episode(&scene, &t, &Policy::PlannerOnly, episode_seeds(4, &t), &config);
    assert!(!trace.success);
    let planner = trace.records.iter().find(|r| r.action == MetaAction::Planner).unwrap();
    assert_eq!(planner.result.termination, Termination::Failure("impossible".into()));
    assert_eq!(trace.records.last().unwrap().action, MetaAction::Stopper);
}

#[test]
fn features_track_progress() {
    let scene = room(
        10,
        5,
        &[(ReceptacleClass::Sink, 2, 1), (ReceptacleClass::GarbageCan, 6, 1)],
        &[(ObjectClass::Apple, Place::In(0))],
    );
    let start = Pose { cell: Cell::new(4, 2), heading: Heading::N };
    let t = task(&scene, TaskKind::Existence, ObjectClass::Apple, None, start);
    let mut env = Env::new(&scene, &t, NoiseModel::ground_truth(), 0);
    let mut k = KnowledgeState::for_scene(&scene, start);
    let history = History { max_hierarchical_steps: 40, max_primitive_steps: 1000, ..History::default() };
    let names = hiprl::metapolicy::feature_names();
    let at = |f: &FeatureVector, name: &str| f[names.iter().position(|n| n == name).unwrap()];
    let f0 = featurize(&k, &t, &history);
    assert_eq!(at(&f0, "primitive_steps"), 0.0);
    assert_eq!(at(&f0, "hierarchical_steps"), 0.0);
    assert_eq!(at(&f0, "subject_found"), 0.0);
    hiprl::controllers::scan(&mut env, &mut k);
    let f1 = featurize(&k, &t, &history);
    assert_eq!(at(&f1, "subject_found"), 1.0);
    // Both candidates are unopenable and have been in view.
    assert_eq!(k.candidates(ObjectClass::Apple).count(), 2);
    assert_eq!(at(&f1, "checked_fraction"), 1.0);
}

#[test]
fn checkpoints_round_trip_and_reject_other_layouts() {
    let mut p = MetaPolicy::zeros(MetaAction::ALL.to_vec());
    p.actor[1][3] = 0.25;
    let c = Checkpoint::new(p, TrainConfig::default());
    let text = c.to_json();
    assert_eq!(Checkpoint::from_json(&text).unwrap(), c);

    let mut other = serde_json::from_str::<serde_json::Value>(&text).unwrap();
    other["schema"] = "0000000000000000".into();
    assert!(matches!(Checkpoint::from_json(&other.to_string()), Err(MetaError::Schema { .. })));

    let mut other = serde_json::from_str::<serde_json::Value>(&text).unwrap();
    other["version"] = 99.into();
    assert!(matches!(Checkpoint::from_json(&other.to_string()), Err(MetaError::Version { found: 99, .. })));

    let mut other = serde_json::from_str::<serde_json::Value>(&text).unwrap();
    other["policy"]["critic"] = serde_json::json!([0.0, 1.0]);
    assert!(matches!(Checkpoint::from_json(&other.to_string()), Err(MetaError::Format(_))));
}
