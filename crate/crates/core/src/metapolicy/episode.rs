//! One episode: featurize, choose a controller, run it, collect reward.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureVector, History};
use super::policy::{MetaPolicy, Mode};
use super::MetaAction;
use crate::controllers::{
    digest, explore, initial_plan_length, run_planner_controller, scan, shortest_path_estimate, stop_and_answer,
    ControllerConfig, ControllerResult, Env, EnvEvent, Termination,
};
use crate::knowledge::{goal_for_question, goal_for_vsp, Containment, GoalSpec, KnowledgeState};
use crate::world::rng::{self, Stream};
use crate::world::{Answer, NoiseModel, Pitch, Scene, Split, TaskKind, TaskSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub success: f64,
    pub failure: f64,
    /// Added on every hierarchical step.
    pub step_penalty: f64,
    pub gamma: f64,
    /// Shaping bonus the first time the subject class is tracked.
    pub sight_bonus: f64,
    /// Shaping bonus the first time the subject is held.
    pub pickup_bonus: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { success: 1.0, failure: -1.0, step_penalty: -0.02, gamma: 1.0, sight_bonus: 0.0, pickup_bonus: 0.0 }
    }
}

impl RewardConfig {
    /// Defaults plus the sighting and pickup bonuses used for the learner
    /// without a planner.
    pub fn shaped() -> Self {
        RewardConfig { sight_bonus: 0.1, pickup_bonus: 0.2, ..RewardConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub noise: NoiseModel,
    /// Noise multiplier for scenes the agent was trained in.
    pub familiar_noise_scale: f64,
    pub max_primitive_steps: u64,
    pub max_hierarchical_steps: u32,
    pub controllers: ControllerConfig,
    pub rewards: RewardConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            noise: NoiseModel::default(),
            familiar_noise_scale: 0.5,
            max_primitive_steps: 1000,
            max_hierarchical_steps: 40,
            controllers: ControllerConfig::default(),
            rewards: RewardConfig::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn noise_for(&self, split: Split) -> NoiseModel {
        if split.is_seen() {
            self.noise.scaled(self.familiar_noise_scale)
        } else {
            self.noise
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedKind {
    PlannerOnly,
    LearnerOnly,
    Random,
    AnswerImmediately,
}

/// Something that picks meta-actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Learned { policy: MetaPolicy, mode: Mode },
    PlannerOnly,
    Random,
    AnswerImmediately,
}

/// The baseline policies. `LearnerOnly` is an untrained actor-critic whose
/// action set lacks the planner; train it with [`RewardConfig::shaped`].
pub fn scripted_policy(kind: ScriptedKind) -> Policy {
    match kind {
        ScriptedKind::PlannerOnly => Policy::PlannerOnly,
        ScriptedKind::LearnerOnly => Policy::Learned {
            policy: MetaPolicy::zeros(vec![MetaAction::Explorer, MetaAction::Scanner, MetaAction::Stopper]),
            mode: Mode::Sample,
        },
        ScriptedKind::Random => Policy::Random,
        ScriptedKind::AnswerImmediately => Policy::AnswerImmediately,
    }
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Learned { policy, .. } if policy.index_of(MetaAction::Planner).is_none() => "learner_only",
            Policy::Learned { .. } => "hiprl",
            Policy::PlannerOnly => "planner_only",
            Policy::Random => "random",
            Policy::AnswerImmediately => "answer_immediately",
        }
    }

    fn decide(&self, f: &FeatureVector, records: &[HierRecord], ctx: &DecisionContext, rng: &mut Stream) -> MetaAction {
        match self {
            Policy::Learned { policy, mode } => policy.select(f, rng, *mode),
            Policy::Random => *MetaAction::ALL.choose(rng).expect("non-empty"),
            Policy::AnswerImmediately => MetaAction::Stopper,
            Policy::PlannerOnly => match records.last() {
                None => {
                    let viable = initial_plan_length(ctx.k, ctx.goal, &ctx.config.planner).is_some_and(|n| n > 0);
                    if viable {
                        MetaAction::Planner
                    } else {
                        MetaAction::Scanner
                    }
                }
                Some(r) if r.action == MetaAction::Scanner => MetaAction::Planner,
                Some(r) if r.result.termination == Termination::BudgetExhausted => MetaAction::Planner,
                Some(_) => MetaAction::Stopper,
            },
        }
    }
}

struct DecisionContext<'a> {
    k: &'a KnowledgeState,
    goal: &'a GoalSpec,
    config: &'a ControllerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSeeds {
    pub master: u64,
    pub scene: u64,
    pub task: u64,
    pub detector: u64,
    pub policy: u64,
}

/// Per-episode seeds, derived from the master seed and the task id.
pub fn episode_seeds(master: u64, task: &TaskSpec) -> EpisodeSeeds {
    EpisodeSeeds {
        master,
        scene: task.scene_seed,
        task: task.seed,
        detector: rng::sub_seed(master, &format!("detector/{}", task.id)),
        policy: rng::sub_seed(master, &format!("policy/{}", task.id)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierRecord {
    pub features_digest: String,
    pub features: FeatureVector,
    pub action: MetaAction,
    pub result: ControllerResult,
    pub reward: f64,
    /// Stopper invoked by a budget rather than chosen by the policy.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub task_id: String,
    pub kind: TaskKind,
    pub split: Split,
    pub method: String,
    pub seeds: EpisodeSeeds,
    pub noise: NoiseModel,
    pub records: Vec<HierRecord>,
    /// Every primitive and detector call, in order.
    pub events: Vec<EnvEvent>,
    pub answer: Option<Answer>,
    pub success: bool,
    pub primitive_length: u64,
    pub oracle_length: u32,
}

impl EpisodeTrace {
    pub fn hierarchical_steps(&self) -> usize {
        self.records.len()
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }

    pub fn forced_stop(&self) -> bool {
        self.records.last().is_some_and(|r| r.forced)
    }

    /// Discounted return from each record to the end.
    pub fn returns(&self, gamma: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.records.len()];
        let mut g = 0.0;
        for (i, r) in self.records.iter().enumerate().rev() {
            g = r.reward + gamma * g;
            out[i] = g;
        }
        out
    }
}

fn subject_seen(k: &KnowledgeState, task: &TaskSpec) -> bool {
    k.entities.iter().any(|e| e.class == task.object)
}

fn subject_held(k: &KnowledgeState, task: &TaskSpec) -> bool {
    k.held_entity().is_some_and(|e| e.class == task.object && e.containment == Containment::Held)
}

/// Runs `task` in `scene` under `policy` until the stopper is invoked.
///
/// Every episode begins with one level detector call that costs no step.
/// When the primitive or hierarchical budget runs out the stopper is forced
/// and the episode counts as a failure. Controllers check the primitive
/// budget between their own steps, so a scan started just before the limit
/// may overrun it by up to twelve steps.
pub fn run_episode(scene: &Scene, task: &TaskSpec, policy: &Policy, seeds: EpisodeSeeds, config: &EpisodeConfig) -> EpisodeTrace {
    let noise = config.noise_for(task.split);
    let mut env = Env::new(scene, task, noise, seeds.detector);
    let mut k = KnowledgeState::for_scene(scene, task.start);
    let mut rng = rng::stream(seeds.policy, "meta");
    let goal = if task.kind.is_question() { goal_for_question(task) } else { goal_for_vsp(task) }
        .expect("kind-appropriate goal");
    env.look(&mut k, Pitch::Level);

    let rewards = &config.rewards;
    let mut history = History {
        last: None,
        hierarchical_steps: 0,
        primitive_steps: 0,
        max_hierarchical_steps: config.max_hierarchical_steps,
        max_primitive_steps: config.max_primitive_steps,
    };
    let mut records: Vec<HierRecord> = Vec::new();
    let mut seen = subject_seen(&k, task);
    let mut picked = subject_held(&k, task);
    let (answer, success) = loop {
        let f = featurize(&k, task, &history);
        let out_of_budget = env.steps() >= config.max_primitive_steps
            || history.hierarchical_steps + 1 >= config.max_hierarchical_steps;
        let action = if out_of_budget {
            MetaAction::Stopper
        } else {
            let ctx = DecisionContext { k: &k, goal: &goal, config: &config.controllers };
            policy.decide(&f, &records, &ctx, &mut rng)
        };
        let remaining = config.max_primitive_steps.saturating_sub(env.steps());
        let controllers = ControllerConfig {
            planner_budget: config.controllers.planner_budget.min(remaining),
            navigate_budget: config.controllers.navigate_budget.min(remaining),
            ..config.controllers.clone()
        };
        let result = match action {
            MetaAction::Planner => run_planner_controller(&mut env, &mut k, &goal, &controllers),
            MetaAction::Explorer => explore(&mut env, &mut k, &controllers),
            MetaAction::Scanner => scan(&mut env, &mut k),
            MetaAction::Stopper => stop_and_answer(&env, &k, task),
        };
        k.hierarchical_steps += 1;
        history.hierarchical_steps += 1;
        history.primitive_steps = env.steps();
        let mut reward = rewards.step_penalty;
        if !seen && subject_seen(&k, task) {
            seen = true;
            reward += rewards.sight_bonus;
        }
        if !picked && subject_held(&k, task) {
            picked = true;
            reward += rewards.pickup_bonus;
        }
        let record = |result: ControllerResult, reward: f64| HierRecord {
            features_digest: digest(&f.to_vec()),
            features: f,
            action,
            result,
            reward,
            forced: out_of_budget,
        };
        if action == MetaAction::Stopper {
            let answer = result.answer;
            let success = !out_of_budget
                && match task.kind {
                    TaskKind::PutIn => task.goal_met(&env.world),
                    _ => task.answer_correct(answer),
                };
            reward += if success { rewards.success } else { rewards.failure };
            records.push(record(result, reward));
            break (answer, success);
        }
        history.last = Some((action, result.termination.is_success()));
        records.push(record(result, reward));
    };

    let oracle_length = task.oracle_length.unwrap_or_else(|| shortest_path_estimate(scene, task)).max(1);
    EpisodeTrace {
        task_id: task.id.clone(),
        kind: task.kind,
        split: task.split,
        method: policy.name().to_string(),
        seeds,
        noise,
        records,
        events: env.events,
        answer,
        success,
        primitive_length: env.world.steps,
        oracle_length,
    }
}
