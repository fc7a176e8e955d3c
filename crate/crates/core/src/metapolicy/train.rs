//! Synchronous batched advantage actor-critic, probe curves and checkpoints.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::episode::{episode_seeds, run_episode, EpisodeConfig, EpisodeTrace, Policy};
use super::features::{feature_names, FEATURE_DIM};
use super::policy::{MetaPolicy, Mode};
use super::MetaError;
use crate::world::rng;
use crate::world::{Scene, TaskSpec};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    /// Worker threads for episode rollouts; 0 uses all cores.
    pub workers: usize,
    pub batch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub entropy_weight: f64,
    pub total_hierarchical_steps: u64,
    pub probe_every: u64,
    pub probe_mode: Mode,
    /// Training aborts when any weight exceeds this in absolute value.
    pub weight_bound: f64,
    pub episode: EpisodeConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            workers: 0,
            batch_size: 16,
            actor_lr: 0.01,
            critic_lr: 0.05,
            entropy_weight: 0.01,
            total_hierarchical_steps: 20_000,
            probe_every: 2_000,
            probe_mode: Mode::Sample,
            weight_bound: 1e3,
            episode: EpisodeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub hierarchical_steps: u64,
    pub probe_success: f64,
    pub mean_episode_length: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub policy: MetaPolicy,
    pub curve: Vec<CurvePoint>,
    pub episodes: u64,
}

impl TrainOutput {
    /// The learning curve as comma-separated text with a header row.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("hierarchical_steps,probe_success,mean_episode_length\n");
        for p in &self.curve {
            s.push_str(&format!("{},{:.6},{:.3}\n", p.hierarchical_steps, p.probe_success, p.mean_episode_length));
        }
        s
    }
}

struct Batch {
    actor: Vec<Vec<f64>>,
    critic: Vec<f64>,
    critic_samples: usize,
}

impl Batch {
    fn new(actions: usize) -> Self {
        Batch { actor: vec![vec![0.0; FEATURE_DIM]; actions], critic: vec![0.0; FEATURE_DIM], critic_samples: 0 }
    }

    /// Adds one episode. Actor terms are summed over the episode's own
    /// decisions; forced stops only feed the critic.
    fn add(&mut self, policy: &MetaPolicy, trace: &EpisodeTrace, gamma: f64, entropy_weight: f64) {
        let returns = trace.returns(gamma);
        for (r, &g) in trace.records.iter().zip(&returns) {
            let f = &r.features;
            let advantage = g - policy.value(f);
            for (c, x) in self.critic.iter_mut().zip(f) {
                *c += advantage * x;
            }
            self.critic_samples += 1;
            if r.forced {
                continue;
            }
            let a = policy.index_of(r.action).expect("recorded action belongs to the policy");
            let pg = policy.policy_gradient(f, a, advantage);
            let eg = policy.entropy_gradient(f);
            for j in 0..self.actor.len() {
                for i in 0..FEATURE_DIM {
                    self.actor[j][i] += pg[j][i] + entropy_weight * eg[j][i];
                }
            }
        }
    }

    /// Ascent on the actor summed over the batch's episodes, as if every
    /// worker had applied its own update; descent on the critic's squared
    /// error averaged over samples.
    fn apply(&self, policy: &mut MetaPolicy, actor_lr: f64, critic_lr: f64) {
        for (row, g) in policy.actor.iter_mut().zip(&self.actor) {
            for (w, d) in row.iter_mut().zip(g) {
                *w += actor_lr * d;
            }
        }
        let ns = self.critic_samples.max(1) as f64;
        for (w, d) in policy.critic.iter_mut().zip(&self.critic) {
            *w += critic_lr * d / ns;
        }
    }
}

fn scene_index(scenes: &[Scene]) -> HashMap<u64, &Scene> {
    scenes.iter().map(|s| (s.seed, s)).collect()
}

fn lookup<'a>(index: &HashMap<u64, &'a Scene>, task: &TaskSpec) -> Result<&'a Scene, MetaError> {
    index.get(&task.scene_seed).copied().ok_or(MetaError::MissingScene(task.scene_seed))
}

/// Success rate and mean primitive length of `policy` on `tasks`, with seeds
/// fixed by `master`.
pub fn probe(
    scenes: &[Scene],
    tasks: &[TaskSpec],
    policy: &Policy,
    master: u64,
    config: &EpisodeConfig,
) -> Result<(f64, f64), MetaError> {
    let index = scene_index(scenes);
    let traces: Vec<EpisodeTrace> = tasks
        .par_iter()
        .map(|t| Ok(run_episode(lookup(&index, t)?, t, policy, episode_seeds(master, t), config)))
        .collect::<Result<_, MetaError>>()?;
    let n = traces.len().max(1) as f64;
    let success = traces.iter().filter(|t| t.success).count() as f64 / n;
    let length = traces.iter().map(|t| t.primitive_length as f64).sum::<f64>() / n;
    Ok((success, length))
}

/// Trains `policy` on episodes drawn uniformly from `tasks`, probing on
/// `probe_tasks` every `probe_every` hierarchical steps.
pub fn train(
    mut policy: MetaPolicy,
    scenes: &[Scene],
    tasks: &[TaskSpec],
    probe_tasks: &[TaskSpec],
    config: &TrainConfig,
) -> Result<TrainOutput, MetaError> {
    if tasks.is_empty() {
        return Err(MetaError::NoTasks);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| MetaError::Format(e.to_string()))?;
    pool.install(|| train_inner(&mut policy, scenes, tasks, probe_tasks, config)).map(|(curve, episodes)| {
        TrainOutput { policy, curve, episodes }
    })
}

fn train_inner(
    policy: &mut MetaPolicy,
    scenes: &[Scene],
    tasks: &[TaskSpec],
    probe_tasks: &[TaskSpec],
    config: &TrainConfig,
) -> Result<(Vec<CurvePoint>, u64), MetaError> {
    let index = scene_index(scenes);
    let probe_seed = rng::sub_seed(config.seed, "probe");
    let mut sampler = rng::stream(config.seed, "train/tasks");
    let mut curve = Vec::new();
    let mut steps = 0u64;
    let mut episodes = 0u64;
    let mut next_probe = 0u64;
    let record = |policy: &MetaPolicy, steps: u64, curve: &mut Vec<CurvePoint>| -> Result<(), MetaError> {
        if probe_tasks.is_empty() {
            return Ok(());
        }
        let p = Policy::Learned { policy: policy.clone(), mode: config.probe_mode };
        let (probe_success, mean_episode_length) = probe(scenes, probe_tasks, &p, probe_seed, &config.episode)?;
        curve.push(CurvePoint { hierarchical_steps: steps, probe_success, mean_episode_length });
        Ok(())
    };
    while steps < config.total_hierarchical_steps {
        if config.probe_every > 0 && steps >= next_probe {
            record(policy, steps, &mut curve)?;
            next_probe += config.probe_every;
        }
        let batch: Vec<(u64, &TaskSpec)> = (0..config.batch_size.max(1))
            .map(|i| {
                let t = &tasks[sampler.gen_range(0..tasks.len())];
                (episodes + i as u64, t)
            })
            .collect();
        let behaviour = Policy::Learned { policy: policy.clone(), mode: Mode::Sample };
        let traces: Vec<EpisodeTrace> = batch
            .par_iter()
            .map(|&(n, t)| {
                let master = rng::sub_seed(config.seed, &format!("train/episode/{n}"));
                Ok(run_episode(lookup(&index, t)?, t, &behaviour, episode_seeds(master, t), &config.episode))
            })
            .collect::<Result<_, MetaError>>()?;
        let mut grad = Batch::new(policy.actions.len());
        for t in &traces {
            grad.add(policy, t, config.episode.rewards.gamma, config.entropy_weight);
            steps += t.hierarchical_steps() as u64;
        }
        episodes += traces.len() as u64;
        grad.apply(policy, config.actor_lr, config.critic_lr);
        let w = policy.max_abs_weight();
        if !w.is_finite() || w > config.weight_bound {
            return Err(MetaError::Diverged(w));
        }
    }
    record(policy, steps, &mut curve)?;
    Ok((curve, episodes))
}

/// Hash of the feature layout, stored in checkpoints.
pub fn schema_hash() -> String {
    let names = feature_names().join("\n");
    Sha256::digest(names.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub schema: String,
    pub feature_dim: usize,
    pub config: TrainConfig,
    pub policy: MetaPolicy,
}

impl Checkpoint {
    pub fn new(policy: MetaPolicy, config: TrainConfig) -> Self {
        Checkpoint { version: CHECKPOINT_VERSION, schema: schema_hash(), feature_dim: FEATURE_DIM, config, policy }
    }

    pub fn from_json(text: &str) -> Result<Self, MetaError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| MetaError::Format(e.to_string()))?;
        let version = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != CHECKPOINT_VERSION {
            return Err(MetaError::Version { found: version, expected: CHECKPOINT_VERSION });
        }
        let c: Checkpoint = serde_json::from_value(raw).map_err(|e| MetaError::Format(e.to_string()))?;
        let expected = schema_hash();
        if c.schema != expected || c.feature_dim != FEATURE_DIM {
            return Err(MetaError::Schema { found: c.schema, expected });
        }
        let p = &c.policy;
        if p.actor.len() != p.actions.len()
            || p.actor.iter().any(|r| r.len() != FEATURE_DIM)
            || p.critic.len() != FEATURE_DIM
            || p.temperature.is_nan()
            || p.temperature <= 0.0
        {
            return Err(MetaError::Format("weight shapes do not match the feature layout".into()));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), MetaError> {
    std::fs::write(path, checkpoint.to_json())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, MetaError> {
    Checkpoint::from_json(&std::fs::read_to_string(path)?)
}
