//! Methods × task sets × noise modes, summarized per row.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, bootstrap_ci, shift, spl, EpisodeRecord};
use super::trace::{TraceEpisode, TraceFile, TraceHeader};
use super::EvalError;
use crate::controllers::digest;
use crate::metapolicy::{episode_seeds, load_checkpoint, run_episode, EpisodeConfig, MetaPolicy, Mode, Policy};
use crate::world::rng;
use crate::world::{io, NoiseModel, Scene, SceneSet, TaskSet, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The shortest-path estimate itself: always successful, `p = ℓ`.
    Oracle,
    Hiprl,
    PlannerOnly,
    LearnerOnly,
    Random,
    AnswerImmediately,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Oracle, Method::Hiprl, Method::PlannerOnly, Method::LearnerOnly, Method::Random, Method::AnswerImmediately];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Hiprl => "hiprl",
            Method::PlannerOnly => "planner_only",
            Method::LearnerOnly => "learner_only",
            Method::Random => "random",
            Method::AnswerImmediately => "answer_immediately",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| EvalError::Format(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Gt,
    Default,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMode::Gt => "gt",
            NoiseMode::Default => "default",
        }
    }

    /// The detector model for this mode; `Default` keeps the configured one.
    pub fn model(self, configured: &NoiseModel) -> NoiseModel {
        match self {
            NoiseMode::Gt => NoiseModel::ground_truth(),
            NoiseMode::Default => *configured,
        }
    }
}

impl FromStr for NoiseMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gt" => Ok(NoiseMode::Gt),
            "default" => Ok(NoiseMode::Default),
            _ => Err(EvalError::Format(format!("unknown noise mode `{s}` (expected gt or default)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSetRef {
    pub name: String,
    pub path: PathBuf,
}

/// Benchmark description as read from TOML. Relative paths are resolved
/// against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    pub scenes: PathBuf,
    pub task_sets: Vec<TaskSetRef>,
    pub methods: Vec<Method>,
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseMode>,
    pub checkpoint: Option<PathBuf>,
    pub learner_checkpoint: Option<PathBuf>,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default)]
    pub episode: EpisodeConfig,
}

fn default_noise() -> Vec<NoiseMode> {
    vec![NoiseMode::Default]
}

fn default_resamples() -> usize {
    10_000
}

/// A benchmark with every artifact loaded.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub seed: u64,
    pub scenes: Vec<Scene>,
    pub task_sets: Vec<(String, Vec<TaskSpec>)>,
    pub methods: Vec<Method>,
    pub noise: Vec<NoiseMode>,
    pub hiprl: Option<MetaPolicy>,
    pub learner: Option<MetaPolicy>,
    pub resamples: usize,
    pub episode: EpisodeConfig,
}

impl Benchmark {
    pub fn load(config_path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(config_path)
            .map_err(|e| EvalError::Missing(format!("{}: {e}", config_path.display())))?;
        let config: BenchConfig = toml::from_str(&text).map_err(|e| EvalError::Format(e.to_string()))?;
        Benchmark::from_config(&config, config_path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_config(config: &BenchConfig, base: &Path) -> Result<Self, EvalError> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let existing = |p: &Path| {
            let p = resolve(p);
            if p.exists() {
                Ok(p)
            } else {
                Err(EvalError::Missing(p.display().to_string()))
            }
        };
        let scenes: SceneSet = io::load(&existing(&config.scenes)?)?;
        let mut task_sets = Vec::new();
        for r in &config.task_sets {
            let set: TaskSet = io::load(&existing(&r.path)?)?;
            task_sets.push((r.name.clone(), set.tasks));
        }
        let policy = |p: &Option<PathBuf>, needed: bool, what: &str| -> Result<Option<MetaPolicy>, EvalError> {
            match p {
                Some(p) => Ok(Some(load_checkpoint(&existing(p)?)?.policy)),
                None if needed => Err(EvalError::Missing(format!("{what} is required by the method list"))),
                None => Ok(None),
            }
        };
        Ok(Benchmark {
            seed: config.seed,
            scenes: scenes.scenes,
            task_sets,
            methods: config.methods.clone(),
            noise: config.noise.clone(),
            hiprl: policy(&config.checkpoint, config.methods.contains(&Method::Hiprl), "checkpoint")?,
            learner: policy(
                &config.learner_checkpoint,
                config.methods.contains(&Method::LearnerOnly),
                "learner_checkpoint",
            )?,
            resamples: config.resamples,
            episode: config.episode.clone(),
        })
    }

    /// Digest of everything that determines the results.
    pub fn config_digest(&self) -> String {
        digest(&(
            self.seed,
            &self.scenes,
            &self.task_sets,
            &self.methods,
            &self.noise,
            &self.hiprl,
            &self.learner,
            self.resamples,
            &self.episode,
        ))
    }

    /// The policy behind `method`; `None` for the oracle row.
    fn policy(&self, method: Method) -> Result<Option<Policy>, EvalError> {
        let learned = |p: &Option<MetaPolicy>, what: &str| {
            p.clone()
                .map(|policy| Some(Policy::Learned { policy, mode: Mode::Sample }))
                .ok_or_else(|| EvalError::Missing(format!("{what} policy for method {method}")))
        };
        match method {
            Method::Oracle => Ok(None),
            Method::Hiprl => learned(&self.hiprl, "trained"),
            Method::LearnerOnly => learned(&self.learner, "learner-only"),
            Method::PlannerOnly => Ok(Some(Policy::PlannerOnly)),
            Method::Random => Ok(Some(Policy::Random)),
            Method::AnswerImmediately => Ok(Some(Policy::AnswerImmediately)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub method: String,
    pub task_set: String,
    pub noise: String,
    pub episodes: usize,
    /// Mean success (answer accuracy for questions).
    pub accuracy: f64,
    pub accuracy_ci: (f64, f64),
    pub mean_length: f64,
    pub spl: f64,
    pub spl_ci: (f64, f64),
    /// Accuracy of the agent that answers immediately, on the same tasks.
    pub baseline: f64,
    pub sspl: f64,
    pub config_digest: String,
}

/// Builds a summary row from episode records.
#[allow(clippy::too_many_arguments)]
pub fn summarize(
    method: &str,
    task_set: &str,
    noise: &str,
    records: &[EpisodeRecord],
    baseline: f64,
    resamples: usize,
    seed: u64,
    config_digest: &str,
) -> Result<BenchmarkSummary, EvalError> {
    let mu = accuracy(records)?;
    let s = spl(records)?;
    let successes: Vec<f64> = records.iter().map(|r| r.success as u8 as f64).collect();
    let weighted: Vec<f64> = records.iter().map(EpisodeRecord::weighted_success).collect();
    let ci_seed = rng::sub_seed(seed, &format!("ci/{method}/{task_set}/{noise}"));
    Ok(BenchmarkSummary {
        method: method.into(),
        task_set: task_set.into(),
        noise: noise.into(),
        episodes: records.len(),
        accuracy: mu,
        accuracy_ci: bootstrap_ci(&successes, resamples, ci_seed),
        mean_length: records.iter().map(|r| r.path_length as f64).sum::<f64>() / records.len() as f64,
        spl: s,
        spl_ci: bootstrap_ci(&weighted, resamples, ci_seed ^ 1),
        baseline,
        sspl: if baseline < 1.0 { shift(mu, baseline, s) } else { f64::NAN },
        config_digest: config_digest.into(),
    })
}

/// All episodes of one (method, task set, noise) cell.
#[derive(Debug, Clone)]
pub struct Run {
    pub method: Method,
    pub task_set: String,
    pub noise: NoiseMode,
    pub records: Vec<EpisodeRecord>,
    /// Replayable traces; empty for the oracle row.
    pub traces: TraceFile,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub rows: Vec<BenchmarkSummary>,
    pub runs: Vec<Run>,
    pub config_digest: String,
}

fn run_cell(
    bench: &Benchmark,
    policy: &Policy,
    tasks: &[TaskSpec],
    master: u64,
    episode: &EpisodeConfig,
) -> Result<Vec<TraceEpisode>, EvalError> {
    tasks
        .par_iter()
        .map(|t| {
            let scene = bench
                .scenes
                .iter()
                .find(|s| s.seed == t.scene_seed)
                .ok_or_else(|| EvalError::Missing(format!("scene {} for task {}", t.scene_seed, t.id)))?;
            let trace = run_episode(scene, t, policy, episode_seeds(master, t), episode);
            Ok(TraceEpisode { scene: scene.clone(), task: t.clone(), trace })
        })
        .collect()
}

pub fn run_benchmark(bench: &Benchmark) -> Result<BenchResult, EvalError> {
    let config_digest = bench.config_digest();
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (set_name, tasks) in &bench.task_sets {
        if tasks.is_empty() {
            return Err(EvalError::Empty);
        }
        let master = rng::sub_seed(bench.seed, &format!("bench/{set_name}"));
        for &noise in &bench.noise {
            let episode = EpisodeConfig { noise: noise.model(&bench.episode.noise), ..bench.episode.clone() };
            let baseline_eps = run_cell(bench, &Policy::AnswerImmediately, tasks, master, &episode)?;
            let baseline_records: Vec<EpisodeRecord> =
                baseline_eps.iter().map(|e| EpisodeRecord::from_trace(&e.trace)).collect();
            let b = accuracy(&baseline_records)?;
            for &method in &bench.methods {
                let (records, episodes): (Vec<EpisodeRecord>, Vec<TraceEpisode>) = match bench.policy(method)? {
                    None => {
                        let records = tasks
                            .iter()
                            .map(|t| {
                                let l = t.oracle_length.unwrap_or(1).max(1);
                                EpisodeRecord {
                                    task_id: t.id.clone(),
                                    kind: t.kind,
                                    split: t.split,
                                    success: true,
                                    correct: t.kind.is_question().then_some(true),
                                    path_length: l as u64,
                                    oracle_length: l,
                                }
                            })
                            .collect();
                        (records, Vec::new())
                    }
                    Some(policy) => {
                        let eps = if method == Method::AnswerImmediately {
                            baseline_eps.clone()
                        } else {
                            run_cell(bench, &policy, tasks, master, &episode)?
                        };
                        (eps.iter().map(|e| EpisodeRecord::from_trace(&e.trace)).collect(), eps)
                    }
                };
                rows.push(summarize(
                    method.name(),
                    set_name,
                    noise.name(),
                    &records,
                    b,
                    bench.resamples,
                    bench.seed,
                    &config_digest,
                )?);
                let header = TraceHeader::new(master, method.name(), &config_digest);
                runs.push(Run {
                    method,
                    task_set: set_name.clone(),
                    noise,
                    records,
                    traces: TraceFile { header, episodes },
                });
            }
        }
    }
    Ok(BenchResult { rows, runs, config_digest })
}

const COLUMNS: [&str; 13] = [
    "method",
    "task_set",
    "noise",
    "episodes",
    "accuracy",
    "accuracy_lo",
    "accuracy_hi",
    "mean_length",
    "spl",
    "spl_lo",
    "spl_hi",
    "baseline",
    "sspl",
];

fn cells(r: &BenchmarkSummary) -> [String; 13] {
    [
        r.method.clone(),
        r.task_set.clone(),
        r.noise.clone(),
        r.episodes.to_string(),
        format!("{:.4}", r.accuracy),
        format!("{:.4}", r.accuracy_ci.0),
        format!("{:.4}", r.accuracy_ci.1),
        format!("{:.2}", r.mean_length),
        format!("{:.4}", r.spl),
        format!("{:.4}", r.spl_ci.0),
        format!("{:.4}", r.spl_ci.1),
        format!("{:.4}", r.baseline),
        format!("{:.4}", r.sspl),
    ]
}

impl BenchResult {
    pub fn summary_csv(&self) -> String {
        let mut s = COLUMNS.join(",");
        s.push_str(",config_digest\n");
        for r in &self.rows {
            s.push_str(&cells(r).join(","));
            let _ = writeln!(s, ",{}", r.config_digest);
        }
        s
    }

    /// Column-aligned console table.
    pub fn summary_table(&self) -> String {
        let body: Vec<[String; 13]> = self.rows.iter().map(cells).collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|i| body.iter().map(|r| r[i].len()).chain([COLUMNS[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cols: Vec<&str>| {
            let mut s: String = cols
                .iter()
                .enumerate()
                .map(|(i, c)| if i < 3 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
                .collect::<Vec<_>>()
                .join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        let mut s = line(COLUMNS.to_vec());
        for r in &body {
            s.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        let _ = writeln!(s, "config digest {}", self.config_digest);
        s
    }

    pub fn records_csv(&self) -> String {
        let mut s = String::from("method,task_set,noise,task_id,kind,split,success,correct,path_length,oracle_length\n");
        for run in &self.runs {
            for r in &run.records {
                let correct = r.correct.map_or(String::new(), |c| c.to_string());
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    run.method,
                    run.task_set,
                    run.noise.name(),
                    r.task_id,
                    r.kind,
                    r.split.name(),
                    r.success,
                    correct,
                    r.path_length,
                    r.oracle_length
                );
            }
        }
        s
    }

    /// Writes `summary.csv`, `summary.txt`, `records.csv` and one trace file
    /// per run under `dir/traces`.
    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        let traces = dir.join("traces");
        std::fs::create_dir_all(&traces)?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("summary.txt"), self.summary_table())?;
        std::fs::write(dir.join("records.csv"), self.records_csv())?;
        for run in &self.runs {
            if run.traces.episodes.is_empty() {
                continue;
            }
            let name = format!("{}__{}__{}.jsonl", run.method, run.task_set, run.noise.name());
            std::fs::write(traces.join(name), run.traces.to_jsonl())?;
        }
        Ok(())
    }

    pub fn row(&self, method: Method, task_set: &str, noise: NoiseMode) -> Option<&BenchmarkSummary> {
        self.rows.iter().find(|r| r.method == method.name() && r.task_set == task_set && r.noise == noise.name())
    }
}
