use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use hiprl::controllers::{digest, Env};
use hiprl::eval::{self, Benchmark, NoiseMode, TraceEpisode, TraceFile, TraceHeader};
use hiprl::knowledge::{goal_for_question, goal_for_vsp, to_pddl_problem, KnowledgeState};
use hiprl::metapolicy::{
    episode_seeds, load_checkpoint, run_episode, save_checkpoint, scripted_policy, train, Checkpoint, EpisodeConfig,
    MetaAction, MetaPolicy, Mode, Policy, RewardConfig, ScriptedKind, TrainConfig,
};
use hiprl::pddl::{ground, parse_domain, parse_problem, print_problem, DOMAIN_PDDL};
use hiprl::planner::{plan, validate, Outcome, PlannerConfig};
use hiprl::world::{io, Pitch, SceneConfig, SceneSet, Split, TaskKind, TaskSet, WorldError};

#[derive(Parser)]
#[command(name = "hiprl", version, about = "Hierarchical planning and learning agents in a household grid world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Seed {
    /// Master seed; defaults to $HIPRL_SEED, then 0.
    #[arg(long, env = "HIPRL_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene set.
    GenScenes {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 14)]
        width: i32,
        #[arg(long, default_value_t = 11)]
        height: i32,
        #[command(flatten)]
        seed: Seed,
    },
    /// Generate tasks for a scene set, with oracle lengths.
    GenTasks {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// train, seen or unseen.
        #[arg(long, default_value = "train")]
        split: String,
        /// Comma-separated task kinds.
        #[arg(long, default_value = "put_in")]
        kinds: String,
        #[arg(long, default_value_t = 5)]
        per_scene: usize,
        #[command(flatten)]
        seed: Seed,
    },
    /// Plan for a standalone PDDL problem.
    Plan {
        /// Domain file; the built-in household domain when omitted.
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        node_budget: usize,
        #[command(flatten)]
        seed: Seed,
    },
    /// Run one episode.
    Run {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        task: PathBuf,
        /// Task id within the task file; required when it holds several.
        #[arg(long)]
        task_id: Option<String>,
        /// hiprl, planner_only, learner_only, random or answer_immediately.
        #[arg(long, default_value = "planner_only")]
        policy: String,
        /// Checkpoint for hiprl and learner_only.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// gt or default.
        #[arg(long, default_value = "default")]
        noise: String,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the PDDL problem built from the opening observation.
        #[arg(long)]
        dump_pddl: Option<PathBuf>,
        #[command(flatten)]
        seed: Seed,
    },
    /// Train a meta-policy.
    Train {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        /// Held-out tasks for the learning curve.
        #[arg(long)]
        probe_tasks: Option<PathBuf>,
        /// TOML training configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Train without the planner, with shaped rewards.
        #[arg(long)]
        learner_only: bool,
        #[arg(long)]
        checkpoint_out: PathBuf,
        #[arg(long)]
        curve_out: Option<PathBuf>,
        #[command(flatten)]
        seed: Seed,
    },
    /// Run a benchmark described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: Seed,
    },
    /// Verify a trace file by re-execution.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Print a frame per hierarchical step.
        #[arg(long)]
        render: bool,
        #[command(flatten)]
        seed: Seed,
    },
}

enum Failure {
    Usage(String),
    Input(anyhow::Error),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

type CmdResult = Result<(), Failure>;

fn write(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(input)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)
}

fn parse_noise(s: &str) -> Result<NoiseMode, Failure> {
    s.parse().map_err(|e: eval::EvalError| Failure::Usage(e.to_string()))
}

fn gen_scenes(count: usize, out: &Path, width: i32, height: i32, seed: u64) -> CmdResult {
    let config = SceneConfig { width, height, ..SceneConfig::default() };
    let set = eval::generate_scenes(seed, count, &config).map_err(input)?;
    io::save(out, &set).map_err(input)?;
    println!("wrote {} scenes to {}", set.scenes.len(), out.display());
    Ok(())
}

fn gen_tasks(scenes: &Path, out: &Path, split: &str, kinds: &str, per_scene: usize, seed: u64) -> CmdResult {
    let split: Split = split.parse().map_err(|e: WorldError| Failure::Usage(e.to_string()))?;
    let kinds: Vec<TaskKind> = kinds
        .split(',')
        .map(|k| k.trim().parse().map_err(|e: WorldError| Failure::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let scenes: SceneSet = io::load(scenes).map_err(input)?;
    let set = eval::generate_tasks(&scenes.scenes, &kinds, per_scene, split, seed);
    io::save(out, &set).map_err(input)?;
    println!("wrote {} {} tasks to {}", set.tasks.len(), split.name(), out.display());
    Ok(())
}

fn plan_cmd(domain: Option<&Path>, problem: &Path, node_budget: usize) -> CmdResult {
    let domain_text = match domain {
        Some(p) => read(p)?,
        None => DOMAIN_PDDL.to_string(),
    };
    let domain = parse_domain(&domain_text).map_err(input)?;
    let problem = parse_problem(&read(problem)?, &domain).map_err(input)?;
    let task = ground(&domain, &problem).map_err(input)?;
    let result = plan(&task, &PlannerConfig { node_budget, ..PlannerConfig::default() });
    match result.outcome {
        Outcome::Plan(p) => {
            validate(&task, &p.actions).map_err(|v| Failure::Invariant(format!("planner returned an invalid plan: {v}")))?;
            for &a in &p.actions {
                println!("{}", task.actions[a].label());
            }
            println!("; cost {} ({} actions, {} expanded)", p.cost, p.actions.len(), result.stats.expanded);
        }
        other => println!("; no plan: {other:?} ({} expanded)", result.stats.expanded),
    }
    Ok(())
}

fn policy_for(name: &str, checkpoint: Option<&Path>) -> Result<Policy, Failure> {
    let learned = |fallback: ScriptedKind| -> Result<Policy, Failure> {
        match checkpoint {
            Some(p) => Ok(Policy::Learned { policy: load_checkpoint(p).map_err(input)?.policy, mode: Mode::Sample }),
            None if fallback == ScriptedKind::LearnerOnly => Ok(scripted_policy(fallback)),
            None => Err(Failure::Usage("--policy hiprl needs --checkpoint".into())),
        }
    };
    match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "hiprl" => learned(ScriptedKind::PlannerOnly),
        "learner_only" => learned(ScriptedKind::LearnerOnly),
        "planner_only" => Ok(scripted_policy(ScriptedKind::PlannerOnly)),
        "random" => Ok(scripted_policy(ScriptedKind::Random)),
        "answer_immediately" => Ok(scripted_policy(ScriptedKind::AnswerImmediately)),
        other => Err(Failure::Usage(format!("unknown policy `{other}`"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_cmd(
    scene: &Path,
    task: &Path,
    task_id: Option<&str>,
    policy: &str,
    checkpoint: Option<&Path>,
    noise: &str,
    trace_out: Option<&Path>,
    dump_pddl: Option<&Path>,
    seed: u64,
) -> CmdResult {
    let scenes: SceneSet = io::load(scene).map_err(input)?;
    let tasks: TaskSet = io::load(task).map_err(input)?;
    let task = match task_id {
        Some(id) => tasks.tasks.iter().find(|t| t.id == id).ok_or_else(|| input(anyhow!("no task `{id}`")))?,
        None if tasks.tasks.len() == 1 => &tasks.tasks[0],
        None => return Err(Failure::Usage(format!("{} tasks in file; pick one with --task-id", tasks.tasks.len()))),
    };
    let scene = scenes.find(task.scene_seed).ok_or_else(|| input(anyhow!("scene {} not in scene file", task.scene_seed)))?;
    let policy = policy_for(policy, checkpoint)?;
    let mode = parse_noise(noise)?;
    let defaults = EpisodeConfig::default();
    let config = EpisodeConfig { noise: mode.model(&defaults.noise), ..defaults };
    let seeds = episode_seeds(seed, task);
    if let Some(path) = dump_pddl {
        // The same opening look the episode starts with.
        let mut env = Env::new(scene, task, config.noise_for(task.split), seeds.detector);
        let mut k = KnowledgeState::for_scene(scene, task.start);
        env.look(&mut k, Pitch::Level);
        let goal = if task.kind.is_question() { goal_for_question(task) } else { goal_for_vsp(task) }.map_err(input)?;
        write(path, &print_problem(&to_pddl_problem(&k, &goal).problem))?;
    }
    let trace = run_episode(scene, task, &policy, seeds, &config);
    println!("task {}: {}", task.id, task.question());
    let phases: Vec<&str> = trace.records.iter().map(|r| r.action.name()).collect();
    println!("phases: {}", phases.join(" -> "));
    println!(
        "success {}, answer {}, length {}, oracle {}",
        trace.success,
        trace.answer.map_or("none".into(), |a| a.to_string()),
        trace.primitive_length,
        trace.oracle_length
    );
    if let Some(path) = trace_out {
        let file = TraceFile {
            header: TraceHeader::new(seed, policy.name(), &digest(&config)),
            episodes: vec![TraceEpisode { scene: scene.clone(), task: task.clone(), trace }],
        };
        write(path, &file.to_jsonl())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn train_cmd(
    scenes: &Path,
    tasks: &Path,
    probe_tasks: Option<&Path>,
    config: Option<&Path>,
    learner_only: bool,
    checkpoint_out: &Path,
    curve_out: Option<&Path>,
    seed: Option<u64>,
) -> CmdResult {
    let scenes: SceneSet = io::load(scenes).map_err(input)?;
    let tasks: TaskSet = io::load(tasks).map_err(input)?;
    let probe: Vec<_> = match probe_tasks {
        Some(p) => io::load::<TaskSet>(p).map_err(input)?.tasks,
        None => Vec::new(),
    };
    let mut tc: TrainConfig = match config {
        Some(p) => toml::from_str(&read(p)?).map_err(input)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        tc.seed = s;
    }
    let actions = if learner_only {
        tc.episode.rewards = RewardConfig::shaped();
        vec![MetaAction::Explorer, MetaAction::Scanner, MetaAction::Stopper]
    } else {
        MetaAction::ALL.to_vec()
    };
    let out = train(MetaPolicy::zeros(actions), &scenes.scenes, &tasks.tasks, &probe, &tc).map_err(|e| match e {
        hiprl::metapolicy::MetaError::Diverged(_) => Failure::Invariant(e.to_string()),
        e => input(e),
    })?;
    save_checkpoint(checkpoint_out, &Checkpoint::new(out.policy.clone(), tc)).map_err(input)?;
    if let Some(p) = curve_out {
        write(p, &out.curve_csv())?;
    }
    println!("trained on {} episodes; checkpoint {}", out.episodes, checkpoint_out.display());
    if let Some(last) = out.curve.last() {
        println!("probe success {:.3} at {} hierarchical steps", last.probe_success, last.hierarchical_steps);
    }
    Ok(())
}

fn bench_cmd(config: &Path, out: &Path, seed: Option<u64>) -> CmdResult {
    let mut bench = Benchmark::load(config).map_err(input)?;
    if let Some(s) = seed {
        bench.seed = s;
    }
    let result = eval::run_benchmark(&bench).map_err(input)?;
    result.write(out).map_err(input)?;
    print!("{}", result.summary_table());
    Ok(())
}

fn replay_cmd(trace: &Path, render: bool) -> CmdResult {
    let file = TraceFile::from_jsonl(&read(trace)?).map_err(input)?;
    if render {
        for e in &file.episodes {
            println!("{}", eval::render(&e.scene, &e.task, &e.trace));
        }
    }
    let report = eval::replay(&file);
    println!("replayed {} episodes, {} events", report.episodes, report.events);
    for d in &report.divergences {
        println!("divergence in episode {} at event {}", d.episode, d.event);
        println!("  logged:   {}", d.logged);
        println!("  replayed: {}", d.replayed);
    }
    for i in &report.inconsistencies {
        println!("inconsistent: {i}");
    }
    if report.is_clean() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "{} divergences, {} inconsistencies",
            report.divergences.len(),
            report.inconsistencies.len()
        )))
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::GenScenes { count, out, width, height, seed } => {
            gen_scenes(count, &out, width, height, seed.seed.unwrap_or(0))
        }
        Command::GenTasks { scenes, out, split, kinds, per_scene, seed } => {
            gen_tasks(&scenes, &out, &split, &kinds, per_scene, seed.seed.unwrap_or(0))
        }
        Command::Plan { domain, problem, node_budget, .. } => plan_cmd(domain.as_deref(), &problem, node_budget),
        Command::Run { scene, task, task_id, policy, checkpoint, noise, trace_out, dump_pddl, seed } => run_cmd(
            &scene,
            &task,
            task_id.as_deref(),
            &policy,
            checkpoint.as_deref(),
            &noise,
            trace_out.as_deref(),
            dump_pddl.as_deref(),
            seed.seed.unwrap_or(0),
        ),
        Command::Train { scenes, tasks, probe_tasks, config, learner_only, checkpoint_out, curve_out, seed } => train_cmd(
            &scenes,
            &tasks,
            probe_tasks.as_deref(),
            config.as_deref(),
            learner_only,
            &checkpoint_out,
            curve_out.as_deref(),
            seed.seed,
        ),
        Command::Bench { config, out, seed } => bench_cmd(&config, &out, seed.seed),
        Command::Replay { trace, render, .. } => replay_cmd(&trace, render),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::Invariant(m) => eprintln!("invariant violated: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
