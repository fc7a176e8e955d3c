//! Line-delimited trace files, replay verification and text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::controllers::{digest, EnvEvent};
use crate::knowledge::{CellState, KnowledgeState};
use crate::metapolicy::{EpisodeTrace, MetaAction};
use crate::world::rng;
use crate::world::{Cell, Heading, Scene, TaskSpec, WorldState};

pub const TRACE_FORMAT: &str = "hiprl-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub master_seed: u64,
    pub method: String,
    pub config_digest: String,
}

impl TraceHeader {
    pub fn new(master_seed: u64, method: &str, config_digest: &str) -> Self {
        TraceHeader {
            format: TRACE_FORMAT.into(),
            version: TRACE_VERSION,
            master_seed,
            method: method.into(),
            config_digest: config_digest.into(),
        }
    }
}

/// One episode with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEpisode {
    pub scene: Scene,
    pub task: TaskSpec,
    pub trace: EpisodeTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub episodes: Vec<TraceEpisode>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header(TraceHeader),
    Episode(Box<TraceEpisode>),
}

impl TraceFile {
    /// Header line followed by one line per episode.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&Line::Header(self.header.clone())).expect("serializable");
        out.push('\n');
        for e in &self.episodes {
            out.push_str(&serde_json::to_string(&Line::Episode(Box::new(e.clone()))).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, EvalError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |n: usize, e: serde_json::Error| EvalError::Format(format!("line {}: {e}", n + 1));
        let (n, first) = lines.next().ok_or_else(|| EvalError::Format("empty trace file".into()))?;
        let header = match serde_json::from_str(first).map_err(|e| bad(n, e))? {
            Line::Header(h) => h,
            Line::Episode(_) => return Err(EvalError::Format("trace file does not start with a header".into())),
        };
        if header.format != TRACE_FORMAT || header.version != TRACE_VERSION {
            return Err(EvalError::Format(format!(
                "unsupported trace format {} v{} (expected {TRACE_FORMAT} v{TRACE_VERSION})",
                header.format, header.version
            )));
        }
        let mut episodes = Vec::new();
        for (n, l) in lines {
            match serde_json::from_str(l).map_err(|e| bad(n, e))? {
                Line::Episode(e) => episodes.push(*e),
                Line::Header(_) => return Err(EvalError::Format(format!("line {}: second header", n + 1))),
            }
        }
        Ok(TraceFile { header, episodes })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub episode: usize,
    /// Index into the episode's event log.
    pub event: usize,
    pub logged: String,
    pub replayed: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub episodes: usize,
    pub events: usize,
    pub divergences: Vec<Divergence>,
    /// Bookkeeping that does not add up, one message per problem.
    pub inconsistencies: Vec<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.divergences.is_empty() && self.inconsistencies.is_empty()
    }
}

fn describe(e: &EnvEvent) -> String {
    serde_json::to_string(e).expect("serializable")
}

/// Re-executes the logged primitives and detector calls from the recorded
/// seeds. Returns the first event whose recomputed observation differs.
pub fn replay_episode(scene: &Scene, task: &TaskSpec, trace: &EpisodeTrace) -> Result<(), (usize, String, String)> {
    let mut world = WorldState::new(scene, task.start);
    let mut stream = rng::stream(trace.seeds.detector, "detector");
    for (i, logged) in trace.events.iter().enumerate() {
        let replayed = match logged {
            EnvEvent::Step { action, .. } => match world.step(*action) {
                Ok(obs) => EnvEvent::Step { action: *action, success: obs.success, obs: digest(&obs) },
                Err(e) => return Err((i, describe(logged), format!("error: {e}"))),
            },
            EnvEvent::Detect { seq, pitch, .. } => {
                let frame = world.detect(*pitch, &trace.noise, &mut stream);
                EnvEvent::Detect { seq: *seq, pitch: *pitch, frame: digest(&frame) }
            }
        };
        if &replayed != logged {
            return Err((i, describe(logged), describe(&replayed)));
        }
    }
    Ok(())
}

fn check_accounting(trace: &EpisodeTrace) -> Vec<String> {
    let mut out = Vec::new();
    let steps = trace.events.iter().filter(|e| matches!(e, EnvEvent::Step { .. })).count() as u64;
    if steps != trace.primitive_length {
        out.push(format!("{}: {steps} logged steps but length {}", trace.task_id, trace.primitive_length));
    }
    let summed: u64 = trace.records.iter().map(|r| r.result.steps).sum();
    if summed != trace.primitive_length {
        out.push(format!("{}: controllers report {summed} steps but length {}", trace.task_id, trace.primitive_length));
    }
    let stops = trace.records.iter().filter(|r| r.action == MetaAction::Stopper).count();
    if stops != 1 || trace.records.last().map(|r| r.action) != Some(MetaAction::Stopper) {
        out.push(format!("{}: expected exactly one final stopper record, found {stops}", trace.task_id));
    }
    out
}

pub fn replay(file: &TraceFile) -> ReplayReport {
    let mut report = ReplayReport { episodes: file.episodes.len(), ..ReplayReport::default() };
    for (n, e) in file.episodes.iter().enumerate() {
        report.events += e.trace.events.len();
        if let Err((event, logged, replayed)) = replay_episode(&e.scene, &e.task, &e.trace) {
            report.divergences.push(Divergence { episode: n, event, logged, replayed });
        }
        report.inconsistencies.extend(check_accounting(&e.trace));
    }
    report
}

fn heading_char(h: Heading) -> char {
    match h {
        Heading::N => '^',
        Heading::E => '>',
        Heading::S => 'v',
        Heading::W => '<',
    }
}

/// Ground truth on the left, the agent's map on the right.
fn frame(world: &WorldState, k: &KnowledgeState) -> String {
    let truth = world.scene.render();
    let pose = world.pose();
    let mut out = String::new();
    for (y, row) in truth.iter().enumerate() {
        let mut left: Vec<char> = row.chars().collect();
        let mut right: Vec<char> = Vec::with_capacity(left.len());
        for x in 0..left.len() {
            let c = Cell { x: x as i32, y: y as i32 };
            right.push(match k.map.get(c) {
                CellState::Unknown => '?',
                CellState::Free => '.',
                CellState::Blocked => match k.receptacles.values().find(|r| r.cell == c) {
                    Some(r) => r.class.name().chars().next().unwrap().to_ascii_lowercase(),
                    None => '#',
                },
            });
        }
        if pose.cell.y == y as i32 {
            left[pose.cell.x as usize] = heading_char(pose.heading);
            right[pose.cell.x as usize] = heading_char(pose.heading);
        }
        let _ = writeln!(out, "  {}   {}", left.into_iter().collect::<String>(), right.into_iter().collect::<String>());
    }
    out
}

/// Step-by-step text rendering: one frame per hierarchical decision, then
/// the phase sequence and outcome.
pub fn render(scene: &Scene, task: &TaskSpec, trace: &EpisodeTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "task {}: {}", task.id, task.question());
    let _ = writeln!(out, "method {}, noise {:?}", trace.method, trace.noise);
    let mut world = WorldState::new(scene, task.start);
    let mut k = KnowledgeState::for_scene(scene, task.start);
    let mut stream = rng::stream(trace.seeds.detector, "detector");
    let mut events = trace.events.iter();
    let mut apply = |e: &EnvEvent, world: &mut WorldState, k: &mut KnowledgeState| match e {
        EnvEvent::Step { action, .. } => {
            if let Ok(obs) = world.step(*action) {
                k.observe_step(*action, &obs);
            }
        }
        EnvEvent::Detect { seq, pitch, .. } => {
            let f = world.detect(*pitch, &trace.noise, &mut stream);
            k.merge_detections(*seq, &f);
        }
    };
    // The free opening look precedes the first decision.
    if let Some(e) = events.next() {
        apply(e, &mut world, &mut k);
    }
    let _ = writeln!(out, "\n[start]");
    out.push_str(&frame(&world, &k));
    for (i, r) in trace.records.iter().enumerate() {
        for e in events.by_ref().take((r.result.steps + r.result.detector_calls) as usize) {
            apply(e, &mut world, &mut k);
        }
        let status = match &r.result.termination {
            crate::controllers::Termination::Success => "success".to_string(),
            crate::controllers::Termination::Failure(why) => format!("failure ({why})"),
            crate::controllers::Termination::BudgetExhausted => "budget exhausted".to_string(),
        };
        let forced = if r.forced { ", forced" } else { "" };
        let _ = writeln!(
            out,
            "\n[{i}] {} -> {status}{forced}; {} steps, {} cells, {} checked, reward {:+.2}",
            r.action, r.result.steps, r.result.new_cells, r.result.newly_checked, r.reward
        );
        out.push_str(&frame(&world, &k));
    }
    let phases: Vec<&str> = trace.records.iter().map(|r| r.action.name()).collect();
    let _ = writeln!(out, "\nphases: {}", phases.join(" -> "));
    let answer = trace.answer.map_or("none".to_string(), |a| a.to_string());
    let _ = writeln!(
        out,
        "answer {answer}, success {}, length {}, oracle {}",
        trace.success, trace.primitive_length, trace.oracle_length
    );
    out
}
