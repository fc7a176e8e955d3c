//! Symbolic state summary fed to the meta-controller.

use serde::{Deserialize, Serialize};

use super::MetaAction;
use crate::knowledge::{Containment, KnowledgeState};
use crate::world::{ObjectClass, TaskKind, TaskSpec};

pub const FEATURE_DIM: usize = 31;

/// Names of the feature slots, in order. Hashed into checkpoints so that a
/// policy is never loaded against a different layout.
pub fn feature_names() -> Vec<String> {
    let mut names = vec!["bias".to_string()];
    names.extend(TaskKind::ALL.iter().map(|k| format!("kind:{k}")));
    names.extend(ObjectClass::ALL.iter().map(|c| format!("subject:{c}")));
    names.extend(
        [
            "checked_fraction",
            "subject_found",
            "target_known",
            "holding_subject",
            "map_known_fraction",
            "primitive_steps",
            "hierarchical_steps",
            "last:none",
            "last:planner",
            "last:explorer",
            "last:scanner",
            "last:stopper",
            "last_success",
        ]
        .map(String::from),
    );
    names
}

/// What the meta-controller remembers between decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub last: Option<(MetaAction, bool)>,
    pub hierarchical_steps: u32,
    pub primitive_steps: u64,
    pub max_hierarchical_steps: u32,
    pub max_primitive_steps: u64,
}

pub type FeatureVector = [f64; FEATURE_DIM];

pub fn featurize(k: &KnowledgeState, task: &TaskSpec, history: &History) -> FeatureVector {
    let mut f = [0.0; FEATURE_DIM];
    f[0] = 1.0;
    f[1 + TaskKind::ALL.iter().position(|&x| x == task.kind).unwrap()] = 1.0;
    f[5 + task.object.index()] = 1.0;
    let o = 18;
    let candidates: Vec<_> = k.candidates(task.object).collect();
    if !candidates.is_empty() {
        f[o] = candidates.iter().filter(|r| r.checked).count() as f64 / candidates.len() as f64;
    }
    let found = match task.kind {
        TaskKind::PutIn => k.located(task.object).next().is_some(),
        _ => k.entities.iter().any(|e| e.class == task.object),
    };
    f[o + 1] = found as u8 as f64;
    f[o + 2] = task.receptacle.is_some_and(|rc| k.receptacles.values().any(|r| r.class == rc)) as u8 as f64;
    f[o + 3] = k.held_entity().is_some_and(|e| e.class == task.object && e.containment == Containment::Held) as u8 as f64;
    f[o + 4] = k.map.known_count() as f64 / k.map.len().max(1) as f64;
    f[o + 5] = (history.primitive_steps as f64 / history.max_primitive_steps.max(1) as f64).min(1.0);
    f[o + 6] = (history.hierarchical_steps as f64 / history.max_hierarchical_steps.max(1) as f64).min(1.0);
    let last = match history.last {
        None => 0,
        Some((a, _)) => 1 + a.index(),
    };
    f[o + 7 + last] = 1.0;
    f[o + 12] = match history.last {
        None => 0.0,
        Some((_, true)) => 1.0,
        Some((_, false)) => -1.0,
    };
    f
}
