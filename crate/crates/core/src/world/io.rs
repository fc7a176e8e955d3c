//! Versioned JSON files for scene and task sets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::task::TaskSpec;
use super::WorldError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSet {
    pub version: u32,
    pub scenes: Vec<Scene>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub version: u32,
    pub tasks: Vec<TaskSpec>,
}

impl SceneSet {
    pub fn new(scenes: Vec<Scene>) -> Self {
        SceneSet { version: FORMAT_VERSION, scenes }
    }

    pub fn find(&self, seed: u64) -> Option<&Scene> {
        self.scenes.iter().find(|s| s.seed == seed)
    }
}

impl TaskSet {
    pub fn new(tasks: Vec<TaskSpec>) -> Self {
        TaskSet { version: FORMAT_VERSION, tasks }
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("world types serialize");
    s.push('\n');
    s
}

/// Parses a versioned file, rejecting any version but [`FORMAT_VERSION`].
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, WorldError> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| WorldError::Format(e.to_string()))?;
    if probe.version != FORMAT_VERSION {
        return Err(WorldError::Version { found: probe.version, expected: FORMAT_VERSION });
    }
    serde_json::from_str(text).map_err(|e| WorldError::Format(e.to_string()))
}

pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<(), WorldError> {
    std::fs::write(path, to_json(value)).map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, WorldError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}
