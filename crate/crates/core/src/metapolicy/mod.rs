//! The learned meta-controller, scripted baselines, and the episode and
//! training drivers.

mod episode;
mod features;
mod policy;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use episode::{
    episode_seeds, run_episode, scripted_policy, EpisodeConfig, EpisodeSeeds, EpisodeTrace, HierRecord, Policy,
    RewardConfig, ScriptedKind,
};
pub use features::{feature_names, featurize, FeatureVector, History, FEATURE_DIM};
pub use policy::{entropy, gradient_check, softmax, MetaPolicy, Mode};
pub use train::{probe, 
    load_checkpoint, save_checkpoint, schema_hash, train, Checkpoint, CurvePoint, TrainConfig, TrainOutput,
    CHECKPOINT_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaAction {
    Planner,
    Explorer,
    Scanner,
    Stopper,
}

impl MetaAction {
    pub const ALL: [MetaAction; 4] = [MetaAction::Planner, MetaAction::Explorer, MetaAction::Scanner, MetaAction::Stopper];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MetaAction::Planner => "planner",
            MetaAction::Explorer => "explorer",
            MetaAction::Scanner => "scanner",
            MetaAction::Stopper => "stopper",
        }
    }
}

impl fmt::Display for MetaAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("weights diverged: max |w| = {0} exceeds the bound")]
    Diverged(f64),
    #[error("checkpoint version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint feature schema {found} does not match {expected}")]
    Schema { found: String, expected: String },
    #[error("no training tasks")]
    NoTasks,
    #[error("scene {0} not found")]
    MissingScene(u64),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FromStr for MetaAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetaAction::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown meta-action {s}"))
    }
}
