//! Partially observable grid kitchen: scenes, tasks, primitive actions and a
//! configurable detector.

mod classes;
mod geometry;
pub mod io;
pub mod rng;
mod scene;
mod sim;
mod task;

pub use classes::{EntityClass, ObjectClass, ReceptacleClass, UnknownClass};
pub use geometry::{Cell, CellBox, Heading, Pose};
pub use scene::{generate_scene, Grid, Object, Place, Receptacle, Scene, SceneConfig, Tile};
pub use sim::{
    line_of_sight, view_cone, visible_cells, Agent, Detection, DetectionFrame, EntityId, NoiseModel, NoiseRecord, Observation,
    Pitch, PrimitiveAction, VisibleCell, WorldState,
};
pub use task::{generate_task, true_answer, Answer, Split, TaskKind, TaskSpec};
pub use io::{SceneSet, TaskSet, FORMAT_VERSION};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("infeasible scene configuration: {0}")]
    Infeasible(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("{0}")]
    NoValidTask(String),
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("unsupported file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}
