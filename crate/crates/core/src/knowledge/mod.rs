//! Knowledge state: occupancy map, merged detections and receptacle beliefs,
//! plus goal construction and compilation into PDDL problems.

mod goal;
mod map;
mod problem;
mod state;

pub use goal::{
    containment_goal, existence_goal, goal_for_question, goal_for_vsp, put_in_goal, search_goal, GoalKind, GoalSpec,
};
pub use map::{CellState, OccupancyMap, UNKNOWN_COST, UNREACHABLE};
pub use problem::{access_cell, entity_name, location_name, to_pddl_problem, PddlProblem, AGENT};
pub use state::{
    Containment, Interaction, KnowledgeState, ReceptacleRecord, TrackedDetection, DECAY_FRAMES, MERGE_IOU,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnowledgeError {
    #[error("wrong task kind: {0}")]
    WrongKind(String),
}
