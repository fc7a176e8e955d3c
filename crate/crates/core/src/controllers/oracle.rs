//! Shortest-path estimate: the planner loop with the global layout known.

use super::planner::run_planner_controller;
use super::{ControllerConfig, Env};
use crate::knowledge::{goal_for_question, goal_for_vsp, KnowledgeState};
use crate::world::{NoiseModel, Pitch, Scene, TaskSpec};

/// Primitive steps taken by the planner loop when every receptacle and the
/// whole map are known up front and detections are exact. Small objects
/// still have to be found by looking.
pub fn shortest_path_estimate(scene: &Scene, task: &TaskSpec) -> u32 {
    let mut env = Env::new(scene, task, NoiseModel::ground_truth(), 0);
    let mut k = KnowledgeState::with_global_layout(scene, task.start);
    env.look(&mut k, Pitch::Level);
    let goal = if task.kind.is_question() { goal_for_question(task) } else { goal_for_vsp(task) }
        .expect("kind-appropriate goal");
    let config = ControllerConfig { planner_budget: 1000, navigate_budget: 1000, ..ControllerConfig::default() };
    run_planner_controller(&mut env, &mut k, &goal, &config);
    env.steps() as u32
}
