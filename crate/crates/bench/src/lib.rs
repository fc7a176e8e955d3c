//! Fixtures shared by the benchmarks.

use hiprl::knowledge::{goal_for_vsp, search_goal, to_pddl_problem, KnowledgeState};
use hiprl::pddl::{ground, GroundTask};
use hiprl::controllers::household;
use hiprl::world::{generate_scene, generate_task, Scene, SceneConfig, TaskKind, TaskSpec};

/// A relocation task in scene `seed`.
pub fn put_in_task(seed: u64) -> (Scene, TaskSpec) {
    (0..).find_map(|s| {
        let scene = generate_scene(seed + s, &SceneConfig::default()).ok()?;
        let task = generate_task(&scene, seed, TaskKind::PutIn).ok()?;
        Some((scene, task))
    })
    .expect("some seed yields a relocation task")
}

/// The grounded planning task for `task` with every receptacle known.
pub fn global_layout_problem(scene: &Scene, task: &TaskSpec) -> GroundTask {
    let k = KnowledgeState::with_global_layout(scene, task.start);
    let goal = goal_for_vsp(task).expect("relocation task");
    let pp = to_pddl_problem(&k, &search_goal(goal.subject));
    ground(household(), &pp.problem).expect("generated problems ground")
}
