//! Seeded scene and task sets.

use rayon::prelude::*;

use crate::controllers::shortest_path_estimate;
use crate::world::rng;
use crate::world::{generate_scene, generate_task, Scene, SceneConfig, SceneSet, Split, TaskKind, TaskSet, TaskSpec, WorldError};

/// `count` scenes with seeds derived from `master`. Seeds whose layout cannot
/// be generated are skipped.
pub fn generate_scenes(master: u64, count: usize, config: &SceneConfig) -> Result<SceneSet, WorldError> {
    let mut scenes = Vec::with_capacity(count);
    let mut i = 0u64;
    let mut last_err = None;
    while scenes.len() < count {
        if i >= 4 * count as u64 + 16 {
            return Err(last_err.unwrap_or_else(|| WorldError::Infeasible("no scene could be generated".into())));
        }
        match generate_scene(rng::sub_seed(master, &format!("scene/{i}")), config) {
            Ok(s) => scenes.push(s),
            Err(e @ WorldError::Infeasible(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
        i += 1;
    }
    Ok(SceneSet::new(scenes))
}

/// Up to `per_scene` tasks of each kind in every scene, labelled `split`,
/// with oracle lengths filled in. Kinds a scene cannot support are skipped.
pub fn generate_tasks(scenes: &[Scene], kinds: &[TaskKind], per_scene: usize, split: Split, master: u64) -> TaskSet {
    let mut tasks: Vec<(usize, TaskSpec)> = Vec::new();
    for (si, scene) in scenes.iter().enumerate() {
        for &kind in kinds {
            let mut made = 0;
            for j in 0..4 * per_scene {
                if made == per_scene {
                    break;
                }
                let seed = rng::sub_seed(master, &format!("task/{}/{}/{}/{j}", split.name(), scene.seed, kind.name()));
                if let Ok(mut t) = generate_task(scene, seed, kind) {
                    t.split = split;
                    tasks.push((si, t));
                    made += 1;
                }
            }
        }
    }
    let tasks = tasks
        .into_par_iter()
        .map(|(si, mut t)| {
            t.oracle_length = Some(shortest_path_estimate(&scenes[si], &t).max(1));
            t
        })
        .collect();
    TaskSet::new(tasks)
}
