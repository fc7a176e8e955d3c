//! Question-answering and object-relocation tasks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classes::{ObjectClass, ReceptacleClass};
use super::geometry::{Heading, Pose};
use super::rng;
use super::scene::{Place, Scene};
use super::sim::WorldState;
use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Existence,
    Counting,
    Containment,
    PutIn,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Existence, TaskKind::Counting, TaskKind::Containment, TaskKind::PutIn];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Existence => "existence",
            TaskKind::Counting => "counting",
            TaskKind::Containment => "containment",
            TaskKind::PutIn => "put_in",
        }
    }

    pub fn is_question(self) -> bool {
        self != TaskKind::PutIn
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "existence" => Ok(TaskKind::Existence),
            "counting" => Ok(TaskKind::Counting),
            "containment" => Ok(TaskKind::Containment),
            "put_in" | "putin" | "vsp" => Ok(TaskKind::PutIn),
            _ => Err(WorldError::Format(format!("unknown task kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    SeenTest,
    UnseenTest,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::SeenTest => "seen_test",
            Split::UnseenTest => "unseen_test",
        }
    }

    /// Scenes of this split were available during training.
    pub fn is_seen(self) -> bool {
        self != Split::UnseenTest
    }
}

impl FromStr for Split {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "train" => Ok(Split::Train),
            "seen_test" | "seen" => Ok(Split::SeenTest),
            "unseen_test" | "unseen" => Ok(Split::UnseenTest),
            _ => Err(WorldError::Format(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Count(u32),
}

impl Answer {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes => f.write_str("yes"),
            Answer::No => f.write_str("no"),
            Answer::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub scene_seed: u64,
    pub seed: u64,
    pub kind: TaskKind,
    pub object: ObjectClass,
    pub receptacle: Option<ReceptacleClass>,
    /// Ground-truth answer; `None` for relocation tasks.
    pub answer: Option<Answer>,
    pub start: Pose,
    pub split: Split,
    /// Cached shortest-path estimate in primitive steps.
    pub oracle_length: Option<u32>,
}

impl TaskSpec {
    pub fn question(&self) -> String {
        let o = self.object.name().to_lowercase();
        let r = self.receptacle.map(|r| r.name().to_lowercase()).unwrap_or_default();
        match self.kind {
            TaskKind::Existence => format!("Is there {} {o} in the room?", article(&o)),
            TaskKind::Counting => {
                let plural = if o.ends_with('o') { "es" } else { "s" };
                format!("How many {o}{plural} are in the room?")
            }
            TaskKind::Containment => format!("Is there {} {o} in the {r}?", article(&o)),
            TaskKind::PutIn => format!("Put the {o} in the {r}."),
        }
    }

    /// Relocation goal test on the true world.
    pub fn goal_met(&self, state: &WorldState) -> bool {
        let Some(rc) = self.receptacle else { return false };
        state.scene.objects.iter().any(|o| {
            o.class == self.object
                && matches!(o.place, Place::In(r) if state.scene.receptacles[r].class == rc)
        })
    }

    pub fn answer_correct(&self, given: Option<Answer>) -> bool {
        self.answer.is_some() && self.answer == given
    }
}

fn article(noun: &str) -> &'static str {
    if noun.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

/// Ground-truth answer of a question about `scene`.
pub fn true_answer(scene: &Scene, kind: TaskKind, object: ObjectClass, receptacle: Option<ReceptacleClass>) -> Option<Answer> {
    let count = scene.objects.iter().filter(|o| o.class == object).count() as u32;
    match kind {
        TaskKind::Existence => Some(Answer::from_bool(count > 0)),
        TaskKind::Counting => Some(Answer::Count(count)),
        TaskKind::Containment => {
            let rc = receptacle?;
            Some(Answer::from_bool(scene.objects.iter().any(|o| {
                o.class == object && matches!(o.place, Place::In(r) if scene.receptacles[r].class == rc)
            })))
        }
        TaskKind::PutIn => None,
    }
}

/// Draws a task of `kind` for `scene`. Relocation tasks are always solvable
/// and never already satisfied; existence questions are balanced yes/no.
pub fn generate_task(scene: &Scene, seed: u64, kind: TaskKind) -> Result<TaskSpec, WorldError> {
    let mut rng = rng::stream(seed, &format!("task/{}", scene.seed));
    let present: BTreeSet<ObjectClass> = scene.objects.iter().map(|o| o.class).collect();
    let absent: Vec<ObjectClass> = ObjectClass::ALL.into_iter().filter(|c| !present.contains(c)).collect();
    let present: Vec<ObjectClass> = present.into_iter().collect();
    let rclasses: BTreeSet<ReceptacleClass> = scene.receptacles.iter().map(|r| r.class).collect();
    let in_class = |o: ObjectClass, rc: ReceptacleClass| {
        scene
            .objects
            .iter()
            .any(|x| x.class == o && matches!(x.place, Place::In(r) if scene.receptacles[r].class == rc))
    };
    let none = || WorldError::NoValidTask(format!("no {kind} task exists in scene {}", scene.seed));

    let (object, receptacle) = match kind {
        TaskKind::Existence => {
            let want_yes = rng.gen_bool(0.5);
            let pool = match (want_yes, present.is_empty(), absent.is_empty()) {
                (true, false, _) | (false, _, true) => &present,
                _ => &absent,
            };
            (*pool.choose(&mut rng).ok_or_else(none)?, None)
        }
        TaskKind::Counting => {
            let pool = if absent.is_empty() || rng.gen_bool(0.8) { &present } else { &absent };
            (*pool.choose(&mut rng).or(present.first()).ok_or_else(none)?, None)
        }
        TaskKind::Containment => {
            let yes: Vec<(ObjectClass, ReceptacleClass)> = scene
                .objects
                .iter()
                .filter_map(|o| match o.place {
                    Place::In(r) => Some((o.class, scene.receptacles[r].class)),
                    _ => None,
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let no: Vec<(ObjectClass, ReceptacleClass)> = ObjectClass::ALL
                .into_iter()
                .flat_map(|o| rclasses.iter().map(move |&r| (o, r)))
                .filter(|&(o, r)| r.can_contain(o) && !in_class(o, r))
                .collect();
            let pool = if (rng.gen_bool(0.5) && !yes.is_empty()) || no.is_empty() { &yes } else { &no };
            let (o, r) = *pool.choose(&mut rng).ok_or_else(none)?;
            (o, Some(r))
        }
        TaskKind::PutIn => {
            let pairs: Vec<(ObjectClass, ReceptacleClass)> = present
                .iter()
                .flat_map(|&o| rclasses.iter().map(move |&r| (o, r)))
                .filter(|&(o, r)| {
                    r.can_contain(o)
                        && !in_class(o, r)
                        && scene.receptacles.iter().any(|x| x.class == r && scene.occupancy(x.id) < x.capacity)
                })
                .collect();
            let (o, r) = *pairs.choose(&mut rng).ok_or_else(none)?;
            (o, Some(r))
        }
    };

    let free = scene.free_cells();
    let cell = *free.choose(&mut rng).ok_or_else(none)?;
    let heading = Heading::ALL[rng.gen_range(0..4)];
    Ok(TaskSpec {
        id: format!("{}-{}-{}", kind.name(), scene.seed, seed),
        scene_seed: scene.seed,
        seed,
        kind,
        object,
        receptacle,
        answer: true_answer(scene, kind, object, receptacle),
        start: Pose { cell, heading },
        split: Split::Train,
        oracle_length: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_scene, SceneConfig};

    #[test]
    fn put_in_tasks_are_open_and_solvable() {
        for s in 0..20 {
            let scene = generate_scene(s, &SceneConfig::default()).unwrap();
            for t in 0..5 {
                let task = generate_task(&scene, t, TaskKind::PutIn).unwrap();
                let rc = task.receptacle.unwrap();
                assert!(rc.can_contain(task.object));
                assert!(scene.objects.iter().any(|o| o.class == task.object));
                let state = WorldState::new(&scene, task.start);
                assert!(!task.goal_met(&state));
                assert!(scene.is_free(task.start.cell));
            }
        }
    }

    #[test]
    fn answers_match_scene_counts() {
        let scene = generate_scene(5, &SceneConfig::default()).unwrap();
        for t in 0..20 {
            let task = generate_task(&scene, t, TaskKind::Counting).unwrap();
            let n = scene.objects.iter().filter(|o| o.class == task.object).count() as u32;
            assert_eq!(task.answer, Some(Answer::Count(n)));
        }
    }
}
