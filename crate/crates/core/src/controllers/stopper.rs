//! Rule-based stopper: ends the episode and answers from tracked knowledge.

use super::{ControllerId, ControllerResult, Env, Meter, Termination};
use crate::knowledge::{Containment, KnowledgeState};
use crate::world::{Answer, TaskKind, TaskSpec};

pub fn answer_from_knowledge(k: &KnowledgeState, task: &TaskSpec) -> Option<Answer> {
    let of_class = || k.entities.iter().filter(|e| e.class == task.object);
    match task.kind {
        TaskKind::Existence => Some(Answer::from_bool(of_class().next().is_some())),
        TaskKind::Counting => Some(Answer::Count(of_class().count() as u32)),
        TaskKind::Containment => {
            let r = task.receptacle?;
            Some(Answer::from_bool(of_class().any(|e| match e.containment {
                Containment::In(id) => k.receptacles.get(&id).is_some_and(|rec| rec.class == r),
                _ => false,
            })))
        }
        TaskKind::PutIn => None,
    }
}

pub fn stop_and_answer(env: &Env, k: &KnowledgeState, task: &TaskSpec) -> ControllerResult {
    let meter = Meter::start(env, k);
    let mut r = meter.finish(ControllerId::Stopper, env, k, Termination::Success);
    r.answer = answer_from_knowledge(k, task);
    r
}
