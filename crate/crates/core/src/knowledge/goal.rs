//! Goal formulas for questions and relocation tasks.

use serde::{Deserialize, Serialize};

use super::KnowledgeError;
use crate::pddl::{Formula, Term, TypedVar};
use crate::world::{ObjectClass, ReceptacleClass, TaskKind, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalKind {
    /// Answer a question by finding the subject or checking everywhere it could be.
    Check,
    /// Relocate the subject into a receptacle of the target class.
    PutIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    pub kind: GoalKind,
    pub subject: ObjectClass,
    pub target: Option<ReceptacleClass>,
    /// Finding one instance of the subject satisfies the goal.
    pub early_exit: bool,
    pub formula: Formula,
}

fn var(v: &str) -> Term {
    Term::var(v)
}

fn konst(c: String) -> Term {
    Term::Const(c)
}

/// `(exists (?o - object) (objectType ?o CType))`
fn subject_found(c: ObjectClass) -> Formula {
    Formula::exists(
        vec![TypedVar::new("o", "object")],
        Formula::atom("objectType", vec![var("o"), konst(c.pddl_type())]),
    )
}

fn all_closed() -> Formula {
    Formula::forall(
        vec![TypedVar::new("re", "receptacle")],
        Formula::not(Formula::atom("opened", vec![var("re")])),
    )
}

/// Every receptacle whose class can contain `c` has been checked.
fn candidates_checked(c: ObjectClass) -> Formula {
    Formula::forall(
        vec![TypedVar::new("t", "rtype")],
        Formula::forall(
            vec![TypedVar::new("r", "receptacle")],
            Formula::Or(vec![
                Formula::not(Formula::And(vec![
                    Formula::atom("canContain", vec![var("t"), konst(c.pddl_type())]),
                    Formula::atom("receptacleType", vec![var("r"), var("t")]),
                ])),
                Formula::atom("checked", vec![var("r")]),
            ]),
        ),
    )
}

/// Search for `c`: every candidate receptacle checked and all closed again.
pub fn search_goal(c: ObjectClass) -> GoalSpec {
    GoalSpec {
        kind: GoalKind::Check,
        subject: c,
        target: None,
        early_exit: false,
        formula: Formula::And(vec![candidates_checked(c), all_closed()]),
    }
}

/// Existence: found, or all candidates checked (the household template).
pub fn existence_goal(c: ObjectClass) -> GoalSpec {
    GoalSpec {
        kind: GoalKind::Check,
        subject: c,
        target: None,
        early_exit: true,
        formula: Formula::Or(vec![subject_found(c), Formula::And(vec![candidates_checked(c), all_closed()])]),
    }
}

/// Containment of `c` in class `r`: a `c` believed inside some `r`, or every
/// `r` checked. Other receptacles are irrelevant.
pub fn containment_goal(c: ObjectClass, r: ReceptacleClass) -> GoalSpec {
    let found_inside = Formula::exists(
        vec![TypedVar::new("o", "object"), TypedVar::new("r", "receptacle")],
        Formula::And(vec![
            Formula::atom("objectType", vec![var("o"), konst(c.pddl_type())]),
            Formula::atom("receptacleType", vec![var("r"), konst(r.pddl_type())]),
            Formula::atom("inReceptacle", vec![var("o"), var("r")]),
        ]),
    );
    let all_r_checked = Formula::forall(
        vec![TypedVar::new("r", "receptacle")],
        Formula::Or(vec![
            Formula::not(Formula::atom("receptacleType", vec![var("r"), konst(r.pddl_type())])),
            Formula::atom("checked", vec![var("r")]),
        ]),
    );
    GoalSpec {
        kind: GoalKind::Check,
        subject: c,
        target: Some(r),
        early_exit: true,
        formula: Formula::Or(vec![found_inside, Formula::And(vec![all_r_checked, all_closed()])]),
    }
}

pub fn put_in_goal(c: ObjectClass, r: ReceptacleClass) -> GoalSpec {
    GoalSpec {
        kind: GoalKind::PutIn,
        subject: c,
        target: Some(r),
        early_exit: false,
        formula: Formula::exists(
            vec![TypedVar::new("o", "object")],
            Formula::exists(
                vec![TypedVar::new("r", "receptacle")],
                Formula::And(vec![
                    Formula::atom("objectType", vec![var("o"), konst(c.pddl_type())]),
                    Formula::atom("receptacleType", vec![var("r"), konst(r.pddl_type())]),
                    Formula::atom("inReceptacle", vec![var("o"), var("r")]),
                ]),
            ),
        ),
    }
}

/// Planner goal for a question. Counting has no early exit: one instance
/// does not answer "how many".
pub fn goal_for_question(q: &TaskSpec) -> Result<GoalSpec, KnowledgeError> {
    match q.kind {
        TaskKind::Existence => Ok(existence_goal(q.object)),
        TaskKind::Counting => Ok(search_goal(q.object)),
        TaskKind::Containment => {
            let r = q.receptacle.ok_or_else(|| KnowledgeError::WrongKind("containment question without receptacle".into()))?;
            Ok(containment_goal(q.object, r))
        }
        TaskKind::PutIn => Err(KnowledgeError::WrongKind("relocation task is not a question".into())),
    }
}

pub fn goal_for_vsp(t: &TaskSpec) -> Result<GoalSpec, KnowledgeError> {
    match (t.kind, t.receptacle) {
        (TaskKind::PutIn, Some(r)) => Ok(put_in_goal(t.object, r)),
        _ => Err(KnowledgeError::WrongKind(format!("{} task is not a relocation task", t.kind))),
    }
}
