//! The plan / act / observe / replan loop.

use std::sync::OnceLock;

use super::navigate::{face, navigate, NavTarget};
use super::{ControllerConfig, ControllerId, ControllerResult, Env, Meter, Termination};
use crate::knowledge::{search_goal, to_pddl_problem, GoalKind, GoalSpec, Interaction, KnowledgeState, PddlProblem};
use crate::pddl::{ground, household_domain, Domain, GroundAction};
use crate::planner::{plan, Outcome, PlannerConfig};
use crate::world::{Cell, EntityId, Heading, Pitch, PrimitiveAction};

/// The parsed household domain, shared by all episodes.
pub fn household() -> &'static Domain {
    static DOMAIN: OnceLock<Domain> = OnceLock::new();
    DOMAIN.get_or_init(household_domain)
}

/// Repeatedly compiles the knowledge into a problem, plans, and executes the
/// first action of the plan, until the goal is believed reached, the planner
/// proves it unreachable, or the step budget runs out.
///
/// A relocation goal whose subject has not been located yet is pursued by
/// first searching every candidate receptacle; a completed search without a
/// sighting is a failure.
pub fn run_planner_controller(
    env: &mut Env,
    k: &mut KnowledgeState,
    goal: &GoalSpec,
    config: &ControllerConfig,
) -> ControllerResult {
    let meter = Meter::start(env, k);
    let termination = loop {
        let used = meter.used(env);
        if used >= config.planner_budget {
            break Termination::BudgetExhausted;
        }
        let (active, searching) = active_goal(k, goal);
        let pp = to_pddl_problem(k, &active);
        let task = match ground(household(), &pp.problem) {
            Ok(t) => t,
            Err(e) => break Termination::Failure(format!("grounding failed: {e}")),
        };
        let p = match plan(&task, &config.planner).outcome {
            Outcome::Plan(p) => p,
            Outcome::ProvedImpossible | Outcome::Stalled => break Termination::Failure("impossible".into()),
            Outcome::ResourceExhausted => break Termination::Failure("planner budget exhausted".into()),
        };
        if p.is_empty() {
            break if searching { Termination::Failure("subject not found".into()) } else { Termination::Success };
        }
        let remaining = config.planner_budget - used;
        execute(env, k, &pp, &task.actions[p.actions[0]], config.navigate_budget.min(remaining));
    };
    meter.finish(ControllerId::Planner, env, k, termination)
}

/// The goal the planner loop pursues next: a relocation whose subject is not
/// located yet becomes a search. The flag tells which.
fn active_goal(k: &KnowledgeState, goal: &GoalSpec) -> (GoalSpec, bool) {
    let searching = goal.kind == GoalKind::PutIn && k.located(goal.subject).next().is_none();
    (if searching { search_goal(goal.subject) } else { goal.clone() }, searching)
}

/// Length of a plan for `goal` itself on the current knowledge, or `None` if
/// none is found. A relocation whose subject is not located has none.
pub fn initial_plan_length(k: &KnowledgeState, goal: &GoalSpec, config: &PlannerConfig) -> Option<usize> {
    let task = ground(household(), &to_pddl_problem(k, goal).problem).ok()?;
    match plan(&task, config).outcome {
        Outcome::Plan(p) => Some(p.actions.len()),
        _ => None,
    }
}

fn face_cell(env: &mut Env, k: &mut KnowledgeState, target: Cell, budget: u64) -> bool {
    if !k.pose.cell.is_adjacent(target) {
        let nav = navigate(env, k, NavTarget::Adjacent(target), budget, false);
        if !nav.termination.is_success() {
            return false;
        }
    }
    let h = Heading::towards(k.pose.cell, target).expect("adjacent");
    face(env, k, h);
    true
}

fn execute(env: &mut Env, k: &mut KnowledgeState, pp: &PddlProblem, action: &GroundAction, nav_budget: u64) {
    let arg = |i: usize| action.args[i].as_str();
    let receptacle = |name: &str| pp.receptacles[name];
    match action.name.as_str() {
        "GotoLocation" => {
            let cell = pp.locations[arg(2)];
            let nav = navigate(env, k, NavTarget::Cell(cell), nav_budget, false);
            if nav.termination.is_success() {
                // Look into every reachable, unchecked receptacle from here.
                let here = k.pose.cell;
                let pending: Vec<Cell> = k
                    .receptacles
                    .values()
                    .filter(|r| r.accessible() && !r.checked && r.cell.is_adjacent(here))
                    .map(|r| r.cell)
                    .collect();
                for c in &pending {
                    face(env, k, Heading::towards(here, *c).expect("adjacent"));
                    env.look(k, Pitch::Level);
                }
                k.mark_arrival(here);
                if !pending.is_empty() {
                    return;
                }
            }
        }
        "OpenObject" | "CloseObject" => {
            let r = receptacle(arg(2));
            if face_cell(env, k, k.receptacles[&r].cell, nav_budget) {
                if action.name == "OpenObject" {
                    env.interact(k, PrimitiveAction::Open(r), Interaction::Open(r));
                } else {
                    env.interact(k, PrimitiveAction::Close(r), Interaction::Close(r));
                }
            }
        }
        "PickupObject" => {
            let e = pp.objects[arg(2)];
            let r = receptacle(arg(3));
            if face_cell(env, k, k.receptacles[&r].cell, nav_budget) {
                let grasped = match k.entity(e).and_then(|t| t.source) {
                    Some(EntityId::Object(o)) => env.interact(k, PrimitiveAction::Pickup(o), Interaction::Pickup(e)),
                    _ => false,
                };
                if !grasped {
                    k.forget(e);
                }
            }
        }
        "PutObject" => {
            let r = receptacle(arg(4));
            if face_cell(env, k, k.receptacles[&r].cell, nav_budget) {
                env.interact(k, PrimitiveAction::Put(r), Interaction::Put(r));
            }
        }
        other => unreachable!("household domain has no action {other}"),
    }
    env.look(k, Pitch::Level);
}
