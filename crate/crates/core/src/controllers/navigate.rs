//! Shortest-path navigation on the learned map with replanning on collisions.

use super::{ControllerId, ControllerResult, Env, Meter, Termination};
use crate::knowledge::{CellState, KnowledgeState, UNKNOWN_COST, UNREACHABLE};
use crate::world::{Cell, Heading, Pitch, PrimitiveAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavTarget {
    /// Stand on this cell.
    Cell(Cell),
    /// Stand on any cell next to this one.
    Adjacent(Cell),
}

impl NavTarget {
    fn reached(&self, c: Cell) -> bool {
        match *self {
            NavTarget::Cell(t) => c == t,
            NavTarget::Adjacent(t) => c.is_adjacent(t),
        }
    }

    fn cells(&self) -> Vec<Cell> {
        match *self {
            NavTarget::Cell(t) => vec![t],
            NavTarget::Adjacent(t) => t.neighbours().to_vec(),
        }
    }
}

/// Turns to `heading` with the fewest rotations.
pub fn face(env: &mut Env, k: &mut KnowledgeState, heading: Heading) {
    match k.pose.heading.right_turns_to(heading) {
        1 => {
            env.act(k, PrimitiveAction::RotateRight);
        }
        2 => {
            env.act(k, PrimitiveAction::RotateRight);
            env.act(k, PrimitiveAction::RotateRight);
        }
        3 => {
            env.act(k, PrimitiveAction::RotateLeft);
        }
        _ => {}
    }
}

fn enter_cost(k: &KnowledgeState, c: Cell) -> Option<u32> {
    match k.map.get(c) {
        CellState::Free => Some(1),
        CellState::Unknown => Some(UNKNOWN_COST),
        CellState::Blocked => None,
    }
}

/// Moves to `target`, replanning after every step on the current map.
/// Unknown cells are traversable at a higher cost; bumping into one marks it
/// blocked. The detector runs once on arrival when `look` is set.
pub fn navigate(env: &mut Env, k: &mut KnowledgeState, target: NavTarget, budget: u64, look: bool) -> ControllerResult {
    let meter = Meter::start(env, k);
    let termination = loop {
        let here = k.pose.cell;
        if target.reached(here) {
            if look {
                env.look(k, Pitch::Level);
            }
            break Termination::Success;
        }
        if meter.used(env) >= budget {
            break Termination::BudgetExhausted;
        }
        let to_go = k.map.costs_to(&target.cells());
        if k.map.cost_at(&to_go, here) == UNREACHABLE {
            break Termination::Failure("unreachable".into());
        }
        // Among neighbours on a shortest path prefer the fewest turns.
        let mut best: Option<(u32, u32, Heading)> = None;
        for h in Heading::ALL {
            let n = here.step(h);
            let Some(w) = enter_cost(k, n) else { continue };
            let rest = k.map.cost_at(&to_go, n);
            if rest == UNREACHABLE {
                continue;
            }
            let turns = match k.pose.heading.right_turns_to(h) {
                0 => 0,
                1 | 3 => 1,
                _ => 2,
            };
            let key = (w + rest, turns, h);
            if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                best = Some(key);
            }
        }
        let (_, _, h) = best.expect("a reachable non-target cell has a passable neighbour");
        face(env, k, h);
        env.act(k, PrimitiveAction::MoveAhead);
    };
    meter.finish(ControllerId::Navigator, env, k, termination)
}
