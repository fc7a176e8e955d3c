//! Explorer and scanner.

use super::navigate::{face, navigate, NavTarget};
use super::{ControllerConfig, ControllerId, ControllerResult, Env, Meter, Termination};
use crate::knowledge::{CellState, KnowledgeState, UNREACHABLE};
use crate::world::{view_cone, Cell, Heading, Pitch, Pose, PrimitiveAction};

/// Unknown cells that would come into view from `pose`, treating only
/// known-blocked cells as opaque.
pub fn novelty(k: &KnowledgeState, pose: Pose) -> usize {
    let m = &k.map;
    view_cone(pose, Pitch::Level.range(), |c| m.in_bounds(c), |c| m.get(c) == CellState::Blocked)
        .into_iter()
        .filter(|&c| m.get(c) == CellState::Unknown)
        .count()
}

/// Goes to the known-free pose maximising `novel − λ·distance` and looks.
pub fn explore(env: &mut Env, k: &mut KnowledgeState, config: &ControllerConfig) -> ControllerResult {
    let meter = Meter::start(env, k);
    let here = k.pose.cell;
    let costs = k.map.costs_from(here);
    let mut best: Option<(f64, u32, Cell, Heading, usize)> = None;
    let free: Vec<Cell> = k.map.known_cells().filter(|&(_, s)| s == CellState::Free).map(|(c, _)| c).collect();
    for c in free {
        let d = k.map.cost_at(&costs, c);
        if d == UNREACHABLE {
            continue;
        }
        for h in Heading::ALL {
            let novel = novelty(k, Pose { cell: c, heading: h });
            let score = novel as f64 - config.explore_lambda * d as f64;
            let better = match best {
                None => true,
                Some((s, bd, _, _, _)) => score > s || (score == s && d < bd),
            };
            if better {
                best = Some((score, d, c, h, novel));
            }
        }
    }
    let max_novel = best.map_or(0, |b| b.4);
    let termination = match best {
        Some((_, _, cell, heading, novel)) if novel > 0 => {
            let nav = navigate(env, k, NavTarget::Cell(cell), config.navigate_budget, false);
            if nav.termination.is_success() {
                face(env, k, heading);
            }
            env.look(k, Pitch::Level);
            nav.termination
        }
        _ => {
            debug_assert_eq!(max_novel, 0);
            Termination::Failure("exhausted".into())
        }
    };
    meter.finish(ControllerId::Explorer, env, k, termination)
}

/// Three full turns, one per pitch band, running the detector every 90°.
pub fn scan(env: &mut Env, k: &mut KnowledgeState) -> ControllerResult {
    let meter = Meter::start(env, k);
    for pitch in Pitch::ALL {
        for _ in 0..4 {
            env.act(k, PrimitiveAction::RotateRight);
            env.look(k, pitch);
        }
    }
    meter.finish(ControllerId::Scanner, env, k, Termination::Success)
}
