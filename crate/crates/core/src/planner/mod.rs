//! FF-style satisficing planner: relaxed-plan heuristic with helpful actions,
//! enforced hill-climbing, greedy best-first fallback and plan validation.

mod rpg;
mod search;
mod validate;

use std::fmt;
use std::time::Duration;

pub use rpg::{build_rpg, ff_heuristic, HeuristicResult, RelaxedPlanningGraph, RelaxedTask, UNREACHED};
pub use search::{enforced_hill_climb, greedy_best_first, plan, PLATEAU_LIMIT};
pub use validate::{validate, Validation, Violation};

use crate::pddl::GroundTask;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub ehc_enabled: bool,
    /// Maximum number of state expansions across all search phases.
    pub node_budget: usize,
    pub time_budget: Option<Duration>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { ehc_enabled: true, node_budget: 200_000, time_budget: None }
    }
}

/// Indices into [`GroundTask::actions`] plus the summed action cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub actions: Vec<usize>,
    pub cost: f64,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn labels(&self, task: &GroundTask) -> Vec<String> {
        self.actions.iter().map(|&a| task.actions[a].label()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Plan(Plan),
    ProvedImpossible,
    ResourceExhausted,
    /// Enforced hill-climbing gave up on a plateau; only returned by
    /// [`enforced_hill_climb`] on its own.
    Stalled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SearchPhase {
    #[default]
    Ehc,
    Gbfs,
}

#[derive(Debug, Clone, Default)]
pub struct PlanStats {
    pub expanded: usize,
    pub evaluations: usize,
    pub wall_time: Duration,
    /// Phase that produced the outcome.
    pub phase: SearchPhase,
}

// Wall time is excluded so that identical runs compare equal.
impl PartialEq for PlanStats {
    fn eq(&self, other: &Self) -> bool {
        self.expanded == other.expanded && self.evaluations == other.evaluations && self.phase == other.phase
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Plan(p) => write!(f, "plan ({} actions, cost {})", p.len(), p.cost),
            Outcome::ProvedImpossible => f.write_str("impossible"),
            Outcome::ResourceExhausted => f.write_str("resource budget exhausted"),
            Outcome::Stalled => f.write_str("hill-climbing stalled"),
        }
    }
}
