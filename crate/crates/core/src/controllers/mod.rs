//! Direct controllers: navigator, explorer, scanner, planner loop and stopper.

mod env;
mod explore;
mod navigate;
mod oracle;
mod planner;
mod stopper;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use env::{digest, Env, EnvEvent};
pub use explore::{explore, novelty, scan};
pub use navigate::{face, navigate, NavTarget};
pub use oracle::shortest_path_estimate;
pub use planner::{household, initial_plan_length, run_planner_controller};
pub use stopper::{answer_from_knowledge, stop_and_answer};

use crate::planner::PlannerConfig;
use crate::world::Answer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerId {
    Planner,
    Explorer,
    Scanner,
    Stopper,
    Navigator,
}

impl ControllerId {
    pub fn name(self) -> &'static str {
        match self {
            ControllerId::Planner => "planner",
            ControllerId::Explorer => "explorer",
            ControllerId::Scanner => "scanner",
            ControllerId::Stopper => "stopper",
            ControllerId::Navigator => "navigator",
        }
    }
}

impl fmt::Display for ControllerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Termination {
    Success,
    Failure(String),
    BudgetExhausted,
}

impl Termination {
    pub fn is_success(&self) -> bool {
        matches!(self, Termination::Success)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerResult {
    pub controller: ControllerId,
    /// Primitive steps taken during the invocation.
    pub steps: u64,
    pub termination: Termination,
    pub answer: Option<Answer>,
    /// Cells that became known.
    pub new_cells: usize,
    /// Receptacles that became checked.
    pub newly_checked: usize,
    pub detector_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub planner_budget: u64,
    pub navigate_budget: u64,
    /// Explorer trade-off between novel cells and path cost.
    pub explore_lambda: f64,
    #[serde(skip, default = "default_planner")]
    pub planner: PlannerConfig,
}

fn default_planner() -> PlannerConfig {
    PlannerConfig { node_budget: 20_000, ..PlannerConfig::default() }
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig { planner_budget: 200, navigate_budget: 100, explore_lambda: 0.5, planner: default_planner() }
    }
}

/// Snapshot for filling in a [`ControllerResult`].
pub(crate) struct Meter {
    steps: u64,
    known: usize,
    checked: usize,
    frames: u64,
}

impl Meter {
    pub(crate) fn start(env: &Env, k: &crate::knowledge::KnowledgeState) -> Self {
        Meter { steps: env.steps(), known: k.map.known_count(), checked: k.checked_count(), frames: env.detector_calls() }
    }

    pub(crate) fn used(&self, env: &Env) -> u64 {
        env.steps() - self.steps
    }

    pub(crate) fn finish(
        &self,
        controller: ControllerId,
        env: &Env,
        k: &crate::knowledge::KnowledgeState,
        termination: Termination,
    ) -> ControllerResult {
        ControllerResult {
            controller,
            steps: env.steps() - self.steps,
            termination,
            answer: None,
            new_cells: k.map.known_count() - self.known,
            newly_checked: k.checked_count() - self.checked,
            detector_calls: env.detector_calls() - self.frames,
        }
    }
}
