//! Step-by-step plan simulation.

use std::fmt;

use crate::pddl::{apply_unchecked, GroundTask};

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `step` could not be applied because `fluent` was false.
    Precondition { step: usize, action: String, fluent: String },
    UnknownAction { step: usize, index: usize },
    GoalUnsatisfied { cost: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Precondition { step, action, fluent } => {
                write!(f, "step {step}: {action} requires {fluent}")
            }
            Violation::UnknownAction { step, index } => write!(f, "step {step}: no ground action #{index}"),
            Violation::GoalUnsatisfied { cost } => write!(f, "goal not satisfied after plan (cost {cost})"),
        }
    }
}

/// Simulates `actions` from the initial state and checks the goal.
pub fn validate(task: &GroundTask, actions: &[usize]) -> Result<Validation, Violation> {
    let mut state = task.init.clone();
    for (step, &i) in actions.iter().enumerate() {
        let Some(a) = task.actions.get(i) else {
            return Err(Violation::UnknownAction { step, index: i });
        };
        if let Some(&f) = a.pre.iter().find(|&&f| !state.facts.contains(f)) {
            return Err(Violation::Precondition { step, action: a.label(), fluent: task.fluent_name(f).to_string() });
        }
        state = apply_unchecked(a, &state);
    }
    let cost = state.total_cost - task.init.total_cost;
    if !crate::pddl::holds(&task.goal, &state) {
        return Err(Violation::GoalUnsatisfied { cost });
    }
    Ok(Validation { cost })
}
