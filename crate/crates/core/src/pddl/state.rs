//! Ground states and the transition function.

use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::ground::{GroundAction, GroundFormula, GroundTask};

/// A set of true fluents plus the accumulated `totalCost`.
#[derive(Debug, Clone)]
pub struct State {
    pub facts: FixedBitSet,
    pub total_cost: f64,
}

impl State {
    pub fn holds_fluent(&self, f: usize) -> bool {
        self.facts.contains(f)
    }

    pub fn true_fluents(&self) -> impl Iterator<Item = usize> + '_ {
        self.facts.ones()
    }
}

// Identity of a state is its fact set; the cost is bookkeeping.
impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.facts.as_slice().hash(h);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplyError {
    #[error("precondition of {action} does not hold: {literal} is false")]
    PreconditionFailed { action: String, literal: String },
}

/// Evaluates a ground formula in `state`.
pub fn holds(formula: &GroundFormula, state: &State) -> bool {
    match formula {
        GroundFormula::True => true,
        GroundFormula::False => false,
        GroundFormula::Atom(f) => state.facts.contains(*f),
        GroundFormula::Not(g) => !holds(g, state),
        GroundFormula::And(gs) => gs.iter().all(|g| holds(g, state)),
        GroundFormula::Or(gs) => gs.iter().any(|g| holds(g, state)),
    }
}

pub fn applicable(action: &GroundAction, state: &State) -> bool {
    action.pre.iter().all(|&f| state.facts.contains(f))
}

/// Applies `action`: conditional effects are evaluated against the state
/// before the transition, then all deletes are applied, then all adds.
pub fn apply(task: &GroundTask, action: &GroundAction, state: &State) -> Result<State, ApplyError> {
    if let Some(&missing) = action.pre.iter().find(|&&f| !state.facts.contains(f)) {
        let literal = task.fluent_name(missing).to_string();
        return Err(ApplyError::PreconditionFailed { action: action.label(), literal });
    }
    Ok(apply_unchecked(action, state))
}

/// [`apply`] without the precondition check.
pub fn apply_unchecked(action: &GroundAction, state: &State) -> State {
    let mut next = state.clone();
    let fired: Vec<_> = action
        .conditional
        .iter()
        .filter(|c| c.condition.iter().all(|&f| state.facts.contains(f)))
        .collect();
    for &f in &action.del {
        next.facts.set(f, false);
    }
    for c in &fired {
        for &f in &c.del {
            next.facts.set(f, false);
        }
    }
    for &f in &action.add {
        next.facts.insert(f);
    }
    for c in &fired {
        for &f in &c.add {
            next.facts.insert(f);
        }
    }
    next.total_cost += action.cost;
    next
}
