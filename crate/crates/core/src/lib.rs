pub mod controllers;
pub mod eval;
pub mod knowledge;
pub mod metapolicy;
pub mod pddl;
pub mod planner;
pub mod world;
