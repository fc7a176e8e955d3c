//! PDDL subset: parsing, printing, grounding and exact state-transition semantics.
//!
//! The accepted language is what the household domain needs: `:adl` with
//! `and`/`or`/`not`/`forall`/`exists`/`when`/`increase`, typed objects and two
//! numeric functions that only feed action costs.

mod ast;
mod ground;
mod parser;
mod printer;
pub mod sexpr;
mod state;

pub use ast::*;
pub use ground::{
    ground, CondEffect, FluentId, GroundAction, GroundError, GroundFormula, GroundTask,
};
pub use parser::{parse_domain, parse_problem};
pub use printer::{print_domain, print_formula, print_problem};
pub use sexpr::Span;
pub use state::{applicable, apply, apply_unchecked, holds, ApplyError, State};

use thiserror::Error;

/// The shipped household domain.
pub const DOMAIN_PDDL: &str = include_str!("../../assets/domain.pddl");

/// Parses [`DOMAIN_PDDL`]. Panics only if the shipped asset is corrupt.
pub fn household_domain() -> Domain {
    parse_domain(DOMAIN_PDDL).expect("shipped domain.pddl parses")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PddlError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: undeclared {kind} `{name}`")]
    Undeclared { span: Span, kind: &'static str, name: String },
    #[error("{span}: duplicate {kind} `{name}`")]
    Duplicate { span: Span, kind: &'static str, name: String },
    #[error("{span}: unsupported requirement `{flag}` (only :adl is accepted)")]
    UnsupportedRequirement { span: Span, flag: String },
    #[error("{span}: unsupported construct {construct}")]
    Unsupported { span: Span, construct: String },
    #[error("{span}: `{name}` expects {expected} argument(s), found {found}")]
    Arity { span: Span, name: String, expected: usize, found: usize },
    #[error("{span}: type mismatch: {detail}")]
    TypeMismatch { span: Span, detail: String },
    #[error("{span}: unbound variable `?{var}`")]
    UnboundVariable { span: Span, var: String },
    #[error("{span}: `when` may not appear inside another `when`")]
    NestedWhen { span: Span },
    #[error("problem is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
}

impl PddlError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        PddlError::Syntax { span, message: message.into() }
    }
}
