//! Lifted PDDL representation for the `:adl` subset used by the household domain.

use std::collections::BTreeSet;

/// A `?name - type` binding. `ty` is `None` for untyped parameters such as
/// those of the `distance` function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedVar {
    /// Variable name without the leading `?`.
    pub name: String,
    pub ty: Option<String>,
}

impl TypedVar {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedVar { name: name.into(), ty: Some(ty.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Forall(Vec<TypedVar>, Box<Formula>),
    Exists(Vec<TypedVar>, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: &str, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn forall(vars: Vec<TypedVar>, body: Formula) -> Self {
        Formula::Forall(vars, Box::new(body))
    }

    pub fn exists(vars: Vec<TypedVar>, body: Formula) -> Self {
        Formula::Exists(vars, Box::new(body))
    }

    /// Variables occurring free in the formula.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|v| v.name.clone()));
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Structural equality up to consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn go(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Formula::Atom(x), Formula::Atom(y)) => {
                    x.predicate == y.predicate
                        && x.args.len() == y.args.len()
                        && x.args.iter().zip(&y.args).all(|(s, t)| match (s, t) {
                            (Term::Const(c), Term::Const(d)) => c == d,
                            (Term::Var(v), Term::Var(w)) => {
                                match env.iter().rev().find(|(l, r)| l == v || r == w) {
                                    Some((l, r)) => l == v && r == w,
                                    None => v == w,
                                }
                            }
                            _ => false,
                        })
                }
                (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
                    xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, env))
                }
                (Formula::Not(x), Formula::Not(y)) => go(x, y, env),
                (Formula::Forall(vs, x), Formula::Forall(ws, y))
                | (Formula::Exists(vs, x), Formula::Exists(ws, y)) => {
                    if vs.len() != ws.len() || vs.iter().zip(ws).any(|(v, w)| v.ty != w.ty) {
                        return false;
                    }
                    let n = env.len();
                    env.extend(vs.iter().zip(ws).map(|(v, w)| (v.name.clone(), w.name.clone())));
                    let ok = go(x, y, env);
                    env.truncate(n);
                    ok
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

/// `(name arg*)` inside numeric expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTerm {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Number(f64),
    Function(FunctionTerm),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    And(Vec<Effect>),
    Add(Atom),
    Delete(Atom),
    Forall(Vec<TypedVar>, Box<Effect>),
    When(Formula, Box<Effect>),
    Increase(FunctionTerm, NumExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedVar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<TypedVar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedVar>,
    pub precondition: Formula,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<PredicateDecl>,
    pub functions: Vec<FunctionDecl>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == "object" || self.types.iter().any(|t| t.name == name)
    }

    /// Whether `sub` equals `sup` or (transitively) derives from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub.to_string());
        let mut guard = 0;
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            guard += 1;
            if guard > self.types.len() + 1 {
                return false;
            }
            cur = self.types.iter().find(|d| d.name == t).and_then(|d| d.parent.clone());
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedObject {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitElement {
    Atom { predicate: String, args: Vec<String> },
    Assign { function: String, args: Vec<String>, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub function: FunctionTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedObject>,
    pub init: Vec<InitElement>,
    pub goal: Formula,
    /// `(:metric minimize ...)`; only minimisation is supported.
    pub metric: Option<Metric>,
}

impl Problem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_equivalence_respects_binding() {
        let a = Formula::exists(
            vec![TypedVar::new("o", "object")],
            Formula::atom("objectType", vec![Term::var("o"), Term::constant("MugType")]),
        );
        let b = Formula::exists(
            vec![TypedVar::new("x", "object")],
            Formula::atom("objectType", vec![Term::var("x"), Term::constant("MugType")]),
        );
        let c = Formula::exists(
            vec![TypedVar::new("x", "object")],
            Formula::atom("objectType", vec![Term::var("o"), Term::constant("MugType")]),
        );
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
        assert_eq!(c.free_vars().into_iter().collect::<Vec<_>>(), vec!["o".to_string()]);
    }
}
