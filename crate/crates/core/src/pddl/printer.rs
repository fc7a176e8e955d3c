//! Canonical pretty-printer. `parse(print(x)) == x` for every parsed AST.

use std::fmt::Write;

use super::ast::*;

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
    }
}

fn atom(a: &Atom) -> String {
    let mut s = format!("({}", a.predicate);
    for t in &a.args {
        s.push(' ');
        s.push_str(&term(t));
    }
    s.push(')');
    s
}

fn vars(vs: &[TypedVar]) -> String {
    vs.iter()
        .map(|v| match &v.ty {
            Some(t) => format!("?{} - {t}", v.name),
            None => format!("?{}", v.name),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn function_term(f: &FunctionTerm) -> String {
    let mut s = format!("({}", f.name);
    for t in &f.args {
        s.push(' ');
        s.push_str(&term(t));
    }
    s.push(')');
    s
}

fn num(n: &NumExpr) -> String {
    match n {
        NumExpr::Number(v) => format!("{v}"),
        NumExpr::Function(f) => function_term(f),
    }
}

fn pad(depth: usize) -> String {
    "  ".repeat(depth)
}

fn write_formula(out: &mut String, f: &Formula, depth: usize) {
    let p = pad(depth);
    match f {
        Formula::Atom(a) => {
            let _ = writeln!(out, "{p}{}", atom(a));
        }
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => {
                let _ = writeln!(out, "{p}(not {})", atom(a));
            }
            other => {
                let _ = writeln!(out, "{p}(not");
                write_formula(out, other, depth + 1);
                let _ = writeln!(out, "{p})");
            }
        },
        Formula::And(fs) | Formula::Or(fs) => {
            let head = if matches!(f, Formula::And(_)) { "and" } else { "or" };
            if fs.is_empty() {
                let _ = writeln!(out, "{p}({head})");
                return;
            }
            let _ = writeln!(out, "{p}({head}");
            for g in fs {
                write_formula(out, g, depth + 1);
            }
            let _ = writeln!(out, "{p})");
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let head = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            let _ = writeln!(out, "{p}({head} ({})", vars(vs));
            write_formula(out, body, depth + 1);
            let _ = writeln!(out, "{p})");
        }
    }
}

fn write_effect(out: &mut String, e: &Effect, depth: usize) {
    let p = pad(depth);
    match e {
        Effect::Add(a) => {
            let _ = writeln!(out, "{p}{}", atom(a));
        }
        Effect::Delete(a) => {
            let _ = writeln!(out, "{p}(not {})", atom(a));
        }
        Effect::And(es) => {
            if es.is_empty() {
                let _ = writeln!(out, "{p}(and)");
                return;
            }
            let _ = writeln!(out, "{p}(and");
            for x in es {
                write_effect(out, x, depth + 1);
            }
            let _ = writeln!(out, "{p})");
        }
        Effect::Forall(vs, body) => {
            let _ = writeln!(out, "{p}(forall ({})", vars(vs));
            write_effect(out, body, depth + 1);
            let _ = writeln!(out, "{p})");
        }
        Effect::When(cond, body) => {
            let _ = writeln!(out, "{p}(when");
            write_formula(out, cond, depth + 1);
            write_effect(out, body, depth + 1);
            let _ = writeln!(out, "{p})");
        }
        Effect::Increase(f, amount) => {
            let _ = writeln!(out, "{p}(increase {} {})", function_term(f), num(amount));
        }
    }
}

/// Renders a single formula (no trailing newline).
pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f, 0);
    s.truncate(s.trim_end().len());
    s
}

pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        let _ = writeln!(out, "  (:types");
        for (i, t) in d.types.iter().enumerate() {
            match &t.parent {
                Some(parent) => {
                    let _ = writeln!(out, "    {} - {parent}", t.name);
                }
                // A bare name would otherwise inherit the next declared parent.
                None if d.types[i + 1..].iter().any(|u| u.parent.is_some()) => {
                    let _ = writeln!(out, "    {} - object", t.name);
                }
                None => {
                    let _ = writeln!(out, "    {}", t.name);
                }
            }
        }
        let _ = writeln!(out, "  )");
    }
    for (key, decls) in [
        (":predicates", d.predicates.iter().map(|p| (&p.name, &p.params)).collect::<Vec<_>>()),
        (":functions", d.functions.iter().map(|p| (&p.name, &p.params)).collect::<Vec<_>>()),
    ] {
        if decls.is_empty() {
            continue;
        }
        let _ = writeln!(out, "  ({key}");
        for (name, params) in decls {
            if params.is_empty() {
                let _ = writeln!(out, "    ({name})");
            } else {
                let _ = writeln!(out, "    ({name} {})", vars(params));
            }
        }
        let _ = writeln!(out, "  )");
    }
    for a in &d.actions {
        let _ = writeln!(out);
        let _ = writeln!(out, "  (:action {}", a.name);
        let _ = writeln!(out, "    :parameters ({})", vars(&a.params));
        let _ = writeln!(out, "    :precondition");
        write_formula(&mut out, &a.precondition, 3);
        let _ = writeln!(out, "    :effect");
        write_effect(&mut out, &a.effect, 3);
        let _ = writeln!(out, "  )");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    let _ = writeln!(out, "  (:objects");
    for o in &p.objects {
        let _ = writeln!(out, "    {} - {}", o.name, o.ty);
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:init");
    for el in &p.init {
        match el {
            InitElement::Atom { predicate, args } => {
                let _ = write!(out, "    ({predicate}");
                for a in args {
                    let _ = write!(out, " {a}");
                }
                let _ = writeln!(out, ")");
            }
            InitElement::Assign { function, args, value } => {
                let _ = write!(out, "    (= ({function}");
                for a in args {
                    let _ = write!(out, " {a}");
                }
                let _ = writeln!(out, ") {value})");
            }
        }
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:goal");
    write_formula(&mut out, &p.goal, 2);
    let _ = writeln!(out, "  )");
    if let Some(m) = &p.metric {
        let _ = writeln!(out, "  (:metric minimize {})", function_term(&m.function));
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem, DOMAIN_PDDL};

    #[test]
    fn household_domain_round_trips() {
        let d = parse_domain(DOMAIN_PDDL).unwrap();
        let printed = print_domain(&d);
        assert_eq!(parse_domain(&printed).unwrap(), d);
    }

    #[test]
    fn empty_domain_round_trips() {
        let d = parse_domain("(define (domain d))").unwrap();
        assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    }

    #[test]
    fn problem_round_trips_with_numbers() {
        let d = parse_domain(DOMAIN_PDDL).unwrap();
        let text = "(define (problem p) (:domain qa_vsp_task)
            (:objects a0 - agent l0 l1 - location)
            (:init (atLocation a0 l0) (= (distance l0 l1) 2.5) (= (totalCost) 0))
            (:goal (and (atLocation a0 l1) (not (atLocation a0 l0))))
            (:metric minimize (totalCost)))";
        let p = parse_problem(text, &d).unwrap();
        assert_eq!(parse_problem(&print_problem(&p), &d).unwrap(), p);
    }
}
