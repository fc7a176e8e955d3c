use std::collections::HashSet;

use super::ast::*;
use super::sexpr::{self, SExpr, Span};
use super::PddlError;

type Result<T> = std::result::Result<T, PddlError>;

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| PddlError::syntax(e.span(), format!("expected {what}, found {}", e.describe())))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol()
        .ok_or_else(|| PddlError::syntax(e.span(), format!("expected {what}, found {}", e.describe())))
}

fn expect_keyword(e: &SExpr, kw: &str) -> Result<()> {
    match e.as_symbol() {
        Some(s) if s == kw => Ok(()),
        _ => Err(PddlError::syntax(e.span(), format!("expected `{kw}`, found {}", e.describe()))),
    }
}

fn var_name(s: &str) -> Option<&str> {
    s.strip_prefix('?').filter(|n| !n.is_empty())
}

/// Parses `a b - t c` style lists into (name, span, type) triples.
fn typed_list(items: &[SExpr]) -> Result<Vec<(String, Span, Option<String>)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Span)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = expect_symbol(&items[i], "a name")?;
        if sym == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(items[i].span(), "`-` must be followed by a type"))?;
            if ty_expr.head() == Some("either") {
                return Err(PddlError::Unsupported {
                    span: ty_expr.span(),
                    construct: "`either` types".into(),
                });
            }
            let ty = expect_symbol(ty_expr, "a type name")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(items[i].span(), "`-` with no names before it"));
            }
            out.extend(pending.drain(..).map(|(n, s)| (n, s, Some(ty.to_string()))));
            i += 2;
        } else {
            pending.push((sym.to_string(), items[i].span()));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(n, s)| (n, s, None)));
    Ok(out)
}

fn typed_vars(domain_types: &dyn Fn(&str) -> bool, items: &[SExpr]) -> Result<Vec<TypedVar>> {
    let mut seen = HashSet::new();
    typed_list(items)?
        .into_iter()
        .map(|(n, span, ty)| {
            let name = var_name(&n)
                .ok_or_else(|| PddlError::syntax(span, format!("expected a variable, found `{n}`")))?;
            if !seen.insert(name.to_string()) {
                return Err(PddlError::Duplicate { span, kind: "variable", name: name.into() });
            }
            if let Some(t) = &ty {
                if !domain_types(t) {
                    return Err(PddlError::Undeclared { span, kind: "type", name: t.clone() });
                }
            }
            Ok(TypedVar { name: name.to_string(), ty })
        })
        .collect()
}

fn check_requirements(items: &[SExpr]) -> Result<Vec<String>> {
    items
        .iter()
        .map(|r| {
            let flag = expect_symbol(r, "a requirement flag")?;
            if flag == ":adl" {
                Ok(flag.to_string())
            } else {
                Err(PddlError::UnsupportedRequirement { span: r.span(), flag: flag.into() })
            }
        })
        .collect()
}

/// Resolution context for formulas: declared names plus the variables in scope.
struct Scope<'a> {
    domain: &'a Domain,
    /// Problem objects usable as constants (empty inside the domain).
    objects: &'a [TypedObject],
    vars: Vec<TypedVar>,
}

impl<'a> Scope<'a> {
    fn term_type(&self, t: &Term, span: Span) -> Result<Option<String>> {
        match t {
            Term::Var(v) => self
                .vars
                .iter()
                .rev()
                .find(|tv| &tv.name == v)
                .map(|tv| tv.ty.clone())
                .ok_or_else(|| PddlError::UnboundVariable { span, var: v.clone() }),
            Term::Const(c) => self
                .objects
                .iter()
                .find(|o| &o.name == c)
                .map(|o| Some(o.ty.clone()))
                .ok_or_else(|| PddlError::Undeclared { span, kind: "object", name: c.clone() }),
        }
    }

    fn term(&self, e: &SExpr) -> Result<Term> {
        let s = expect_symbol(e, "a term")?;
        let t = match var_name(s) {
            Some(v) => Term::Var(v.to_string()),
            None => Term::Const(s.to_string()),
        };
        self.term_type(&t, e.span())?;
        Ok(t)
    }

    fn check_args(&self, name: &str, params: &[TypedVar], args: &[Term], spans: &[Span], span: Span) -> Result<()> {
        if params.len() != args.len() {
            return Err(PddlError::Arity { span, name: name.into(), expected: params.len(), found: args.len() });
        }
        for ((p, a), s) in params.iter().zip(args).zip(spans) {
            let (Some(want), Some(have)) = (&p.ty, self.term_type(a, *s)?) else { continue };
            if !self.domain.is_subtype(&have, want) {
                return Err(PddlError::TypeMismatch {
                    span: *s,
                    detail: format!("argument of `{name}` has type `{have}`, expected `{want}`"),
                });
            }
        }
        Ok(())
    }

    fn atom(&self, items: &[SExpr], span: Span) -> Result<Atom> {
        let pred = expect_symbol(&items[0], "a predicate name")?;
        let decl = self
            .domain
            .predicate(pred)
            .ok_or_else(|| PddlError::Undeclared { span: items[0].span(), kind: "predicate", name: pred.into() })?;
        let args = items[1..].iter().map(|e| self.term(e)).collect::<Result<Vec<_>>>()?;
        let spans: Vec<Span> = items[1..].iter().map(SExpr::span).collect();
        self.check_args(pred, &decl.params, &args, &spans, span)?;
        Ok(Atom { predicate: pred.to_string(), args })
    }

    fn quantified(&mut self, items: &[SExpr], span: Span, f: impl FnOnce(&mut Self, &SExpr) -> Result<()>) -> Result<Vec<TypedVar>> {
        if items.len() != 3 {
            return Err(PddlError::syntax(span, "quantifier expects a variable list and one body"));
        }
        let domain = self.domain;
        let vars = typed_vars(&|t| domain.has_type(t), expect_list(&items[1], "a variable list")?)?;
        let n = self.vars.len();
        self.vars.extend(vars.iter().cloned());
        let r = f(self, &items[2]);
        self.vars.truncate(n);
        r.map(|_| vars)
    }

    fn formula(&mut self, e: &SExpr) -> Result<Formula> {
        let span = e.span();
        let items = expect_list(e, "a formula")?;
        let Some(head) = items.first() else {
            return Err(PddlError::syntax(span, "empty formula `()`"));
        };
        let head = expect_symbol(head, "a formula head")?;
        Ok(match head {
            "and" | "or" => {
                let parts = items[1..].iter().map(|x| self.formula(x)).collect::<Result<Vec<_>>>()?;
                if head == "and" { Formula::And(parts) } else { Formula::Or(parts) }
            }
            "not" => {
                if items.len() != 2 {
                    return Err(PddlError::syntax(span, "`not` expects exactly one argument"));
                }
                Formula::Not(Box::new(self.formula(&items[1])?))
            }
            "forall" | "exists" => {
                let mut body = None;
                let vars = self.quantified(items, span, |s, b| {
                    body = Some(s.formula(b)?);
                    Ok(())
                })?;
                let body = Box::new(body.expect("set by closure"));
                if head == "forall" { Formula::Forall(vars, body) } else { Formula::Exists(vars, body) }
            }
            "imply" | "=" | "<" | ">" | "<=" | ">=" | "preference" => {
                return Err(PddlError::Unsupported { span, construct: format!("`{head}` in formulas") })
            }
            _ => Formula::Atom(self.atom(items, span)?),
        })
    }

    fn function_term(&self, e: &SExpr) -> Result<FunctionTerm> {
        let span = e.span();
        let items = expect_list(e, "a function term")?;
        let name = expect_symbol(
            items.first().ok_or_else(|| PddlError::syntax(span, "empty function term"))?,
            "a function name",
        )?;
        let decl = self
            .domain
            .function(name)
            .ok_or_else(|| PddlError::Undeclared { span, kind: "function", name: name.into() })?;
        let args = items[1..].iter().map(|x| self.term(x)).collect::<Result<Vec<_>>>()?;
        let spans: Vec<Span> = items[1..].iter().map(SExpr::span).collect();
        self.check_args(name, &decl.params, &args, &spans, span)?;
        Ok(FunctionTerm { name: name.to_string(), args })
    }

    fn num_expr(&self, e: &SExpr) -> Result<NumExpr> {
        match e {
            SExpr::Symbol(s, span) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(NumExpr::Number)
                .ok_or_else(|| PddlError::syntax(*span, format!("expected a number, found `{s}`"))),
            SExpr::List(..) => Ok(NumExpr::Function(self.function_term(e)?)),
        }
    }

    fn effect(&mut self, e: &SExpr, in_when: bool) -> Result<Effect> {
        let span = e.span();
        let items = expect_list(e, "an effect")?;
        let Some(head) = items.first() else {
            return Err(PddlError::syntax(span, "empty effect `()`"));
        };
        let head = expect_symbol(head, "an effect head")?;
        Ok(match head {
            "and" => Effect::And(items[1..].iter().map(|x| self.effect(x, in_when)).collect::<Result<_>>()?),
            "not" => {
                if items.len() != 2 {
                    return Err(PddlError::syntax(span, "`not` expects exactly one argument"));
                }
                let inner = expect_list(&items[1], "an atom")?;
                if inner.is_empty() {
                    return Err(PddlError::syntax(items[1].span(), "empty atom"));
                }
                Effect::Delete(self.atom(inner, items[1].span())?)
            }
            "forall" => {
                if in_when {
                    return Err(PddlError::Unsupported { span, construct: "`forall` inside `when`".into() });
                }
                let mut body = None;
                let vars = self.quantified(items, span, |s, b| {
                    body = Some(s.effect(b, false)?);
                    Ok(())
                })?;
                Effect::Forall(vars, Box::new(body.expect("set by closure")))
            }
            "when" => {
                if in_when {
                    return Err(PddlError::NestedWhen { span });
                }
                if items.len() != 3 {
                    return Err(PddlError::syntax(span, "`when` expects a condition and an effect"));
                }
                let cond = self.formula(&items[1])?;
                Effect::When(cond, Box::new(self.effect(&items[2], true)?))
            }
            "increase" => {
                if items.len() != 3 {
                    return Err(PddlError::syntax(span, "`increase` expects a function term and an amount"));
                }
                Effect::Increase(self.function_term(&items[1])?, self.num_expr(&items[2])?)
            }
            "decrease" | "assign" | "scale-up" | "scale-down" => {
                return Err(PddlError::Unsupported { span, construct: format!("numeric effect `{head}`") })
            }
            _ => Effect::Add(self.atom(items, span)?),
        })
    }
}

fn check_unique<'a>(names: impl Iterator<Item = (&'a str, Span)>, kind: &'static str) -> Result<()> {
    let mut seen = HashSet::new();
    for (n, span) in names {
        if !seen.insert(n) {
            return Err(PddlError::Duplicate { span, kind, name: n.to_string() });
        }
    }
    Ok(())
}

/// Parses a domain definition.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let root = sexpr::read(text)?;
    let items = expect_list(&root, "`(define ...)`")?;
    if items.is_empty() {
        return Err(PddlError::syntax(root.span(), "expected `(define ...)`"));
    }
    expect_keyword(&items[0], "define")?;
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.span(), "missing `(domain <name>)`"))?;
    let h = expect_list(header, "`(domain <name>)`")?;
    if h.len() != 2 {
        return Err(PddlError::syntax(header.span(), "expected `(domain <name>)`"));
    }
    expect_keyword(&h[0], "domain")?;
    let name = expect_symbol(&h[1], "a domain name")?.to_string();

    let mut domain = Domain {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
    };
    let mut type_spans = Vec::new();
    let mut pred_spans = Vec::new();
    let mut func_spans = Vec::new();
    let mut action_forms = Vec::new();

    for section in &items[2..] {
        let sec = expect_list(section, "a domain section")?;
        let key = sec.first().map(|k| expect_symbol(k, "a section keyword")).transpose()?;
        match key {
            Some(":requirements") => domain.requirements.extend(check_requirements(&sec[1..])?),
            Some(":types") => {
                for (n, span, parent) in typed_list(&sec[1..])? {
                    type_spans.push(span);
                    // `- object` is the implicit root.
                    let parent = parent.filter(|p| p != "object");
                    domain.types.push(TypeDecl { name: n, parent });
                }
            }
            Some(":predicates") | Some(":functions") => {
                let is_pred = key == Some(":predicates");
                for p in &sec[1..] {
                    let parts = expect_list(p, "a declaration")?;
                    let name = expect_symbol(
                        parts.first().ok_or_else(|| PddlError::syntax(p.span(), "empty declaration"))?,
                        "a name",
                    )?
                    .to_string();
                    // Types are validated once all sections are read.
                    let params = typed_vars(&|_| true, &parts[1..])?;
                    if is_pred {
                        pred_spans.push((p.span(), params.clone()));
                        domain.predicates.push(PredicateDecl { name, params });
                    } else {
                        func_spans.push((p.span(), params.clone()));
                        domain.functions.push(FunctionDecl { name, params });
                    }
                }
            }
            Some(":action") => action_forms.push(section),
            Some(other) => {
                return Err(PddlError::Unsupported { span: section.span(), construct: format!("section `{other}`") })
            }
            None => return Err(PddlError::syntax(section.span(), "empty section")),
        }
    }

    check_unique(domain.types.iter().map(|t| t.name.as_str()).zip(type_spans.iter().copied()), "type")?;
    for (t, span) in domain.types.iter().zip(&type_spans) {
        if let Some(p) = &t.parent {
            if !domain.has_type(p) {
                return Err(PddlError::Undeclared { span: *span, kind: "type", name: p.clone() });
            }
        }
    }
    for (span, params) in pred_spans.iter().chain(&func_spans) {
        for p in params {
            if let Some(t) = &p.ty {
                if !domain.has_type(t) {
                    return Err(PddlError::Undeclared { span: *span, kind: "type", name: t.clone() });
                }
            }
        }
    }
    check_unique(
        domain.predicates.iter().map(|p| p.name.as_str()).zip(pred_spans.iter().map(|s| s.0)),
        "predicate",
    )?;
    check_unique(
        domain.functions.iter().map(|p| p.name.as_str()).zip(func_spans.iter().map(|s| s.0)),
        "function",
    )?;

    let actions = action_forms
        .iter()
        .map(|form| parse_action(&domain, form))
        .collect::<Result<Vec<_>>>()?;
    check_unique(
        actions.iter().map(|a| a.name.as_str()).zip(action_forms.iter().map(|f| f.span())),
        "action",
    )?;
    domain.actions = actions;
    Ok(domain)
}

fn parse_action(domain: &Domain, form: &SExpr) -> Result<ActionSchema> {
    let items = expect_list(form, "an action")?;
    let name = expect_symbol(
        items.get(1).ok_or_else(|| PddlError::syntax(form.span(), "action without a name"))?,
        "an action name",
    )?
    .to_string();
    let mut params = None;
    let mut pre = None;
    let mut eff = None;
    let mut i = 2;
    while i < items.len() {
        let key = expect_symbol(&items[i], "`:parameters`, `:precondition` or `:effect`")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| PddlError::syntax(items[i].span(), format!("`{key}` without a value")))?;
        match key {
            ":parameters" => {
                params = Some(typed_vars(&|t| domain.has_type(t), expect_list(value, "a parameter list")?)?)
            }
            ":precondition" => pre = Some(value),
            ":effect" => eff = Some(value),
            other => {
                return Err(PddlError::Unsupported { span: items[i].span(), construct: format!("action key `{other}`") })
            }
        }
        i += 2;
    }
    let params = params.unwrap_or_default();
    let mut scope = Scope { domain, objects: &[], vars: params.clone() };
    let precondition = match pre {
        Some(p) => scope.formula(p)?,
        None => Formula::And(Vec::new()),
    };
    let effect = match eff {
        Some(e) => scope.effect(e, false)?,
        None => Effect::And(Vec::new()),
    };
    Ok(ActionSchema { name, params, precondition, effect })
}

/// Parses a problem against its domain.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem> {
    let root = sexpr::read(text)?;
    let items = expect_list(&root, "`(define ...)`")?;
    if items.is_empty() {
        return Err(PddlError::syntax(root.span(), "expected `(define ...)`"));
    }
    expect_keyword(&items[0], "define")?;
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.span(), "missing `(problem <name>)`"))?;
    let h = expect_list(header, "`(problem <name>)`")?;
    if h.len() != 2 {
        return Err(PddlError::syntax(header.span(), "expected `(problem <name>)`"));
    }
    expect_keyword(&h[0], "problem")?;
    let name = expect_symbol(&h[1], "a problem name")?.to_string();

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut object_spans = Vec::new();
    let mut init_form = None;
    let mut goal_form = None;
    let mut metric_form = None;

    for section in &items[2..] {
        let sec = expect_list(section, "a problem section")?;
        let key = sec.first().map(|k| expect_symbol(k, "a section keyword")).transpose()?;
        match key {
            Some(":domain") => {
                let d = sec.get(1).ok_or_else(|| PddlError::syntax(section.span(), "missing domain name"))?;
                domain_name = Some(expect_symbol(d, "a domain name")?.to_string());
            }
            Some(":requirements") => {
                check_requirements(&sec[1..])?;
            }
            Some(":objects") => {
                for (n, span, ty) in typed_list(&sec[1..])? {
                    let ty = ty.unwrap_or_else(|| "object".to_string());
                    if !domain.has_type(&ty) {
                        return Err(PddlError::Undeclared { span, kind: "type", name: ty });
                    }
                    object_spans.push(span);
                    objects.push(TypedObject { name: n, ty });
                }
            }
            Some(":init") => init_form = Some(sec),
            Some(":goal") => goal_form = Some(section),
            Some(":metric") => metric_form = Some(section),
            Some(other) => {
                return Err(PddlError::Unsupported { span: section.span(), construct: format!("section `{other}`") })
            }
            None => return Err(PddlError::syntax(section.span(), "empty section")),
        }
    }

    let domain_name = domain_name.ok_or_else(|| PddlError::syntax(root.span(), "missing `(:domain ...)`"))?;
    if domain_name != domain.name {
        return Err(PddlError::DomainMismatch { expected: domain.name.clone(), found: domain_name });
    }
    check_unique(objects.iter().map(|o| o.name.as_str()).zip(object_spans.iter().copied()), "object")?;

    let scope = Scope { domain, objects: &objects, vars: Vec::new() };
    let mut init = Vec::new();
    if let Some(sec) = init_form {
        for el in &sec[1..] {
            let parts = expect_list(el, "an init element")?;
            match parts.first().and_then(SExpr::as_symbol) {
                Some("=") => {
                    if parts.len() != 3 {
                        return Err(PddlError::syntax(el.span(), "expected `(= (f args) value)`"));
                    }
                    let ft = scope.function_term(&parts[1])?;
                    let value = match scope.num_expr(&parts[2])? {
                        NumExpr::Number(v) => v,
                        NumExpr::Function(_) => {
                            return Err(PddlError::syntax(parts[2].span(), "init values must be numbers"))
                        }
                    };
                    let args = ground_args(&ft.args, el.span())?;
                    init.push(InitElement::Assign { function: ft.name, args, value });
                }
                Some("not") => {
                    return Err(PddlError::Unsupported { span: el.span(), construct: "negative init literal".into() })
                }
                _ => {
                    if parts.is_empty() {
                        return Err(PddlError::syntax(el.span(), "empty init atom"));
                    }
                    let atom = scope.atom(parts, el.span())?;
                    let args = ground_args(&atom.args, el.span())?;
                    init.push(InitElement::Atom { predicate: atom.predicate, args });
                }
            }
        }
    }

    let goal = match goal_form {
        Some(g) => {
            let parts = expect_list(g, "a goal")?;
            if parts.len() != 2 {
                return Err(PddlError::syntax(g.span(), "`:goal` expects exactly one formula"));
            }
            let mut scope = Scope { domain, objects: &objects, vars: Vec::new() };
            scope.formula(&parts[1])?
        }
        None => return Err(PddlError::syntax(root.span(), "missing `(:goal ...)`")),
    };

    let metric = match metric_form {
        Some(m) => {
            let parts = expect_list(m, "a metric")?;
            if parts.len() != 3 {
                return Err(PddlError::syntax(m.span(), "expected `(:metric minimize <expr>)`"));
            }
            let dir = expect_symbol(&parts[1], "`minimize`")?;
            if dir != "minimize" {
                return Err(PddlError::Unsupported { span: parts[1].span(), construct: format!("metric `{dir}`") });
            }
            Some(Metric { function: scope.function_term(&parts[2])? })
        }
        None => None,
    };

    Ok(Problem { name, domain: domain.name.clone(), objects, init, goal, metric })
}

fn ground_args(args: &[Term], span: Span) -> Result<Vec<String>> {
    args.iter()
        .map(|t| match t {
            Term::Const(c) => Ok(c.clone()),
            Term::Var(v) => Err(PddlError::UnboundVariable { span, var: v.clone() }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::DOMAIN_PDDL;

    #[test]
    fn household_domain_counts() {
        let d = parse_domain(DOMAIN_PDDL).unwrap();
        assert_eq!(d.name, "qa_vsp_task");
        assert_eq!(d.actions.len(), 5);
        assert_eq!(d.predicates.len(), 13);
        assert_eq!(d.functions.len(), 2);
        assert_eq!(d.types.len(), 6);
        let names: Vec<_> = d.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["GotoLocation", "OpenObject", "CloseObject", "PickupObject", "PutObject"]);
        // `distance` keeps its untyped parameters.
        assert!(d.function("distance").unwrap().params.iter().all(|p| p.ty.is_none()));
    }

    #[test]
    fn minimal_domain() {
        let d = parse_domain("(define (domain d) (:requirements :adl))").unwrap();
        assert!(d.actions.is_empty());
        assert!(d.predicates.is_empty());
    }

    #[test]
    fn missing_final_paren() {
        let text = DOMAIN_PDDL.trim_end();
        let truncated = &text[..text.len() - 1];
        match parse_domain(truncated) {
            Err(PddlError::Syntax { message, .. }) => assert!(message.contains("unclosed form `(define ...)`")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn domain_errors() {
        let bad_req = "(define (domain d) (:requirements :strips))";
        assert!(matches!(parse_domain(bad_req), Err(PddlError::UnsupportedRequirement { .. })));

        let dup = "(define (domain d) (:predicates (p) (p)))";
        assert!(matches!(parse_domain(dup), Err(PddlError::Duplicate { kind: "predicate", .. })));

        let undeclared_type = "(define (domain d) (:types a) (:predicates (p ?x - b)))";
        assert!(matches!(parse_domain(undeclared_type), Err(PddlError::Undeclared { kind: "type", .. })));

        let undeclared_pred = "(define (domain d) (:types a)
            (:action x :parameters (?v - a) :precondition (q ?v) :effect (and)))";
        assert!(matches!(parse_domain(undeclared_pred), Err(PddlError::Undeclared { kind: "predicate", .. })));

        let unbound = "(define (domain d) (:types a) (:predicates (p ?x - a))
            (:action x :parameters () :precondition (p ?v) :effect (and)))";
        assert!(matches!(parse_domain(unbound), Err(PddlError::UnboundVariable { .. })));

        let nested = "(define (domain d) (:types a) (:predicates (p ?x - a))
            (:action x :parameters (?v - a) :precondition (and)
               :effect (when (p ?v) (when (p ?v) (p ?v)))))";
        assert!(matches!(parse_domain(nested), Err(PddlError::NestedWhen { .. })));

        let dup_action = "(define (domain d)
            (:action x :parameters () :effect (and))
            (:action x :parameters () :effect (and)))";
        assert!(matches!(parse_domain(dup_action), Err(PddlError::Duplicate { kind: "action", .. })));
    }

    fn problem(goal: &str, init: &str) -> String {
        format!(
            "(define (problem p) (:domain qa_vsp_task)
               (:objects a0 - agent l0 - location c1 - receptacle MugType - otype DrawerType - rtype)
               (:init {init})
               (:goal {goal})
               (:metric minimize (totalCost)))"
        )
    }

    #[test]
    fn existence_goal_structure() {
        let d = parse_domain(DOMAIN_PDDL).unwrap();
        let goal = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/goal_b.pddl")).unwrap();
        let inner = goal.trim().strip_prefix("(:goal").unwrap().trim().strip_suffix(')').unwrap();
        let p = parse_problem(&problem(inner, "(= (totalCost) 0)"), &d).unwrap();
        let Formula::Or(branches) = &p.goal else { panic!("top-level or") };
        assert_eq!(branches.len(), 2);
        assert!(matches!(&branches[0], Formula::Exists(vs, _) if vs[0].ty.as_deref() == Some("object")));
        let Formula::And(conj) = &branches[1] else { panic!("second branch is and") };
        assert_eq!(conj.len(), 2);
        assert!(conj.iter().all(|f| matches!(f, Formula::Forall(..))));
    }

    #[test]
    fn problem_errors() {
        let d = parse_domain(DOMAIN_PDDL).unwrap();
        assert!(parse_problem(&problem("(and)", ""), &d).is_ok());
        let e = parse_problem(&problem("(frobnicate c1)", ""), &d).unwrap_err();
        assert!(matches!(e, PddlError::Undeclared { kind: "predicate", ref name, .. } if name == "frobnicate"));
        let e = parse_problem(&problem("(opened c9)", ""), &d).unwrap_err();
        assert!(matches!(e, PddlError::Undeclared { kind: "object", .. }));
        let e = parse_problem(&problem("(opened l0)", ""), &d).unwrap_err();
        assert!(matches!(e, PddlError::TypeMismatch { .. }));
        let bad_obj = "(define (problem p) (:domain qa_vsp_task) (:objects x - sofa) (:goal (and)))";
        assert!(matches!(parse_problem(bad_obj, &d), Err(PddlError::Undeclared { kind: "type", .. })));
        let wrong_domain = "(define (problem p) (:domain other) (:goal (and)))";
        assert!(matches!(parse_problem(wrong_domain, &d), Err(PddlError::DomainMismatch { .. })));
    }
}
