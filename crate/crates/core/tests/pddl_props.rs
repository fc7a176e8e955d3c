mod common;

use std::collections::HashSet;

use common::*;
use hiprl::pddl::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Random well-typed domains

struct Gen {
    rng: ChaCha8Rng,
    types: Vec<String>,
    preds: Vec<PredicateDecl>,
}

impl Gen {
    fn ty(&mut self) -> String {
        self.types[self.rng.gen_range(0..self.types.len())].clone()
    }

    /// A term of type `ty` from the variables in scope, or `None`.
    fn term(&mut self, ty: &str, scope: &[TypedVar]) -> Option<Term> {
        let fits: Vec<&TypedVar> = scope.iter().filter(|v| v.ty.as_deref() == Some(ty)).collect();
        if fits.is_empty() {
            None
        } else {
            Some(Term::Var(fits[self.rng.gen_range(0..fits.len())].name.clone()))
        }
    }

    fn atom(&mut self, scope: &[TypedVar]) -> Option<Atom> {
        for _ in 0..8 {
            let p = self.preds[self.rng.gen_range(0..self.preds.len())].clone();
            let args: Option<Vec<Term>> =
                p.params.iter().map(|v| self.term(v.ty.as_deref().unwrap(), scope)).collect();
            if let Some(args) = args {
                return Some(Atom::new(p.name, args));
            }
        }
        None
    }

    fn formula(&mut self, scope: &mut Vec<TypedVar>, depth: u32) -> Formula {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..6) };
        match choice {
            1 | 2 => {
                let n = self.rng.gen_range(0..3);
                let parts = (0..n).map(|_| self.formula(scope, depth - 1)).collect();
                if choice == 1 { Formula::And(parts) } else { Formula::Or(parts) }
            }
            3 => Formula::not(self.formula(scope, depth - 1)),
            4 | 5 => {
                let v = TypedVar::new(format!("q{}", scope.len()), self.ty());
                scope.push(v.clone());
                let body = self.formula(scope, depth - 1);
                scope.pop();
                if choice == 4 { Formula::forall(vec![v], body) } else { Formula::exists(vec![v], body) }
            }
            _ => match self.atom(scope) {
                Some(a) => Formula::Atom(a),
                None => Formula::And(vec![]),
            },
        }
    }

    fn effect(&mut self, scope: &mut Vec<TypedVar>, depth: u32, in_when: bool) -> Effect {
        let choice = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..6) };
        match choice {
            2 => {
                let n = self.rng.gen_range(0..3);
                Effect::And((0..n).map(|_| self.effect(scope, depth - 1, in_when)).collect())
            }
            3 if !in_when => {
                let v = TypedVar::new(format!("e{}", scope.len()), self.ty());
                scope.push(v.clone());
                let body = self.effect(scope, depth - 1, in_when);
                scope.pop();
                Effect::Forall(vec![v], Box::new(body))
            }
            4 if !in_when => {
                let c = self.formula(scope, 2);
                Effect::When(c, Box::new(self.effect(scope, depth - 1, true)))
            }
            5 => Effect::Increase(
                FunctionTerm { name: "totalCost".into(), args: vec![] },
                NumExpr::Number(self.rng.gen_range(1..5) as f64),
            ),
            c => match self.atom(scope) {
                Some(a) if c == 0 => Effect::Add(a),
                Some(a) => Effect::Delete(a),
                None => Effect::And(vec![]),
            },
        }
    }
}

fn random_domain(seed: u64) -> Domain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = rng.gen_range(1..4);
    let mut types = Vec::new();
    let mut decls = Vec::new();
    for i in 0..nt {
        let parent = if i > 0 && rng.gen_bool(0.3) { Some(format!("t{}", rng.gen_range(0..i))) } else { None };
        types.push(format!("t{i}"));
        decls.push(TypeDecl { name: format!("t{i}"), parent });
    }
    let mut g = Gen { rng, types, preds: Vec::new() };
    let np = g.rng.gen_range(1..5);
    for i in 0..np {
        let arity = g.rng.gen_range(0..3);
        let params = (0..arity).map(|j| TypedVar::new(format!("x{j}"), g.ty())).collect();
        g.preds.push(PredicateDecl { name: format!("p{i}"), params });
    }
    let na = g.rng.gen_range(0..4);
    let mut actions = Vec::new();
    for i in 0..na {
        let arity = g.rng.gen_range(0..3);
        let mut scope: Vec<TypedVar> = (0..arity).map(|j| TypedVar::new(format!("v{j}"), g.ty())).collect();
        let precondition = g.formula(&mut scope, 3);
        let effect = g.effect(&mut scope, 3, false);
        actions.push(ActionSchema { name: format!("act{i}"), params: scope, precondition, effect });
    }
    Domain {
        name: format!("rand{seed}"),
        requirements: vec![":adl".into()],
        types: decls,
        predicates: g.preds,
        functions: vec![FunctionDecl { name: "totalCost".into(), params: vec![] }],
        actions,
    }
}

#[test]
fn hundred_random_domains_round_trip() {
    for seed in 0..100 {
        let d = random_domain(seed);
        let text = print_domain(&d);
        let parsed = parse_domain(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(parsed, d, "seed {seed}\n{text}");
        assert_eq!(print_domain(&parsed), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_is_identity(seed in any::<u64>()) {
        let d = random_domain(seed);
        prop_assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    }

    #[test]
    fn apply_keeps_complements_and_frame(seed in any::<u64>(), steps in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = InstanceSpec { locations: rng.gen_range(1..4), receptacles: rng.gen_range(0..4), objects: rng.gen_range(0..3) };
        let kind = [GoalKind::PutIn, GoalKind::Existence, GoalKind::Counting, GoalKind::Containment][rng.gen_range(0..4)];
        let t = random_task(&mut rng, &spec, kind);
        let mut s = t.init.clone();
        for (p, c) in t.complement_pairs() {
            prop_assert!(s.facts.contains(p) != s.facts.contains(c));
        }
        for _ in 0..steps {
            let app: Vec<usize> = (0..t.actions.len()).filter(|&i| applicable(&t.actions[i], &s)).collect();
            if app.is_empty() {
                break;
            }
            let a = &t.actions[app[rng.gen_range(0..app.len())]];
            let next = apply(&t, a, &s).unwrap();
            for (p, c) in t.complement_pairs() {
                prop_assert!(next.facts.contains(p) != next.facts.contains(c), "complement broken by {}", a.label());
            }
            let mut touched: HashSet<usize> = a.add.iter().chain(&a.del).copied().collect();
            for c in &a.conditional {
                touched.extend(c.add.iter().chain(&c.del));
            }
            for f in 0..t.num_fluents() {
                if !touched.contains(&f) {
                    prop_assert_eq!(s.facts.contains(f), next.facts.contains(f));
                }
            }
            prop_assert!(next.total_cost > s.total_cost);
            s = next;
        }
    }
}

// ---------------------------------------------------------------------------
// Lifted evaluator used as the grounding oracle

struct Lifted<'a> {
    domain: &'a Domain,
    problem: &'a Problem,
    atoms: HashSet<(String, Vec<String>)>,
}

impl Lifted<'_> {
    fn objects_of(&self, ty: &Option<String>) -> Vec<String> {
        self.problem
            .objects
            .iter()
            .filter(|o| ty.as_ref().is_none_or(|t| self.domain.is_subtype(&o.ty, t)))
            .map(|o| o.name.clone())
            .collect()
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(String, String)>) -> bool {
        match f {
            Formula::Atom(a) => {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => c.clone(),
                        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).unwrap().1.clone(),
                    })
                    .collect();
                self.atoms.contains(&(a.predicate.clone(), args))
            }
            Formula::And(fs) => fs.iter().all(|g| self.eval(g, env)),
            Formula::Or(fs) => fs.iter().any(|g| self.eval(g, env)),
            Formula::Not(g) => !self.eval(g, env),
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                assert_eq!(vs.len(), 1);
                let universal = matches!(f, Formula::Forall(..));
                let mut result = universal;
                for o in self.objects_of(&vs[0].ty) {
                    env.push((vs[0].name.clone(), o));
                    let v = self.eval(body, env);
                    env.pop();
                    if v != universal {
                        result = v;
                        break;
                    }
                }
                result
            }
        }
    }
}

fn bindings(l: &Lifted, params: &[TypedVar]) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    for p in params {
        let objs = l.objects_of(&p.ty);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                objs.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

#[test]
fn ground_applicability_matches_lifted_evaluation() {
    let d = household_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..40 {
        let spec = InstanceSpec { locations: rng.gen_range(1..4), receptacles: rng.gen_range(1..4), objects: rng.gen_range(0..3) };
        let text = random_problem(&mut rng, &spec, GoalKind::Existence);
        let p = parse_problem(&text, &d).unwrap();
        let t = ground(&d, &p).unwrap();
        let statics: Vec<(String, Vec<String>)> = p
            .init
            .iter()
            .filter_map(|e| match e {
                InitElement::Atom { predicate, args } => Some((predicate.clone(), args.clone())),
                _ => None,
            })
            .filter(|(pr, args)| {
                let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                t.fluent(pr, &refs).is_none()
            })
            .collect();
        let mut s = t.init.clone();
        for _ in 0..10 {
            let mut atoms: HashSet<(String, Vec<String>)> = statics.iter().cloned().collect();
            for f in s.facts.ones() {
                if let Some((pr, args)) = t.fluent_atom(f) {
                    atoms.insert((pr.to_string(), args.to_vec()));
                }
            }
            let lifted = Lifted { domain: &d, problem: &p, atoms };
            for schema in &d.actions {
                for args in bindings(&lifted, &schema.params) {
                    if schema.name == "GotoLocation" && args[1] == args[2] {
                        continue;
                    }
                    let mut env: Vec<(String, String)> =
                        schema.params.iter().map(|v| v.name.clone()).zip(args.iter().cloned()).collect();
                    let want = lifted.eval(&schema.precondition, &mut env);
                    let got = t.actions.iter().any(|a| a.name == schema.name && a.args == args && applicable(a, &s));
                    assert_eq!(got, want, "case {case}: {} {:?}", schema.name, args);
                }
            }
            let app: Vec<usize> = (0..t.actions.len()).filter(|&i| applicable(&t.actions[i], &s)).collect();
            if app.is_empty() {
                break;
            }
            s = apply(&t, &t.actions[app[rng.gen_range(0..app.len())]], &s).unwrap();
        }
    }
}

#[test]
fn existence_goal_holds_via_existential_branch() {
    let d = household_domain();
    let goal = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/goal_b.pddl")).unwrap();
    let text = format!(
        "(define (problem q) (:domain qa_vsp_task)
           (:objects a - agent l - location o1 - object MugType - otype c - receptacle)
           (:init (atLocation a l) (objectType o1 MugType) (receptacleAtLocation c l) (openable c) (opened c))
           {goal})"
    );
    let t = ground(&d, &parse_problem(&text, &d).unwrap()).unwrap();
    // An opened receptacle would falsify the other branch.
    assert!(holds(&t.goal, &t.init));
    assert_eq!(t.goal, GroundFormula::True);
}

#[test]
fn trivial_goals_and_negated_atoms() {
    let d = household_domain();
    let t = ground(&d, &parse_problem("(define (problem e) (:domain qa_vsp_task) (:init) (:goal (and)))", &d).unwrap()).unwrap();
    assert!(holds(&t.goal, &t.init));
    let text = "(define (problem q) (:domain qa_vsp_task)
        (:objects a - agent l - location c1 - receptacle)
        (:init (atLocation a l) (receptacleAtLocation c1 l) (openable c1) (opened c1))
        (:goal (not (opened c1))))";
    let t = ground(&d, &parse_problem(text, &d).unwrap()).unwrap();
    assert!(!holds(&t.goal, &t.init));
}

#[test]
fn goto_checks_unopenable_receptacle_and_open_twice_fails() {
    let d = household_domain();
    let text = "(define (problem q) (:domain qa_vsp_task)
        (:objects a - agent l1 l2 - location r - receptacle c - receptacle)
        (:init (atLocation a l1) (receptacleAtLocation r l2) (receptacleAtLocation c l1) (openable c) (opened c)
               (= (distance l1 l2) 2) (= (distance l2 l1) 2) (= (totalCost) 0))
        (:goal (checked r)))";
    let t = ground(&d, &parse_problem(text, &d).unwrap()).unwrap();
    let goto = &t.actions[t.action_by_label("(GotoLocation a l1 l2)").unwrap()];
    let s = apply(&t, goto, &t.init).unwrap();
    assert!(s.facts.contains(t.fluent("atLocation", &["a", "l2"]).unwrap()));
    assert!(!s.facts.contains(t.fluent("atLocation", &["a", "l1"]).unwrap()));
    assert!(s.facts.contains(t.fluent("checked", &["r"]).unwrap()));
    assert_eq!(s.total_cost, 2.0);
    let open = &t.actions[t.action_by_label("(OpenObject a l1 c)").unwrap()];
    let err = apply(&t, open, &t.init).unwrap_err();
    assert!(err.to_string().contains("not-opened"), "{err}");
}

#[test]
fn put_into_open_receptacle() {
    let d = household_domain();
    let text = "(define (problem q) (:domain qa_vsp_task)
        (:objects a - agent l - location m - object MugType - otype c - receptacle)
        (:init (atLocation a l) (receptacleAtLocation c l) (openable c) (opened c)
               (holds a m) (holdsAny a) (objectType m MugType) (= (totalCost) 3))
        (:goal (inReceptacle m c)))";
    let t = ground(&d, &parse_problem(text, &d).unwrap()).unwrap();
    let put = &t.actions[t.action_by_label("(PutObject a l MugType m c)").unwrap()];
    let s = apply(&t, put, &t.init).unwrap();
    let f = |p: &str, a: &[&str]| s.facts.contains(t.fluent(p, a).unwrap());
    assert!(f("inReceptacle", &["m", "c"]) && f("full", &["c"]));
    assert!(!f("holds", &["a", "m"]) && !f("holdsAny", &["a"]));
    assert_eq!(s.total_cost, 4.0);
}
