//! Grounding of lifted schemas over a finite object universe.
//!
//! Quantifiers are expanded, static predicates are evaluated away, negative
//! conditions are compiled into complement fluents (`not-p`) and disjunctive
//! preconditions are split into one ground action per disjunct.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::ast::*;
use super::state::State;

pub type FluentId = usize;

/// Upper bound on the number of disjuncts produced when normalising a formula.
const MAX_DNF: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundError {
    #[error("problem domain `{found}` does not match `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("init references undeclared object `{0}`")]
    UnknownObject(String),
    #[error("no value for `({function} {})` needed by {action}", args.join(" "))]
    MissingFunctionValue { function: String, args: Vec<String>, action: String },
    #[error("action `{0}` adds and deletes the same atom")]
    ConflictingEffects(String),
    #[error("action `{action}`: {detail}")]
    UnsupportedNumeric { action: String, detail: String },
    #[error("action `{0}` has a negative cost")]
    NegativeCost(String),
    #[error("formula too large to normalise ({0} disjuncts)")]
    TooComplex(usize),
}

/// A grounded formula over fluent ids. Static atoms have been folded into
/// `True`/`False`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundFormula {
    True,
    False,
    Atom(FluentId),
    Not(Box<GroundFormula>),
    And(Vec<GroundFormula>),
    Or(Vec<GroundFormula>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondEffect {
    pub condition: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    /// Sorted fluent ids that must hold (complement fluents encode negation).
    pub pre: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
    pub conditional: Vec<CondEffect>,
    pub cost: f64,
}

impl GroundAction {
    /// `(Name arg1 arg2 ...)`
    pub fn label(&self) -> String {
        let mut s = format!("({}", self.name);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

#[derive(Debug, Clone)]
pub struct GroundTask {
    fluent_names: Vec<String>,
    /// `(predicate, args)` of each positive fluent; `None` for complements.
    fluent_atoms: Vec<Option<(String, Vec<String>)>>,
    complement: Vec<Option<FluentId>>,
    atom_index: HashMap<(String, Vec<String>), FluentId>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: GroundFormula,
    /// Goal in disjunctive normal form; an empty list means unsatisfiable.
    pub goal_dnf: Vec<Vec<FluentId>>,
    /// Grounding remarks, e.g. quantifiers over empty types.
    pub notes: Vec<String>,
}

impl GroundTask {
    pub fn num_fluents(&self) -> usize {
        self.fluent_names.len()
    }

    pub fn fluent_name(&self, id: FluentId) -> &str {
        &self.fluent_names[id]
    }

    /// Fluent id of a positive ground atom, if it is a fluent of this task.
    pub fn fluent(&self, predicate: &str, args: &[&str]) -> Option<FluentId> {
        let key = (predicate.to_string(), args.iter().map(|s| s.to_string()).collect());
        self.atom_index.get(&key).copied()
    }

    /// Complement fluent (`not-p`) of a positive fluent, when one was introduced.
    pub fn complement_of(&self, id: FluentId) -> Option<FluentId> {
        self.complement[id]
    }

    /// `(predicate, args)` for positive fluents.
    pub fn fluent_atom(&self, id: FluentId) -> Option<(&str, &[String])> {
        self.fluent_atoms[id].as_ref().map(|(p, a)| (p.as_str(), a.as_slice()))
    }

    pub fn is_complement(&self, id: FluentId) -> bool {
        self.fluent_atoms[id].is_none()
    }

    /// Positive fluents paired with their complements.
    pub fn complement_pairs(&self) -> impl Iterator<Item = (FluentId, FluentId)> + '_ {
        self.complement.iter().enumerate().filter_map(|(p, c)| c.map(|c| (p, c)))
    }

    pub fn goal_reached(&self, state: &State) -> bool {
        self.goal_dnf.iter().any(|conj| conj.iter().all(|&f| state.facts.contains(f)))
    }

    pub fn action_by_label(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.label() == label)
    }

    /// Human-readable listing, one ground action per line.
    pub fn dump(&self) -> String {
        let names = |ids: &[FluentId]| ids.iter().map(|&f| self.fluent_names[f].clone()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        for a in &self.actions {
            let _ = write!(out, "{} cost={} pre=[{}] add=[{}] del=[{}]", a.label(), a.cost, names(&a.pre), names(&a.add), names(&a.del));
            for c in &a.conditional {
                let _ = write!(out, " when([{}] add=[{}] del=[{}])", names(&c.condition), names(&c.add), names(&c.del));
            }
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Compiled lifted representation

type ObjId = u32;
type PredId = u32;
type AtomKey = (PredId, Vec<ObjId>);

#[derive(Debug, Clone, Copy)]
enum LTerm {
    Slot(usize),
    Obj(ObjId),
}

#[derive(Debug, Clone)]
enum LFormula {
    Atom { pred: PredId, args: Vec<LTerm> },
    And(Vec<LFormula>),
    Or(Vec<LFormula>),
    Not(Box<LFormula>),
    Forall(Vec<(usize, Option<String>)>, Box<LFormula>),
    Exists(Vec<(usize, Option<String>)>, Box<LFormula>),
}

#[derive(Debug, Clone)]
enum LEffect {
    And(Vec<LEffect>),
    Add(PredId, Vec<LTerm>),
    Del(PredId, Vec<LTerm>),
    Forall(Vec<(usize, Option<String>)>, Box<LEffect>),
    When(LFormula, Box<LEffect>),
    Increase(String, NumExpr),
}

/// Symbolic NNF over fluent atoms.
#[derive(Debug, Clone, PartialEq)]
enum Nnf {
    True,
    False,
    Lit(AtomKey, bool),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn and(parts: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().expect("one element"),
        _ => Nnf::And(out),
    }
}

fn or(parts: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().expect("one element"),
        _ => Nnf::Or(out),
    }
}

type Literal = (AtomKey, bool);

fn dnf(f: &Nnf) -> Result<Vec<Vec<Literal>>, GroundError> {
    Ok(match f {
        Nnf::True => vec![vec![]],
        Nnf::False => vec![],
        Nnf::Lit(a, pos) => vec![vec![(a.clone(), *pos)]],
        Nnf::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p)?);
                if out.len() > MAX_DNF {
                    return Err(GroundError::TooComplex(out.len()));
                }
            }
            out
        }
        Nnf::And(parts) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for p in parts {
                let d = dnf(p)?;
                if acc.len() * d.len() > MAX_DNF {
                    return Err(GroundError::TooComplex(acc.len() * d.len()));
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
    .into_iter()
    .filter_map(|mut conj| {
        conj.sort();
        conj.dedup();
        // Drop contradictory conjunctions.
        let contradictory = conj.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1);
        (!contradictory).then_some(conj)
    })
    .collect())
}

struct Grounder<'a> {
    domain: &'a Domain,
    objects: Vec<&'a TypedObject>,
    object_ids: HashMap<&'a str, ObjId>,
    pred_ids: HashMap<&'a str, PredId>,
    is_fluent_pred: Vec<bool>,
    static_facts: HashSet<AtomKey>,
    numeric: HashMap<(String, Vec<String>), f64>,
    universe_cache: HashMap<Option<String>, Vec<ObjId>>,
    notes: BTreeSet<String>,
    degenerate: usize,
}

impl<'a> Grounder<'a> {
    fn universe(&mut self, ty: &Option<String>) -> Vec<ObjId> {
        if let Some(u) = self.universe_cache.get(ty) {
            return u.clone();
        }
        let u: Vec<ObjId> = self
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| match ty {
                Some(t) => self.domain.is_subtype(&o.ty, t),
                None => true,
            })
            .map(|(i, _)| i as ObjId)
            .collect();
        self.universe_cache.insert(ty.clone(), u.clone());
        u
    }

    fn compile_term(&self, t: &Term, slots: &[(String, usize)]) -> LTerm {
        match t {
            Term::Var(v) => LTerm::Slot(slots.iter().rev().find(|(n, _)| n == v).expect("parser checked binding").1),
            Term::Const(c) => LTerm::Obj(*self.object_ids.get(c.as_str()).expect("parser checked constant")),
        }
    }

    fn bind(&self, vars: &[TypedVar], slots: &mut Vec<(String, usize)>, next: &mut usize) -> Vec<(usize, Option<String>)> {
        vars.iter()
            .map(|v| {
                let s = *next;
                *next += 1;
                slots.push((v.name.clone(), s));
                (s, v.ty.clone())
            })
            .collect()
    }

    fn compile_formula(&self, f: &Formula, slots: &mut Vec<(String, usize)>, next: &mut usize) -> LFormula {
        match f {
            Formula::Atom(a) => LFormula::Atom {
                pred: self.pred_ids[a.predicate.as_str()],
                args: a.args.iter().map(|t| self.compile_term(t, slots)).collect(),
            },
            Formula::And(fs) => LFormula::And(fs.iter().map(|g| self.compile_formula(g, slots, next)).collect()),
            Formula::Or(fs) => LFormula::Or(fs.iter().map(|g| self.compile_formula(g, slots, next)).collect()),
            Formula::Not(g) => LFormula::Not(Box::new(self.compile_formula(g, slots, next))),
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                let n = slots.len();
                let bound = self.bind(vs, slots, next);
                let b = Box::new(self.compile_formula(body, slots, next));
                slots.truncate(n);
                if matches!(f, Formula::Forall(..)) { LFormula::Forall(bound, b) } else { LFormula::Exists(bound, b) }
            }
        }
    }

    fn compile_effect(&self, e: &Effect, slots: &mut Vec<(String, usize)>, next: &mut usize) -> LEffect {
        match e {
            Effect::And(es) => LEffect::And(es.iter().map(|x| self.compile_effect(x, slots, next)).collect()),
            Effect::Add(a) => LEffect::Add(
                self.pred_ids[a.predicate.as_str()],
                a.args.iter().map(|t| self.compile_term(t, slots)).collect(),
            ),
            Effect::Delete(a) => LEffect::Del(
                self.pred_ids[a.predicate.as_str()],
                a.args.iter().map(|t| self.compile_term(t, slots)).collect(),
            ),
            Effect::Forall(vs, body) => {
                let n = slots.len();
                let bound = self.bind(vs, slots, next);
                let b = Box::new(self.compile_effect(body, slots, next));
                slots.truncate(n);
                LEffect::Forall(bound, b)
            }
            Effect::When(c, body) => {
                LEffect::When(self.compile_formula(c, slots, next), Box::new(self.compile_effect(body, slots, next)))
            }
            Effect::Increase(ft, amount) => {
                let amount = match amount {
                    NumExpr::Function(g) => {
                        // Keep variables symbolic: encoded as `?slot` placeholders.
                        let args = g
                            .args
                            .iter()
                            .map(|t| match self.compile_term(t, slots) {
                                LTerm::Slot(s) => Term::Var(s.to_string()),
                                LTerm::Obj(o) => Term::Const(self.objects[o as usize].name.clone()),
                            })
                            .collect();
                        NumExpr::Function(FunctionTerm { name: g.name.clone(), args })
                    }
                    n => n.clone(),
                };
                let target = if ft.args.is_empty() { ft.name.clone() } else { format!("{}/{}", ft.name, ft.args.len()) };
                LEffect::Increase(target, amount)
            }
        }
    }

    fn resolve(&self, args: &[LTerm], binding: &[ObjId]) -> Vec<ObjId> {
        args.iter()
            .map(|t| match *t {
                LTerm::Slot(s) => binding[s],
                LTerm::Obj(o) => o,
            })
            .collect()
    }

    fn ground_formula(&mut self, f: &LFormula, binding: &mut Vec<ObjId>, positive: bool) -> Nnf {
        match f {
            LFormula::Atom { pred, args } => {
                let key = (*pred, self.resolve(args, binding));
                if self.is_fluent_pred[*pred as usize] {
                    Nnf::Lit(key, positive)
                } else if self.static_facts.contains(&key) == positive {
                    Nnf::True
                } else {
                    Nnf::False
                }
            }
            LFormula::And(fs) => {
                let parts = fs.iter().map(|g| self.ground_formula(g, binding, positive)).collect();
                if positive { and(parts) } else { or(parts) }
            }
            LFormula::Or(fs) => {
                let parts = fs.iter().map(|g| self.ground_formula(g, binding, positive)).collect();
                if positive { or(parts) } else { and(parts) }
            }
            LFormula::Not(g) => self.ground_formula(g, binding, !positive),
            LFormula::Forall(vars, body) | LFormula::Exists(vars, body) => {
                let universal = matches!(f, LFormula::Forall(..)) == positive;
                let mut parts = Vec::new();
                let domains: Vec<Vec<ObjId>> = vars.iter().map(|(_, t)| self.universe(t)).collect();
                if domains.iter().any(Vec::is_empty) {
                    let kind = if matches!(f, LFormula::Forall(..)) { "forall" } else { "exists" };
                    let types: Vec<_> = vars.iter().map(|(_, t)| t.clone().unwrap_or_else(|| "object".into())).collect();
                    self.notes.insert(format!("{kind} over empty type ({})", types.join(", ")));
                }
                for_each_binding(&domains, &mut |combo| {
                    for ((slot, _), &o) in vars.iter().zip(combo) {
                        if binding.len() <= *slot {
                            binding.resize(*slot + 1, 0);
                        }
                        binding[*slot] = o;
                    }
                    parts.push(self.ground_formula(body, binding, positive));
                });
                if universal { and(parts) } else { or(parts) }
            }
        }
    }
}

fn for_each_binding(domains: &[Vec<ObjId>], f: &mut dyn FnMut(&[ObjId])) {
    fn rec(domains: &[Vec<ObjId>], acc: &mut Vec<ObjId>, f: &mut dyn FnMut(&[ObjId])) {
        if acc.len() == domains.len() {
            f(acc);
            return;
        }
        for &o in &domains[acc.len()] {
            acc.push(o);
            rec(domains, acc, f);
            acc.pop();
        }
    }
    rec(domains, &mut Vec::new(), f);
}

/// Pre-resolution ground action.
struct RawAction {
    name: String,
    args: Vec<ObjId>,
    pre: Nnf,
    add: Vec<AtomKey>,
    del: Vec<AtomKey>,
    conditional: Vec<(Nnf, Vec<AtomKey>, Vec<AtomKey>)>,
    cost: f64,
}

#[derive(Default)]
struct EffectAcc {
    add: Vec<AtomKey>,
    del: Vec<AtomKey>,
    conditional: Vec<(Nnf, Vec<AtomKey>, Vec<AtomKey>)>,
    cost: f64,
    missing: Option<GroundError>,
}

/// Grounds `problem` against `domain`.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<GroundTask, GroundError> {
    if problem.domain != domain.name {
        return Err(GroundError::DomainMismatch { expected: domain.name.clone(), found: problem.domain.clone() });
    }
    let cost_function = problem.metric.as_ref().map(|m| m.function.name.clone()).unwrap_or_else(|| "totalCost".into());

    let mut fluent_preds = HashSet::new();
    fn effect_preds<'e>(e: &'e Effect, out: &mut HashSet<&'e str>) {
        match e {
            Effect::And(es) => es.iter().for_each(|x| effect_preds(x, out)),
            Effect::Add(a) | Effect::Delete(a) => {
                out.insert(a.predicate.as_str());
            }
            Effect::Forall(_, b) | Effect::When(_, b) => effect_preds(b, out),
            Effect::Increase(..) => {}
        }
    }
    for a in &domain.actions {
        effect_preds(&a.effect, &mut fluent_preds);
        check_schema_conflicts(a)?;
    }

    let objects: Vec<&TypedObject> = problem.objects.iter().collect();
    let object_ids: HashMap<&str, ObjId> = objects.iter().enumerate().map(|(i, o)| (o.name.as_str(), i as ObjId)).collect();
    let pred_ids: HashMap<&str, PredId> =
        domain.predicates.iter().enumerate().map(|(i, p)| (p.name.as_str(), i as PredId)).collect();
    let is_fluent_pred: Vec<bool> = domain.predicates.iter().map(|p| fluent_preds.contains(p.name.as_str())).collect();

    let mut static_facts = HashSet::new();
    let mut init_fluents = BTreeSet::new();
    let mut numeric = HashMap::new();
    for el in &problem.init {
        match el {
            InitElement::Atom { predicate, args } => {
                let pid = *pred_ids.get(predicate.as_str()).ok_or_else(|| GroundError::UnknownObject(predicate.clone()))?;
                let ids = args
                    .iter()
                    .map(|a| object_ids.get(a.as_str()).copied().ok_or_else(|| GroundError::UnknownObject(a.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                if is_fluent_pred[pid as usize] {
                    init_fluents.insert((pid, ids));
                } else {
                    static_facts.insert((pid, ids));
                }
            }
            InitElement::Assign { function, args, value } => {
                numeric.insert((function.clone(), args.clone()), *value);
            }
        }
    }

    let mut g = Grounder {
        domain,
        objects,
        object_ids,
        pred_ids,
        is_fluent_pred,
        static_facts,
        numeric,
        universe_cache: HashMap::new(),
        notes: BTreeSet::new(),
        degenerate: 0,
    };

    let mut raw = Vec::new();
    for schema in &domain.actions {
        ground_schema(&mut g, schema, &cost_function, &mut raw)?;
    }

    let mut slots = Vec::new();
    let mut next = 0;
    let goal_l = g.compile_formula(&problem.goal, &mut slots, &mut next);
    let mut binding = vec![0; next];
    let goal_nnf = g.ground_formula(&goal_l, &mut binding, true);

    // Fluent universe: initially true atoms plus everything some action can add.
    let mut reachable: BTreeSet<AtomKey> = init_fluents.clone();
    for a in &raw {
        reachable.extend(a.add.iter().cloned());
        for (_, add, _) in &a.conditional {
            reachable.extend(add.iter().cloned());
        }
    }
    let prune = |f: &Nnf| prune_unreachable(f, &reachable);

    // Resolve preconditions and conditions, collecting negative literals.
    let mut negated: BTreeSet<AtomKey> = BTreeSet::new();
    struct Resolved {
        name: String,
        args: Vec<ObjId>,
        pre: Vec<Vec<Literal>>,
        add: Vec<AtomKey>,
        del: Vec<AtomKey>,
        conditional: Vec<(Vec<Literal>, Vec<AtomKey>, Vec<AtomKey>)>,
        cost: f64,
    }
    let mut resolved = Vec::new();
    for a in raw {
        let pre = dnf(&prune(&a.pre))?;
        if pre.is_empty() {
            continue;
        }
        let mut conditional = Vec::new();
        for (c, add, del) in a.conditional {
            for conj in dnf(&prune(&c))? {
                conditional.push((conj, add.clone(), del.clone()));
            }
        }
        for conj in pre.iter().chain(conditional.iter().map(|c| &c.0)) {
            negated.extend(conj.iter().filter(|l| !l.1).map(|l| l.0.clone()));
        }
        resolved.push(Resolved { name: a.name, args: a.args, pre, add: a.add, del: a.del, conditional, cost: a.cost });
    }
    let goal_nnf = prune(&goal_nnf);
    let goal_terms = dnf(&goal_nnf)?;
    for conj in &goal_terms {
        negated.extend(conj.iter().filter(|l| !l.1).map(|l| l.0.clone()));
    }

    // Fluent numbering: positives (sorted by name) then complements.
    let atom_name = |k: &AtomKey| -> (String, Vec<String>) {
        (
            domain.predicates[k.0 as usize].name.clone(),
            k.1.iter().map(|&o| g.objects[o as usize].name.clone()).collect(),
        )
    };
    let mut positives: Vec<(String, Vec<String>, AtomKey)> = reachable
        .iter()
        .map(|k| {
            let (p, a) = atom_name(k);
            (p, a, k.clone())
        })
        .collect();
    positives.sort();
    let mut id_of: HashMap<AtomKey, FluentId> = HashMap::new();
    let mut fluent_names = Vec::new();
    let mut fluent_atoms = Vec::new();
    let mut atom_index = HashMap::new();
    for (p, args, k) in &positives {
        let id = fluent_names.len();
        id_of.insert(k.clone(), id);
        fluent_names.push(render_atom(p, args));
        fluent_atoms.push(Some((p.clone(), args.clone())));
        atom_index.insert((p.clone(), args.clone()), id);
    }
    let mut complement = vec![None; fluent_names.len()];
    for (p, args, k) in &positives {
        if negated.contains(k) {
            let id = fluent_names.len();
            complement[id_of[k]] = Some(id);
            fluent_names.push(render_atom(&format!("not-{p}"), args));
            fluent_atoms.push(None);
        }
    }
    complement.resize(fluent_names.len(), None);

    let lit_id = |l: &Literal| -> FluentId {
        let pos = id_of[&l.0];
        if l.1 {
            pos
        } else {
            complement[pos].expect("complement allocated for negated atoms")
        }
    };
    let effect_ids = |add: &[AtomKey], del: &[AtomKey]| -> (Vec<FluentId>, Vec<FluentId>) {
        let mut a = Vec::new();
        let mut d = Vec::new();
        for k in add {
            let id = id_of[k];
            a.push(id);
            if let Some(c) = complement[id] {
                d.push(c);
            }
        }
        for k in del {
            // Deleting an atom that can never hold changes nothing.
            let Some(&id) = id_of.get(k) else { continue };
            d.push(id);
            if let Some(c) = complement[id] {
                a.push(c);
            }
        }
        a.sort_unstable();
        a.dedup();
        d.sort_unstable();
        d.dedup();
        (a, d)
    };

    let mut actions = Vec::new();
    let mut degenerate = g.degenerate;
    for r in resolved {
        let (add, del) = effect_ids(&r.add, &r.del);
        if add.iter().any(|f| del.binary_search(f).is_ok()) {
            degenerate += 1;
            continue;
        }
        let conditional: Vec<CondEffect> = r
            .conditional
            .iter()
            .map(|(c, ca, cd)| {
                let (add, del) = effect_ids(ca, cd);
                let mut condition: Vec<FluentId> = c.iter().map(lit_id).collect();
                condition.sort_unstable();
                CondEffect { condition, add, del }
            })
            .filter(|c| !c.add.is_empty() || !c.del.is_empty())
            .collect();
        let args: Vec<String> = r.args.iter().map(|&o| g.objects[o as usize].name.clone()).collect();
        for conj in &r.pre {
            let mut pre: Vec<FluentId> = conj.iter().map(lit_id).collect();
            pre.sort_unstable();
            actions.push(GroundAction {
                name: r.name.clone(),
                args: args.clone(),
                pre,
                add: add.clone(),
                del: del.clone(),
                conditional: conditional.clone(),
                cost: r.cost,
            });
        }
    }
    if degenerate > 0 {
        g.notes.insert(format!("pruned {degenerate} binding(s) that add and delete the same atom"));
    }
    actions.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));

    let n = fluent_names.len();
    let mut facts = FixedBitSet::with_capacity(n);
    for k in &init_fluents {
        facts.insert(id_of[k]);
    }
    for (pos, c) in complement.iter().enumerate() {
        if let Some(c) = *c {
            if !facts.contains(pos) {
                facts.insert(c);
            }
        }
    }
    let init_cost = g.numeric.get(&(cost_function.clone(), Vec::new())).copied().unwrap_or(0.0);

    let goal = to_ground_formula(&goal_nnf, &id_of);
    let mut goal_dnf: Vec<Vec<FluentId>> = goal_terms
        .iter()
        .map(|conj| {
            let mut ids: Vec<FluentId> = conj.iter().map(lit_id).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    goal_dnf.dedup();

    Ok(GroundTask {
        fluent_names,
        fluent_atoms,
        complement,
        atom_index,
        actions,
        init: State { facts, total_cost: init_cost },
        goal,
        goal_dnf,
        notes: g.notes.into_iter().collect(),
    })
}

fn render_atom(pred: &str, args: &[String]) -> String {
    let mut s = format!("({pred}");
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

fn prune_unreachable(f: &Nnf, reachable: &BTreeSet<AtomKey>) -> Nnf {
    match f {
        Nnf::Lit(k, pos) if !reachable.contains(k) => {
            if *pos {
                Nnf::False
            } else {
                Nnf::True
            }
        }
        Nnf::And(parts) => and(parts.iter().map(|p| prune_unreachable(p, reachable)).collect()),
        Nnf::Or(parts) => or(parts.iter().map(|p| prune_unreachable(p, reachable)).collect()),
        other => other.clone(),
    }
}

fn to_ground_formula(f: &Nnf, id_of: &HashMap<AtomKey, FluentId>) -> GroundFormula {
    match f {
        Nnf::True => GroundFormula::True,
        Nnf::False => GroundFormula::False,
        Nnf::Lit(k, true) => GroundFormula::Atom(id_of[k]),
        Nnf::Lit(k, false) => GroundFormula::Not(Box::new(GroundFormula::Atom(id_of[k]))),
        Nnf::And(ps) => GroundFormula::And(ps.iter().map(|p| to_ground_formula(p, id_of)).collect()),
        Nnf::Or(ps) => GroundFormula::Or(ps.iter().map(|p| to_ground_formula(p, id_of)).collect()),
    }
}

/// A schema whose unconditional effects literally add and delete the same atom
/// is ill-formed regardless of binding.
fn check_schema_conflicts(a: &ActionSchema) -> Result<(), GroundError> {
    fn collect<'e>(e: &'e Effect, add: &mut Vec<&'e Atom>, del: &mut Vec<&'e Atom>) {
        match e {
            Effect::And(es) => es.iter().for_each(|x| collect(x, add, del)),
            Effect::Add(x) => add.push(x),
            Effect::Delete(x) => del.push(x),
            _ => {}
        }
    }
    let (mut add, mut del) = (Vec::new(), Vec::new());
    collect(&a.effect, &mut add, &mut del);
    if add.iter().any(|x| del.contains(x)) {
        return Err(GroundError::ConflictingEffects(a.name.clone()));
    }
    Ok(())
}

/// Static atoms of the top-level precondition conjunction: (negated?, pred, args).
fn static_conjuncts(f: &LFormula, fluent: &[bool], out: &mut Vec<(bool, PredId, Vec<LTerm>)>) {
    match f {
        LFormula::And(fs) => fs.iter().for_each(|g| static_conjuncts(g, fluent, out)),
        LFormula::Atom { pred, args } if !fluent[*pred as usize] => out.push((false, *pred, args.clone())),
        LFormula::Not(inner) => {
            if let LFormula::Atom { pred, args } = inner.as_ref() {
                if !fluent[*pred as usize] {
                    out.push((true, *pred, args.clone()));
                }
            }
        }
        _ => {}
    }
}

fn ground_schema(g: &mut Grounder, schema: &ActionSchema, cost_function: &str, out: &mut Vec<RawAction>) -> Result<(), GroundError> {
    let mut slots = Vec::new();
    let mut next = 0;
    let params = g.bind(&schema.params, &mut slots, &mut next);
    let pre = g.compile_formula(&schema.precondition, &mut slots, &mut next);
    let eff = g.compile_effect(&schema.effect, &mut slots, &mut next);
    let nparams = params.len();

    // Static conjuncts checked as soon as their last parameter is bound.
    let mut statics = Vec::new();
    static_conjuncts(&pre, &g.is_fluent_pred, &mut statics);
    let mut checks: Vec<Vec<(bool, PredId, Vec<LTerm>)>> = vec![Vec::new(); nparams];
    for (neg, pred, args) in statics {
        let mut last = None;
        let mut ok = true;
        for t in &args {
            if let LTerm::Slot(s) = t {
                if *s >= nparams {
                    ok = false;
                }
                last = Some(last.map_or(*s, |l: usize| l.max(*s)));
            }
        }
        if ok {
            if let Some(l) = last {
                checks[l].push((neg, pred, args));
            }
        }
    }

    let domains: Vec<Vec<ObjId>> = params.iter().map(|(_, t)| g.universe(t)).collect();
    let mut binding = vec![0 as ObjId; next.max(1)];
    let mut combos: Vec<Vec<ObjId>> = Vec::new();
    fn rec(
        g: &Grounder,
        depth: usize,
        domains: &[Vec<ObjId>],
        checks: &[Vec<(bool, PredId, Vec<LTerm>)>],
        binding: &mut Vec<ObjId>,
        out: &mut Vec<Vec<ObjId>>,
    ) {
        if depth == domains.len() {
            out.push(binding[..depth].to_vec());
            return;
        }
        'outer: for &o in &domains[depth] {
            binding[depth] = o;
            for (neg, pred, args) in &checks[depth] {
                let key = (*pred, g.resolve(args, binding));
                if g.static_facts.contains(&key) == *neg {
                    continue 'outer;
                }
            }
            rec(g, depth + 1, domains, checks, binding, out);
        }
    }
    rec(g, 0, &domains, &checks, &mut binding, &mut combos);

    for combo in combos {
        binding[..nparams].copy_from_slice(&combo);
        let pre_nnf = g.ground_formula(&pre, &mut binding, true);
        if pre_nnf == Nnf::False {
            continue;
        }
        let mut acc = EffectAcc::default();
        ground_effect(g, &eff, &mut binding, None, &mut acc, schema, cost_function)?;
        // Bindings that add and delete the same atom (GotoLocation self-loops)
        // are dropped before their cost is required.
        if acc.add.iter().any(|k| acc.del.contains(k)) {
            g.degenerate += 1;
            continue;
        }
        if let Some(e) = acc.missing {
            return Err(e);
        }
        if acc.cost < 0.0 {
            return Err(GroundError::NegativeCost(schema.name.clone()));
        }
        out.push(RawAction {
            name: schema.name.clone(),
            args: combo,
            pre: pre_nnf,
            add: acc.add,
            del: acc.del,
            conditional: acc.conditional,
            cost: acc.cost,
        });
    }
    Ok(())
}

fn ground_effect(
    g: &mut Grounder,
    e: &LEffect,
    binding: &mut Vec<ObjId>,
    cond: Option<usize>,
    acc: &mut EffectAcc,
    schema: &ActionSchema,
    cost_function: &str,
) -> Result<(), GroundError> {
    match e {
        LEffect::And(es) => {
            for x in es {
                ground_effect(g, x, binding, cond, acc, schema, cost_function)?;
            }
        }
        LEffect::Add(p, args) | LEffect::Del(p, args) => {
            let key = (*p, g.resolve(args, binding));
            let is_add = matches!(e, LEffect::Add(..));
            match cond {
                Some(i) => {
                    let c = &mut acc.conditional[i];
                    if is_add { c.1.push(key) } else { c.2.push(key) }
                }
                None => {
                    if is_add { acc.add.push(key) } else { acc.del.push(key) }
                }
            }
        }
        LEffect::Forall(vars, body) => {
            let domains: Vec<Vec<ObjId>> = vars.iter().map(|(_, t)| g.universe(t)).collect();
            if domains.iter().any(Vec::is_empty) {
                g.notes.insert(format!("forall effect of {} over an empty type", schema.name));
            }
            let mut combos = Vec::new();
            for_each_binding(&domains, &mut |c| combos.push(c.to_vec()));
            for combo in combos {
                for ((slot, _), &o) in vars.iter().zip(&combo) {
                    if binding.len() <= *slot {
                        binding.resize(*slot + 1, 0);
                    }
                    binding[*slot] = o;
                }
                ground_effect(g, body, binding, cond, acc, schema, cost_function)?;
            }
        }
        LEffect::When(c, body) => {
            let c = g.ground_formula(c, binding, true);
            if c == Nnf::False {
                return Ok(());
            }
            if c == Nnf::True {
                return ground_effect(g, body, binding, cond, acc, schema, cost_function);
            }
            acc.conditional.push((c, Vec::new(), Vec::new()));
            let idx = acc.conditional.len() - 1;
            ground_effect(g, body, binding, Some(idx), acc, schema, cost_function)?;
        }
        LEffect::Increase(target, amount) => {
            if target != cost_function {
                return Err(GroundError::UnsupportedNumeric {
                    action: schema.name.clone(),
                    detail: format!("only `{cost_function}` may be increased, found `{target}`"),
                });
            }
            if cond.is_some() {
                return Err(GroundError::UnsupportedNumeric {
                    action: schema.name.clone(),
                    detail: "conditional cost increase".into(),
                });
            }
            acc.cost += match amount {
                NumExpr::Number(v) => *v,
                NumExpr::Function(f) => {
                    let args: Vec<String> = f
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(slot) => {
                                let s: usize = slot.parse().expect("slot placeholder");
                                g.objects[binding[s] as usize].name.clone()
                            }
                            Term::Const(c) => c.clone(),
                        })
                        .collect();
                    match g.numeric.get(&(f.name.clone(), args.clone())) {
                        Some(v) => *v,
                        None => {
                            acc.missing.get_or_insert(GroundError::MissingFunctionValue {
                                function: f.name.clone(),
                                args,
                                action: schema.name.clone(),
                            });
                            0.0
                        }
                    }
                }
            };
        }
    }
    Ok(())
}
