//! Relaxed planning graph and the FF heuristic.

use fixedbitset::FixedBitSet;

use crate::pddl::{FluentId, GroundTask, State};

/// Level marker for facts and rules never reached.
pub const UNREACHED: u32 = u32::MAX;

/// A relaxed rule: an action's base effect, or one of its conditional effects
/// with the condition folded into the precondition.
#[derive(Debug, Clone)]
struct Rule {
    action: usize,
    pre: Vec<FluentId>,
    add: Vec<FluentId>,
}

/// Delete-relaxed view of a ground task, built once and reused for every
/// heuristic evaluation.
#[derive(Debug, Clone)]
pub struct RelaxedTask {
    rules: Vec<Rule>,
    /// Rules whose precondition mentions each fact.
    consumers: Vec<Vec<u32>>,
    /// Rules that add each fact.
    achievers: Vec<Vec<u32>>,
    /// Index of each action's base rule.
    base_rule: Vec<u32>,
    costs: Vec<f64>,
    goal_dnf: Vec<Vec<FluentId>>,
    num_fluents: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedPlanningGraph {
    /// First level at which each fact holds.
    pub fact_level: Vec<u32>,
    /// First level at which each action is applicable.
    pub action_level: Vec<u32>,
    /// Facts first reached at each level; `layers[0]` is the evaluated state.
    pub layers: Vec<Vec<FluentId>>,
    /// Level at which the goal first holds, if it is relaxed-reachable.
    pub goal_level: Option<u32>,
    /// Goal disjunct selected for extraction.
    pub goal_disjunct: Option<usize>,
    rule_level: Vec<u32>,
}

impl RelaxedPlanningGraph {
    pub fn num_levels(&self) -> usize {
        self.layers.len()
    }

    /// Facts that hold at `level` (cumulative).
    pub fn facts_at(&self, level: usize) -> Vec<FluentId> {
        let mut out: Vec<FluentId> = self.layers.iter().take(level + 1).flatten().copied().collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    /// Number of actions in the relaxed plan; `None` when the goal is not
    /// relaxed-reachable.
    pub h: Option<usize>,
    /// `(action, layer)` pairs, sorted by layer then action.
    pub relaxed_plan: Vec<(usize, u32)>,
    /// Applicable actions achieving a level-1 subgoal, in action order.
    pub helpful: Vec<usize>,
}

impl HeuristicResult {
    pub fn is_infinite(&self) -> bool {
        self.h.is_none()
    }
}

impl RelaxedTask {
    pub fn new(task: &GroundTask) -> Self {
        let n = task.num_fluents();
        let mut rules = Vec::new();
        let mut base_rule = Vec::with_capacity(task.actions.len());
        for (i, a) in task.actions.iter().enumerate() {
            base_rule.push(rules.len() as u32);
            rules.push(Rule { action: i, pre: a.pre.clone(), add: a.add.clone() });
            for c in &a.conditional {
                if c.add.is_empty() {
                    continue;
                }
                let mut pre = a.pre.clone();
                pre.extend(&c.condition);
                pre.sort_unstable();
                pre.dedup();
                rules.push(Rule { action: i, pre, add: c.add.clone() });
            }
        }
        let mut consumers = vec![Vec::new(); n];
        let mut achievers = vec![Vec::new(); n];
        for (r, rule) in rules.iter().enumerate() {
            for &p in &rule.pre {
                consumers[p].push(r as u32);
            }
            for &f in &rule.add {
                achievers[f].push(r as u32);
            }
        }
        RelaxedTask {
            rules,
            consumers,
            achievers,
            base_rule,
            costs: task.actions.iter().map(|a| a.cost).collect(),
            goal_dnf: task.goal_dnf.clone(),
            num_fluents: n,
        }
    }

    fn best_disjunct(&self, fact_level: &[u32]) -> Option<usize> {
        let mut best: Option<((u32, u64), usize)> = None;
        for (i, conj) in self.goal_dnf.iter().enumerate() {
            let mut max = 0u32;
            let mut sum = 0u64;
            let mut reached = true;
            for &f in conj {
                let l = fact_level[f];
                if l == UNREACHED {
                    reached = false;
                    break;
                }
                max = max.max(l);
                sum += l as u64;
            }
            if reached && best.is_none_or(|(k, _)| (max, sum) < k) {
                best = Some(((max, sum), i));
            }
        }
        best.map(|(_, i)| i)
    }

    /// Builds the graph until the goal appears or no new facts are added.
    pub fn build(&self, state: &State) -> RelaxedPlanningGraph {
        let mut fact_level = vec![UNREACHED; self.num_fluents];
        let mut rule_level = vec![UNREACHED; self.rules.len()];
        let mut counters: Vec<u32> = self.rules.iter().map(|r| r.pre.len() as u32).collect();
        let mut frontier: Vec<FluentId> = state.facts.ones().collect();
        for &f in &frontier {
            fact_level[f] = 0;
        }
        let mut layers = vec![frontier.clone()];
        let mut level = 0u32;
        let mut goal_level = None;
        let mut goal_disjunct = None;
        loop {
            if let Some(d) = self.best_disjunct(&fact_level) {
                goal_level = Some(level);
                goal_disjunct = Some(d);
                break;
            }
            let mut triggered: Vec<u32> = Vec::new();
            if level == 0 {
                triggered.extend((0..self.rules.len() as u32).filter(|&r| counters[r as usize] == 0));
            }
            for &f in &frontier {
                for &r in &self.consumers[f] {
                    let c = &mut counters[r as usize];
                    *c -= 1;
                    if *c == 0 {
                        triggered.push(r);
                    }
                }
            }
            triggered.sort_unstable();
            let mut next = Vec::new();
            for &r in &triggered {
                rule_level[r as usize] = level;
                for &f in &self.rules[r as usize].add {
                    if fact_level[f] == UNREACHED {
                        fact_level[f] = level + 1;
                        next.push(f);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
            layers.push(next.clone());
            frontier = next;
            level += 1;
        }
        let action_level = self.base_rule.iter().map(|&r| rule_level[r as usize]).collect();
        RelaxedPlanningGraph { fact_level, action_level, layers, goal_level, goal_disjunct, rule_level }
    }

    /// FF heuristic value, relaxed plan and helpful actions for `state`.
    pub fn evaluate(&self, state: &State) -> HeuristicResult {
        let g = self.build(state);
        self.extract(&g)
    }

    fn extract(&self, g: &RelaxedPlanningGraph) -> HeuristicResult {
        let (Some(top), Some(d)) = (g.goal_level, g.goal_disjunct) else {
            return HeuristicResult { h: None, relaxed_plan: Vec::new(), helpful: Vec::new() };
        };
        let top = top as usize;
        let n = self.num_fluents;
        let mut goals: Vec<Vec<FluentId>> = vec![Vec::new(); top + 1];
        let mut in_goals: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); top + 1];
        let mut true_at: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); top + 1];
        for &f in &self.goal_dnf[d] {
            let l = g.fact_level[f] as usize;
            if l > 0 && !in_goals[l].put(f) {
                goals[l].push(f);
            }
        }
        let mut plan: Vec<(usize, u32)> = Vec::new();
        for i in (1..=top).rev() {
            let mut k = 0;
            while k < goals[i].len() {
                let f = goals[i][k];
                k += 1;
                if true_at[i].contains(f) {
                    continue;
                }
                let r = self.achievers[f]
                    .iter()
                    .copied()
                    .filter(|&r| g.rule_level[r as usize] < i as u32)
                    .min_by(|&a, &b| {
                        let ka = (g.rule_level[a as usize], self.costs[self.rules[a as usize].action]);
                        let kb = (g.rule_level[b as usize], self.costs[self.rules[b as usize].action]);
                        ka.partial_cmp(&kb)
                            .expect("finite costs")
                            .then(self.rules[a as usize].action.cmp(&self.rules[b as usize].action))
                            .then(a.cmp(&b))
                    })
                    .expect("a fact reached at level > 0 has an achiever below it");
                let rule = &self.rules[r as usize];
                plan.push((rule.action, (i - 1) as u32));
                for &p in &rule.pre {
                    let l = g.fact_level[p] as usize;
                    if l != 0 && !true_at[i - 1].contains(p) && !in_goals[l].put(p) {
                        goals[l].push(p);
                    }
                }
                for &a in &rule.add {
                    true_at[i].insert(a);
                    true_at[i - 1].insert(a);
                }
            }
        }
        plan.sort_unstable_by_key(|&(a, l)| (l, a));
        plan.dedup();
        let mut helpful: Vec<usize> = Vec::new();
        if top >= 1 {
            for &f in &goals[1] {
                for &r in &self.achievers[f] {
                    if g.rule_level[r as usize] == 0 {
                        helpful.push(self.rules[r as usize].action);
                    }
                }
            }
        }
        helpful.sort_unstable();
        helpful.dedup();
        HeuristicResult { h: Some(plan.len()), relaxed_plan: plan, helpful }
    }
}

/// Builds the relaxed planning graph for `state`.
pub fn build_rpg(task: &GroundTask, state: &State) -> RelaxedPlanningGraph {
    RelaxedTask::new(task).build(state)
}

/// One-shot FF heuristic evaluation.
pub fn ff_heuristic(task: &GroundTask, state: &State) -> HeuristicResult {
    RelaxedTask::new(task).evaluate(state)
}
