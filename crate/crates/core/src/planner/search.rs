//! Enforced hill-climbing with a greedy best-first fallback.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::time::Instant;

use fixedbitset::FixedBitSet;

use super::rpg::RelaxedTask;
use super::{Outcome, Plan, PlanResult, PlanStats, PlannerConfig, SearchPhase};
use crate::pddl::{apply_unchecked, GroundTask, State};

/// States explored by one EHC plateau search before giving up.
pub const PLATEAU_LIMIT: usize = 10_000;

enum Stop {
    Budget,
}

struct Ctx<'a> {
    task: &'a GroundTask,
    relaxed: RelaxedTask,
    config: &'a PlannerConfig,
    start: Instant,
    stats: PlanStats,
}

impl<'a> Ctx<'a> {
    fn new(task: &'a GroundTask, config: &'a PlannerConfig) -> Self {
        Ctx { task, relaxed: RelaxedTask::new(task), config, start: Instant::now(), stats: PlanStats::default() }
    }

    fn expand(&mut self) -> Result<(), Stop> {
        if self.stats.expanded >= self.config.node_budget {
            return Err(Stop::Budget);
        }
        if let Some(t) = self.config.time_budget {
            if self.start.elapsed() > t {
                return Err(Stop::Budget);
            }
        }
        self.stats.expanded += 1;
        Ok(())
    }

    fn evaluate(&mut self, s: &State) -> super::rpg::HeuristicResult {
        self.stats.evaluations += 1;
        self.relaxed.evaluate(s)
    }

    fn finish(mut self, outcome: Outcome, phase: SearchPhase) -> PlanResult {
        self.stats.wall_time = self.start.elapsed();
        self.stats.phase = phase;
        PlanResult { outcome, stats: self.stats }
    }

    fn plan_from(&self, actions: Vec<usize>) -> Plan {
        let cost = actions.iter().map(|&a| self.task.actions[a].cost).sum();
        Plan { actions, cost }
    }
}

struct Node {
    state: State,
    parent: usize,
    action: usize,
    depth: u32,
    g: f64,
    helpful: Vec<usize>,
}

fn path(nodes: &[Node], mut i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while i != 0 {
        out.push(nodes[i].action);
        i = nodes[i].parent;
    }
    out.reverse();
    out
}

enum EhcOutcome {
    Solved(Vec<usize>),
    Stuck,
    DeadStart,
}

/// Breadth-first bursts over helpful actions until a strictly better state is
/// found. Among the improving states at the shallowest depth the one with the
/// lowest heuristic, then the lowest path cost, is taken.
fn ehc(ctx: &mut Ctx) -> Result<EhcOutcome, Stop> {
    let mut cur = ctx.task.init.clone();
    let first = ctx.evaluate(&cur);
    let Some(mut cur_h) = first.h else { return Ok(EhcOutcome::DeadStart) };
    let mut cur_helpful = first.helpful;
    let mut plan = Vec::new();
    while cur_h > 0 {
        let mut nodes =
            vec![Node { state: cur.clone(), parent: 0, action: 0, depth: 0, g: 0.0, helpful: cur_helpful.clone() }];
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        seen.insert(cur.facts.clone());
        let mut queue = VecDeque::from([0usize]);
        let mut best: Option<(usize, f64, usize)> = None;
        let mut best_depth = u32::MAX;
        while let Some(i) = queue.pop_front() {
            if nodes[i].depth >= best_depth {
                break;
            }
            ctx.expand()?;
            let helpful = std::mem::take(&mut nodes[i].helpful);
            for a in helpful {
                let action = &ctx.task.actions[a];
                let next = apply_unchecked(action, &nodes[i].state);
                if !seen.insert(next.facts.clone()) {
                    continue;
                }
                let r = ctx.evaluate(&next);
                let Some(h) = r.h else { continue };
                let g = nodes[i].g + action.cost;
                let depth = nodes[i].depth + 1;
                nodes.push(Node { state: next, parent: i, action: a, depth, g, helpful: r.helpful });
                let idx = nodes.len() - 1;
                if h < cur_h {
                    best_depth = depth;
                    if best.is_none_or(|(bh, bg, _)| (h, g) < (bh, bg)) {
                        best = Some((h, g, idx));
                    }
                } else {
                    queue.push_back(idx);
                }
            }
            if seen.len() > PLATEAU_LIMIT {
                break;
            }
        }
        let Some((h, _, idx)) = best else { return Ok(EhcOutcome::Stuck) };
        plan.extend(path(&nodes, idx));
        cur_h = h;
        cur_helpful = std::mem::take(&mut nodes[idx].helpful);
        cur = nodes.swap_remove(idx).state;
    }
    Ok(EhcOutcome::Solved(plan))
}

/// Greedy best-first search on h over all applicable actions, FIFO among
/// equal h. Exhausting the reachable space proves the task unsolvable.
fn gbfs(ctx: &mut Ctx) -> Result<Option<Vec<usize>>, Stop> {
    let init = ctx.task.init.clone();
    let r = ctx.evaluate(&init);
    let Some(h0) = r.h else { return Ok(None) };
    let mut nodes = vec![Node { state: init.clone(), parent: 0, action: 0, depth: 0, g: 0.0, helpful: Vec::new() }];
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    seen.insert(init.facts.clone());
    let mut open = BinaryHeap::new();
    let mut counter = 0u64;
    open.push(Reverse((h0, counter, 0usize)));
    while let Some(Reverse((h, _, i))) = open.pop() {
        if h == 0 {
            return Ok(Some(path(&nodes, i)));
        }
        ctx.expand()?;
        for (a, action) in ctx.task.actions.iter().enumerate() {
            if !action.pre.iter().all(|&f| nodes[i].state.facts.contains(f)) {
                continue;
            }
            let next = apply_unchecked(action, &nodes[i].state);
            if !seen.insert(next.facts.clone()) {
                continue;
            }
            ctx.stats.evaluations += 1;
            let Some(h) = ctx.relaxed.evaluate(&next).h else { continue };
            let g = nodes[i].g + action.cost;
            let depth = nodes[i].depth + 1;
            nodes.push(Node { state: next, parent: i, action: a, depth, g, helpful: Vec::new() });
            counter += 1;
            open.push(Reverse((h, counter, nodes.len() - 1)));
        }
    }
    Ok(None)
}

pub fn enforced_hill_climb(task: &GroundTask, config: &PlannerConfig) -> PlanResult {
    let mut ctx = Ctx::new(task, config);
    let outcome = match ehc(&mut ctx) {
        Ok(EhcOutcome::Solved(p)) => Outcome::Plan(ctx.plan_from(p)),
        Ok(EhcOutcome::DeadStart) => Outcome::ProvedImpossible,
        Ok(EhcOutcome::Stuck) => Outcome::Stalled,
        Err(Stop::Budget) => Outcome::ResourceExhausted,
    };
    ctx.finish(outcome, SearchPhase::Ehc)
}

pub fn greedy_best_first(task: &GroundTask, config: &PlannerConfig) -> PlanResult {
    let mut ctx = Ctx::new(task, config);
    let outcome = match gbfs(&mut ctx) {
        Ok(Some(p)) => Outcome::Plan(ctx.plan_from(p)),
        Ok(None) => Outcome::ProvedImpossible,
        Err(Stop::Budget) => Outcome::ResourceExhausted,
    };
    ctx.finish(outcome, SearchPhase::Gbfs)
}

/// EHC first, then greedy best-first from scratch if EHC gets stuck.
pub fn plan(task: &GroundTask, config: &PlannerConfig) -> PlanResult {
    let mut ctx = Ctx::new(task, config);
    if config.ehc_enabled {
        match ehc(&mut ctx) {
            Ok(EhcOutcome::Solved(p)) => {
                let outcome = Outcome::Plan(ctx.plan_from(p));
                return ctx.finish(outcome, SearchPhase::Ehc);
            }
            Ok(EhcOutcome::DeadStart) => return ctx.finish(Outcome::ProvedImpossible, SearchPhase::Ehc),
            Ok(EhcOutcome::Stuck) => {}
            Err(Stop::Budget) => return ctx.finish(Outcome::ResourceExhausted, SearchPhase::Ehc),
        }
    }
    let outcome = match gbfs(&mut ctx) {
        Ok(Some(p)) => Outcome::Plan(ctx.plan_from(p)),
        Ok(None) => Outcome::ProvedImpossible,
        Err(Stop::Budget) => Outcome::ResourceExhausted,
    };
    ctx.finish(outcome, SearchPhase::Gbfs)
}
