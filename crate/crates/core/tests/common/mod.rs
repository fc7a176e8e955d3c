//! Shared fixtures and brute-force oracles for integration tests.
#![allow(dead_code)]

pub mod cosim;

use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::cmp::Reverse;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use hiprl::pddl::{apply_unchecked, ground, household_domain, parse_problem, Domain, GroundTask};
use rand::seq::SliceRandom;
use rand::Rng;

pub const RTYPES: [(&str, bool); 6] = [
    ("Fridge", true),
    ("Microwave", true),
    ("Cabinet", true),
    ("Drawer", true),
    ("Sink", false),
    ("GarbageCan", false),
];
pub const OTYPES: [&str; 5] = ["Mug", "Apple", "Fork", "Bowl", "Bread"];

/// The shipped domain, parsed once.
pub fn domain() -> &'static Domain {
    static D: OnceLock<Domain> = OnceLock::new();
    D.get_or_init(household_domain)
}

/// Which small classes fit which receptacle class in the generated instances.
pub fn fits(r: &str, o: &str) -> bool {
    matches!(
        (r, o),
        ("Fridge", "Apple" | "Bread" | "Mug" | "Bowl")
            | ("Microwave", "Mug" | "Bowl" | "Bread" | "Apple")
            | ("Cabinet", "Mug" | "Bowl" | "Bread")
            | ("Drawer", "Fork" | "Bread")
            | ("Sink", "Mug" | "Bowl" | "Fork" | "Apple")
            | ("GarbageCan", "Apple" | "Bread")
    )
}

#[derive(Debug, Clone, Copy)]
pub enum GoalKind {
    PutIn,
    Existence,
    Counting,
    Containment,
}

#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub locations: usize,
    pub receptacles: usize,
    pub objects: usize,
}

/// Random household problem text over the shipped domain.
pub fn random_problem<R: Rng>(rng: &mut R, spec: &InstanceSpec, kind: GoalKind) -> String {
    let nl = spec.locations.max(1);
    let mut objects = vec!["a - agent".to_string()];
    let mut init = vec!["(atLocation a l0)".to_string(), "(= (totalCost) 0)".to_string()];
    // Locations sit on a small grid so distances form a metric, as they do
    // when derived from map paths.
    let mut cells: Vec<(i32, i32)> = Vec::new();
    while cells.len() < nl {
        let c = (rng.gen_range(0..7), rng.gen_range(0..7));
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    for i in 0..nl {
        objects.push(format!("l{i} - location"));
        for j in 0..nl {
            if i != j {
                let d = (cells[i].0 - cells[j].0).abs() + (cells[i].1 - cells[j].1).abs();
                init.push(format!("(= (distance l{i} l{j}) {d})"));
            }
        }
    }
    for (t, _) in RTYPES {
        objects.push(format!("{t}Type - rtype"));
    }
    for o in OTYPES {
        objects.push(format!("{o}Type - otype"));
    }
    for (t, _) in RTYPES {
        for o in OTYPES {
            if fits(t, o) {
                init.push(format!("(canContain {t}Type {o}Type)"));
            }
        }
    }
    let mut recs = Vec::new();
    let mut opened_one = false;
    for i in 0..spec.receptacles {
        let (t, openable) = RTYPES[rng.gen_range(0..RTYPES.len())];
        let name = format!("{t}_{i}");
        let loc = rng.gen_range(0..nl);
        objects.push(format!("{name} - receptacle"));
        init.push(format!("(receptacleType {name} {t}Type)"));
        init.push(format!("(receptacleAtLocation {name} l{loc})"));
        if openable {
            init.push(format!("(openable {name})"));
            if !opened_one && rng.gen_bool(0.15) {
                opened_one = true;
                init.push(format!("(opened {name})"));
                init.push(format!("(checked {name})"));
            }
        } else if loc == 0 && rng.gen_bool(0.5) {
            init.push(format!("(checked {name})"));
        }
        recs.push((name, t, loc));
    }
    let mut full = HashSet::new();
    let mut placed = Vec::new();
    for i in 0..spec.objects {
        let o = OTYPES[rng.gen_range(0..OTYPES.len())];
        let hosts: Vec<usize> = (0..recs.len()).filter(|&r| fits(recs[r].1, o) && !full.contains(&r)).collect();
        let Some(&r) = hosts.choose(rng) else { continue };
        full.insert(r);
        let name = format!("{o}_{i}");
        objects.push(format!("{name} - object"));
        init.push(format!("(objectType {name} {o}Type)"));
        init.push(format!("(inReceptacle {name} {})", recs[r].0));
        init.push(format!("(objectAtLocation {name} l{})", recs[r].2));
        init.push(format!("(full {})", recs[r].0));
        placed.push((name, o, r));
    }
    let subject = OTYPES[rng.gen_range(0..OTYPES.len())];
    let target = RTYPES[rng.gen_range(0..RTYPES.len())].0;
    let all_checked = format!(
        "(forall (?t - rtype) (forall (?r - receptacle) (or (not (and (canContain ?t {subject}Type) (receptacleType ?r ?t))) (checked ?r))))"
    );
    let all_closed = "(forall (?re - receptacle) (not (opened ?re)))";
    let goal = match kind {
        GoalKind::PutIn => format!(
            "(exists (?o - object) (exists (?r - receptacle) (and (objectType ?o {subject}Type) (receptacleType ?r {target}Type) (inReceptacle ?o ?r))))"
        ),
        GoalKind::Existence => format!(
            "(or (exists (?o - object) (objectType ?o {subject}Type)) (and {all_checked} {all_closed}))"
        ),
        GoalKind::Counting => format!("(and {all_checked} {all_closed})"),
        GoalKind::Containment => format!(
            "(forall (?r - receptacle) (or (not (receptacleType ?r {target}Type)) (checked ?r)))"
        ),
    };
    format!(
        "(define (problem gen)\n  (:domain qa_vsp_task)\n  (:objects {})\n  (:init {})\n  (:goal {goal})\n  (:metric minimize (totalCost)))\n",
        objects.join(" "),
        init.join(" ")
    )
}

pub fn random_task<R: Rng>(rng: &mut R, spec: &InstanceSpec, kind: GoalKind) -> GroundTask {
    let d = household_domain();
    let text = random_problem(rng, spec, kind);
    let p = parse_problem(&text, &d).unwrap_or_else(|e| panic!("{e}\n{text}"));
    ground(&d, &p).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

pub fn successors(task: &GroundTask, facts: &FixedBitSet) -> Vec<(usize, FixedBitSet)> {
    let state = hiprl::pddl::State { facts: facts.clone(), total_cost: 0.0 };
    task.actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.pre.iter().all(|&f| facts.contains(f)))
        .map(|(i, a)| (i, apply_unchecked(a, &state).facts))
        .collect()
}

pub struct BfsReport {
    pub states: usize,
    pub goal_reachable: bool,
    /// Hit the state limit before finishing.
    pub truncated: bool,
}

/// Exhaustive breadth-first enumeration of the reachable state space.
pub fn bfs_oracle(task: &GroundTask, limit: usize) -> BfsReport {
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(task.init.facts.clone());
    queue.push_back(task.init.facts.clone());
    let mut goal_reachable = false;
    while let Some(s) = queue.pop_front() {
        let st = hiprl::pddl::State { facts: s.clone(), total_cost: 0.0 };
        if hiprl::pddl::holds(&task.goal, &st) {
            goal_reachable = true;
        }
        for (_, n) in successors(task, &s) {
            if seen.len() >= limit {
                return BfsReport { states: seen.len(), goal_reachable, truncated: true };
            }
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    BfsReport { states: seen.len(), goal_reachable, truncated: false }
}

/// Optimal plan cost by uniform-cost search over the real (non-relaxed) task.
pub fn dijkstra_oracle(task: &GroundTask) -> Option<f64> {
    // Costs are small non-negative numbers; scale to integers for a total order.
    let scale = 1000.0;
    let mut dist: HashMap<FixedBitSet, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(task.init.facts.clone(), 0);
    heap.push(Reverse((0u64, task.init.facts.clone())));
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&best| best < d) {
            continue;
        }
        let st = hiprl::pddl::State { facts: s.clone(), total_cost: 0.0 };
        if hiprl::pddl::holds(&task.goal, &st) {
            return Some(d as f64 / scale);
        }
        for (a, n) in successors(task, &s) {
            let nd = d + (task.actions[a].cost * scale).round() as u64;
            if dist.get(&n).is_none_or(|&old| nd < old) {
                dist.insert(n.clone(), nd);
                heap.push(Reverse((nd, n)));
            }
        }
    }
    None
}

/// Walled rectangular room with receptacles and objects placed by hand.
pub fn room(
    width: i32,
    height: i32,
    receptacles: &[(hiprl::world::ReceptacleClass, i32, i32)],
    objects: &[(hiprl::world::ObjectClass, hiprl::world::Place)],
) -> hiprl::world::Scene {
    use hiprl::world::{Cell, Grid, Object, Receptacle, Scene, Tile};
    let mut grid = Grid::new(width, height, Tile::Floor);
    for c in grid.cells().collect::<Vec<_>>() {
        if c.x == 0 || c.y == 0 || c.x == width - 1 || c.y == height - 1 {
            grid.set(c, Tile::Wall);
        }
    }
    Scene {
        seed: 0,
        grid,
        receptacles: receptacles
            .iter()
            .enumerate()
            .map(|(id, &(class, x, y))| Receptacle {
                id,
                class,
                cell: Cell::new(x, y),
                openable: class.openable(),
                open: false,
                capacity: 1,
            })
            .collect(),
        objects: objects.iter().enumerate().map(|(id, &(class, place))| Object { id, class, place }).collect(),
    }
}

/// Hand-written task with the true answer filled in from `scene`.
pub fn task(
    scene: &hiprl::world::Scene,
    kind: hiprl::world::TaskKind,
    object: hiprl::world::ObjectClass,
    receptacle: Option<hiprl::world::ReceptacleClass>,
    start: hiprl::world::Pose,
) -> hiprl::world::TaskSpec {
    hiprl::world::TaskSpec {
        id: "hand".into(),
        scene_seed: scene.seed,
        seed: 0,
        kind,
        object,
        receptacle,
        answer: hiprl::world::true_answer(scene, kind, object, receptacle),
        start,
        split: hiprl::world::Split::UnseenTest,
        oracle_length: None,
    }
}
