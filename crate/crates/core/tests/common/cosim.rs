//! Predicate image of a world state and a checker that replays primitives
//! against the household domain's declared effects.

use std::collections::{BTreeMap, BTreeSet};

use hiprl::pddl::{applicable, apply, parse_problem, GroundTask};
use hiprl::world::{
    generate_scene, generate_task, rng::stream, Heading, ObjectClass, Place, Pose, PrimitiveAction, ReceptacleClass,
    SceneConfig, TaskKind, WorldState,
};
use rand::Rng;

/// Predicates whose truth the world determines and the domain changes.
const COMPARED: [&str; 5] = ["atLocation", "opened", "inReceptacle", "holds", "holdsAny"];

pub type Image = BTreeSet<String>;

fn heading_name(h: Heading) -> &'static str {
    match h {
        Heading::N => "n",
        Heading::E => "e",
        Heading::S => "s",
        Heading::W => "w",
    }
}

/// A symbolic location is a pose; a receptacle is "at" the pose facing it.
pub fn location(p: Pose) -> String {
    format!("p_{}_{}_{}", p.cell.x, p.cell.y, heading_name(p.heading))
}

fn atom(pred: &str, args: &[&str]) -> String {
    format!("({pred} {})", args.join(" "))
}

/// Fluent atoms of the compared predicates plus `full`.
pub fn image(w: &WorldState) -> Image {
    let mut out = Image::new();
    let here = location(w.pose());
    out.insert(atom("atLocation", &["a", &here]));
    for r in &w.scene.receptacles {
        let name = r.pddl_name();
        if r.open {
            out.insert(atom("opened", &[&name]));
        }
        if w.scene.occupancy(r.id) >= r.capacity {
            out.insert(atom("full", &[&name]));
        }
    }
    for o in &w.scene.objects {
        let name = o.pddl_name();
        match o.place {
            Place::In(r) => {
                out.insert(atom("inReceptacle", &[&name, &w.scene.receptacles[r].pddl_name()]));
            }
            Place::Held => {
                out.insert(atom("holds", &["a", &name]));
            }
            Place::Floor(_) => {}
        }
    }
    if w.agent.held.is_some() {
        out.insert(atom("holdsAny", &["a"]));
    }
    out
}

/// Problem text over the whole scene with the given poses as locations and
/// the pre-state image as init.
fn problem_text(w: &WorldState, poses: &[Pose], init_image: &Image) -> String {
    let mut objects = vec!["a - agent".to_string()];
    let mut init: Vec<String> = init_image.iter().cloned().collect();
    init.push("(= (totalCost) 0)".into());
    let mut locs: Vec<String> = poses.iter().map(|&p| location(p)).collect();
    locs.dedup();
    for l in &locs {
        objects.push(format!("{l} - location"));
    }
    for a in &locs {
        for b in &locs {
            if a != b {
                init.push(format!("(= (distance {a} {b}) 1)"));
            }
        }
    }
    for c in ReceptacleClass::ALL {
        objects.push(format!("{} - rtype", c.pddl_type()));
    }
    for c in ObjectClass::ALL {
        objects.push(format!("{} - otype", c.pddl_type()));
        for r in ReceptacleClass::ALL {
            if r.can_contain(c) {
                init.push(atom("canContain", &[&r.pddl_type(), &c.pddl_type()]));
            }
        }
    }
    for r in &w.scene.receptacles {
        let name = r.pddl_name();
        objects.push(format!("{name} - receptacle"));
        init.push(atom("receptacleType", &[&name, &r.class.pddl_type()]));
        if r.openable {
            init.push(atom("openable", &[&name]));
        }
        for &p in poses {
            if p.front() == r.cell {
                init.push(atom("receptacleAtLocation", &[&name, &location(p)]));
            }
        }
    }
    for o in &w.scene.objects {
        let name = o.pddl_name();
        objects.push(format!("{name} - object"));
        init.push(atom("objectType", &[&name, &o.class.pddl_type()]));
        if let Place::In(r) = o.place {
            for &p in poses {
                if p.front() == w.scene.receptacles[r].cell {
                    init.push(atom("objectAtLocation", &[&name, &location(p)]));
                }
            }
        }
    }
    init.sort();
    init.dedup();
    format!(
        "(define (problem cosim) (:domain qa_vsp_task) (:objects {}) (:init {}) (:goal (and)) (:metric minimize (totalCost)))",
        objects.join(" "),
        init.join(" ")
    )
}

/// Compared atoms true in a planner state.
fn state_image(task: &GroundTask, state: &hiprl::pddl::State) -> Image {
    state
        .true_fluents()
        .filter_map(|f| task.fluent_atom(f))
        .filter(|(p, _)| COMPARED.contains(p) || *p == "full")
        .map(|(p, args)| format!("({p} {})", args.join(" ")))
        .collect()
}

fn compared(img: &Image, with_full: bool) -> Image {
    img.iter()
        .filter(|a| {
            let p = a.trim_start_matches('(').split(' ').next().unwrap();
            COMPARED.contains(&p) || (with_full && p == "full")
        })
        .cloned()
        .collect()
}

/// The domain action corresponding to a primitive, if it has one.
fn counterpart(w: &WorldState, action: PrimitiveAction, after: Pose) -> Option<String> {
    let here = location(w.pose());
    let label = |name: &str, args: &[&str]| format!("({name} {})", args.join(" "));
    Some(match action {
        PrimitiveAction::MoveAhead | PrimitiveAction::RotateLeft | PrimitiveAction::RotateRight => {
            if after == w.pose() {
                return None;
            }
            label("GotoLocation", &["a", &here, &location(after)])
        }
        PrimitiveAction::Open(r) => label("OpenObject", &["a", &here, &w.scene.receptacles[r].pddl_name()]),
        PrimitiveAction::Close(r) => label("CloseObject", &["a", &here, &w.scene.receptacles[r].pddl_name()]),
        PrimitiveAction::Pickup(o) => {
            let Place::In(r) = w.scene.objects[o].place else { return None };
            label(
                "PickupObject",
                &["a", &here, &w.scene.objects[o].pddl_name(), &w.scene.receptacles[r].pddl_name()],
            )
        }
        PrimitiveAction::Put(r) => {
            let o = &w.scene.objects[w.agent.held?];
            label("PutObject", &["a", &here, &o.class.pddl_type(), &o.pddl_name(), &w.scene.receptacles[r].pddl_name()])
        }
    })
}

#[derive(Debug, Default, Clone)]
pub struct CosimReport {
    pub steps: usize,
    /// Steps whose primitive mapped to a domain action.
    pub mapped: usize,
    /// Successful mapped steps per domain action.
    pub by_action: BTreeMap<String, usize>,
    pub violations: Vec<String>,
}

/// Steps `w` by `action` and checks the transition against the domain.
pub fn check_step(w: &mut WorldState, action: PrimitiveAction, report: &mut CosimReport) {
    let before = w.clone();
    let pre = image(&before);
    let obs = w.step(action).expect("valid ids");
    let post = image(w);
    report.steps += 1;
    let Some(label) = counterpart(&before, action, w.pose()) else {
        // Failed moves, floor pickups and empty-handed puts have no
        // counterpart; only failures must leave the image untouched.
        if !obs.success && pre != post {
            report.violations.push(format!("{action:?} failed but changed the state"));
        }
        return;
    };
    let poses = [before.pose(), w.pose()];
    let text = problem_text(&before, &poses, &pre);
    let d = crate::common::domain();
    let task = hiprl::pddl::ground(d, &parse_problem(&text, d).expect("problem parses")).expect("problem grounds");
    let idx = task.action_by_label(&label);
    let enabled = idx.is_some_and(|i| applicable(&task.actions[i], &task.init));
    if enabled != obs.success {
        report.violations.push(format!("{label}: world success {} but domain applicable {enabled}", obs.success));
        return;
    }
    if !obs.success {
        if pre != post {
            report.violations.push(format!("{label} failed but changed the state"));
        }
        return;
    }
    report.mapped += 1;
    *report.by_action.entry(task.actions[idx.unwrap()].name.clone()).or_default() += 1;
    let next = apply(&task, &task.actions[idx.unwrap()], &task.init).expect("applicable");
    // Grasping empties a receptacle, which the domain leaves `full`.
    let with_full = !matches!(action, PrimitiveAction::Pickup(_));
    let expected = compared(&state_image(&task, &next), with_full);
    let got = compared(&post, with_full);
    if expected != got {
        let missing: Vec<_> = expected.difference(&got).collect();
        let extra: Vec<_> = got.difference(&expected).collect();
        report.violations.push(format!("{label}: missing {missing:?}, unexpected {extra:?}"));
    }
}

/// Biased random primitive: interactions target the faced receptacle often.
pub fn random_primitive<R: Rng>(rng: &mut R, w: &WorldState) -> PrimitiveAction {
    let faced = w.scene.receptacle_at(w.pose().front()).map(|r| r.id);
    let nr = w.scene.receptacles.len();
    let r = match faced {
        Some(r) if rng.gen_bool(0.8) => r,
        _ => rng.gen_range(0..nr),
    };
    let inside: Vec<usize> =
        w.scene.objects.iter().filter(|o| o.place == Place::In(r)).map(|o| o.id).collect();
    if w.agent.held.is_some() && faced.is_some() && rng.gen_bool(0.3) {
        return if w.scene.receptacles[r].accessible() { PrimitiveAction::Put(r) } else { PrimitiveAction::Open(r) };
    }
    match rng.gen_range(0..12) {
        0..=2 => PrimitiveAction::MoveAhead,
        3 => PrimitiveAction::RotateLeft,
        4 => PrimitiveAction::RotateRight,
        5 | 6 => PrimitiveAction::Open(r),
        7 => PrimitiveAction::Close(r),
        8 | 9 => match inside.first() {
            Some(&o) if rng.gen_bool(0.8) => PrimitiveAction::Pickup(o),
            _ => PrimitiveAction::Pickup(rng.gen_range(0..w.scene.objects.len())),
        },
        _ => PrimitiveAction::Put(r),
    }
}

/// `sequences` random primitive sequences of `length` steps on generated
/// scenes (one floor object each).
pub fn run_cosim(sequences: u64, length: usize, seed: u64) -> CosimReport {
    let config = SceneConfig { floor_objects: 1, ..SceneConfig::default() };
    let mut report = CosimReport::default();
    let mut scenes = Vec::new();
    let mut s = 0;
    while scenes.len() < 20 {
        if let Ok(scene) = generate_scene(seed.wrapping_add(s), &config) {
            scenes.push(scene);
        }
        s += 1;
    }
    for n in 0..sequences {
        let scene = &scenes[(n % scenes.len() as u64) as usize];
        let task = generate_task(scene, n, TaskKind::PutIn).or_else(|_| generate_task(scene, n, TaskKind::Existence));
        let start = task.expect("scene supports a task").start;
        let mut w = WorldState::new(scene, start);
        let mut rng = stream(seed, &format!("cosim/{n}"));
        for _ in 0..length {
            let a = random_primitive(&mut rng, &w);
            check_step(&mut w, a, &mut report);
        }
    }
    report
}
